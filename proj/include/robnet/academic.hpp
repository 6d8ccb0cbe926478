#pragma once

// Star network with one source, one hub and n sinks, every arc doubled by
// an identical unit-cost candidate.

#include <cstddef>
#include <optional>
#include <string_view>

#include "robnet/model.hpp"
#include "robnet/uncertainty.hpp"

namespace robnet {

enum class AcademicVariant {
  original,  // source injection in [-2, 0]
  adapted,   // source injection in [-2n, 0] plus a large (s, 0) candidate
};

struct AcademicExample {
  Instance instance;
  UncertaintyConfig uncertainty;
};

// Nodes "s", "0", "1".."n"; arcs "s_0_ex", "0_<i>_ex", "s_0_ca", "0_<i>_ca"
// and, for the adapted variant, "s_0_large". Throws DomainError for n < 2.
AcademicExample make_academic_example(std::size_t n, AcademicVariant variant);

std::string_view to_string(AcademicVariant variant);
std::optional<AcademicVariant> parse_academic_variant(std::string_view text);

}  // namespace robnet
