#include "robnet/academic.hpp"

#include <string>

#include "robnet/error.hpp"

namespace robnet {

AcademicExample make_academic_example(std::size_t n, AcademicVariant variant) {
  if (n < 2) throw DomainError("academic example needs at least 2 sinks");
  std::vector<Node> nodes;
  nodes.push_back({"s", NodeKind::source, 1.0, 5.0});
  nodes.push_back({"0", NodeKind::inner, 1.0, 5.0});
  for (std::size_t i = 1; i <= n; ++i) nodes.push_back({std::to_string(i), NodeKind::sink, 1.0, 5.0});

  auto arc = [](std::string id, NodeIndex from, NodeIndex to, ArcKind kind, double lambda) {
    Arc a;
    a.label = id.substr(id.rfind('_') + 1);
    a.id = std::move(id);
    a.from = from;
    a.to = to;
    a.kind = kind;
    a.law = PotentialLaw::quadratic(lambda);
    a.cost = kind == ArcKind::candidate ? 1.0 : 0.0;
    return a;
  };
  std::vector<Arc> arcs;
  arcs.push_back(arc("s_0_ex", 0, 1, ArcKind::existing, 1.0));
  for (std::size_t i = 1; i <= n; ++i) arcs.push_back(arc("0_" + std::to_string(i) + "_ex", 1, i + 1, ArcKind::existing, 1.0));
  arcs.push_back(arc("s_0_ca", 0, 1, ArcKind::candidate, 1.0));
  for (std::size_t i = 1; i <= n; ++i) {
    arcs.push_back(arc("0_" + std::to_string(i) + "_ca", 1, i + 1, ArcKind::candidate, 1.0));
  }
  if (variant == AcademicVariant::adapted) {
    const double k = 2.0 * static_cast<double>(n) - 1.0;
    arcs.push_back(arc("s_0_large", 0, 1, ArcKind::candidate, 1.0 / (k * k)));
  }

  // Base load -2 at s and 2/n per sink; the bands stretch it to the box.
  UncertaintyConfig u;
  u.kind = UncertaintyKind::box;
  u.base_load["s"] = -2.0;
  for (std::size_t i = 1; i <= n; ++i) u.base_load[std::to_string(i)] = 2.0 / static_cast<double>(n);
  u.sink_band = {0.0, static_cast<double>(n)};
  u.source_band = {0.0, variant == AcademicVariant::adapted ? static_cast<double>(n) : 1.0};
  return {Instance(std::move(nodes), std::move(arcs)), u};
}

std::string_view to_string(AcademicVariant variant) {
  return variant == AcademicVariant::original ? "original" : "adapted";
}

std::optional<AcademicVariant> parse_academic_variant(std::string_view text) {
  if (text == "original") return AcademicVariant::original;
  if (text == "adapted") return AcademicVariant::adapted;
  return std::nullopt;
}

}  // namespace robnet
