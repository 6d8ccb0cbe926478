#pragma once

// Polytopes of balanced load scenarios in H-representation.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "robnet/lp.hpp"
#include "robnet/model.hpp"
#include "robnet/scenario.hpp"

namespace robnet {

enum class UncertaintyKind { box, sum, corr, all };

struct Band {
  double lo = 1.0;
  double hi = 1.0;
};

struct CorrelationConfig {
  std::vector<std::string> sinks;  // explicit selection; empty: draw by fraction
  double cap = 0.1;                // max |d_u/b_u - d_v/b_v|
  double fraction = 0.8;           // share of sinks drawn when `sinks` is empty
  std::uint64_t seed = 0;
};

struct UncertaintyConfig {
  UncertaintyKind kind = UncertaintyKind::box;
  std::map<std::string, double> base_load;  // missing nodes load 0
  Band sink_band;
  Band source_band;
  std::optional<Band> sum_band;
  std::optional<CorrelationConfig> corr;
};

// Row a . d <= rhs over the uncertain coordinates.
struct HalfSpace {
  std::vector<double> coef;
  double rhs = 0.0;
  std::string tag;  // "box", "sum", "corr", ...
};

struct UncertaintySet {
  std::size_t node_count = 0;
  // Uncertain nodes (sources and sinks) in index order; inner nodes are
  // implicitly fixed at zero.
  std::vector<NodeIndex> coords;
  std::vector<std::size_t> coord_of;  // node -> coordinate, SIZE_MAX for inner
  std::vector<char> coord_is_source;
  // Equality rows; only the balance row sum(d) = 0 in practice.
  std::vector<HalfSpace> equalities;
  std::vector<HalfSpace> inequalities;
  std::vector<std::pair<NodeIndex, NodeIndex>> correlated_pairs;
  std::string provenance;
  std::uint64_t seed = 0;

  std::size_t dimension() const { return coords.size(); }
  Scenario lift(const std::vector<double>& c) const;
  std::vector<double> project(const Scenario& d) const;
};

// d^base of a config. Throws ValidationError on sign errors, unknown ids or
// an unbalanced base.
Scenario base_scenario(const UncertaintyConfig& config, const Instance& instance);

// Throws ValidationError on an invalid config (bad bands, unbalanced base,
// zero-base sink in the correlation selection, unknown node ids).
UncertaintySet build_uncertainty(const UncertaintyConfig& config, const Instance& instance);

// Plain box over the sources and sinks plus the balance row. Nodes missing
// from `bounds` get [0, 0].
UncertaintySet box_uncertainty(const Instance& instance,
                               const std::map<std::string, std::pair<double, double>>& bounds);

bool contains(const UncertaintySet& uset, const Scenario& d, double tol = 1e-9);

// LP over U with variables = uncertain coordinates.
LpProblem uncertainty_lp(const UncertaintySet& uset);

struct LinearOptimum {
  double value = 0.0;
  Scenario argument;
};

// Optimizes sum_u weight[u] * d_u over U (weight indexed by node). Throws
// DomainError when U is empty or the functional is unbounded.
LinearOptimum optimize_linear(const UncertaintySet& uset, const std::vector<double>& weight, Sense sense);

// Every vertex of U, each confirmed as the unique LP optimum of the sum of
// its tight normals. Throws BudgetError when more than `cap` vertices exist,
// DomainError when U is empty or unbounded.
std::vector<Scenario> enumerate_vertices(const UncertaintySet& uset, std::size_t cap = 20000);

// n members of U drawn by rejection sampling in the bounding box with the
// imbalance pushed onto the source coordinates. Deterministic per seed.
std::vector<Scenario> sample(const UncertaintySet& uset, std::size_t n, std::uint64_t seed);

std::string_view to_string(UncertaintyKind kind);
std::optional<UncertaintyKind> parse_uncertainty_kind(std::string_view text);

}  // namespace robnet
