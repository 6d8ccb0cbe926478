#pragma once

// Network data model: nodes, arcs with potential laws, expansion decisions
// and the expanded graph of a decision.

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace robnet {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

using NodeIndex = std::size_t;
using ArcIndex = std::size_t;

enum class NodeKind { source, sink, inner };

struct Node {
  std::string id;
  NodeKind kind = NodeKind::inner;
  double potential_min = 0.0;
  double potential_max = 0.0;
};

enum class LawModel { quadratic_signed, power_signed, linear };

inline constexpr double kWaterExponent = 1.852;

// Strictly increasing odd coupling pi_u - pi_v = Phi(q).
struct PotentialLaw {
  LawModel model = LawModel::quadratic_signed;
  double lambda = 1.0;
  double exponent = 2.0;

  static PotentialLaw quadratic(double lambda) { return {LawModel::quadratic_signed, lambda, 2.0}; }
  static PotentialLaw power(double lambda, double exponent = kWaterExponent) {
    return {LawModel::power_signed, lambda, exponent};
  }
  static PotentialLaw linear(double lambda) { return {LawModel::linear, lambda, 1.0}; }

  // Phi(q).
  double drop(double q) const;
  // Phi'(q); zero at q = 0 for the quadratic and power laws.
  double slope(double q) const;
  // Integral of Phi from 0 to q (the arc's share of the flow energy).
  double energy(double q) const;
  // Effective exponent p with Phi(|q|) = lambda * |q|^p.
  double effective_exponent() const;
};

double potential_drop(const PotentialLaw& law, double q);

enum class ArcKind { existing, candidate };

struct Arc {
  std::string id;
  NodeIndex from = 0;
  NodeIndex to = 0;
  std::string label;
  ArcKind kind = ArcKind::existing;
  PotentialLaw law;
  double flow_min = -kInfinity;  // -inf: unbounded
  double flow_max = kInfinity;   // +inf: unbounded
  double cost = 0.0;

  bool is_candidate() const { return kind == ArcKind::candidate; }
  bool has_flow_min() const { return flow_min != -kInfinity; }
  bool has_flow_max() const { return flow_max != kInfinity; }
};

class Instance {
 public:
  Instance() = default;
  // Validates every invariant; throws ValidationError naming the offender.
  Instance(std::vector<Node> nodes, std::vector<Arc> arcs,
           std::vector<std::vector<ArcIndex>> exclusion_groups = {});

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const std::vector<std::vector<ArcIndex>>& exclusion_groups() const { return exclusion_groups_; }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t arc_count() const { return arcs_.size(); }
  const Node& node(NodeIndex i) const { return nodes_.at(i); }
  const Arc& arc(ArcIndex a) const { return arcs_.at(a); }

  std::optional<NodeIndex> find_node(std::string_view id) const;
  std::optional<ArcIndex> find_arc(std::string_view id) const;
  // Throws ValidationError for unknown ids.
  NodeIndex node_index(std::string_view id) const;
  ArcIndex arc_index(std::string_view id) const;

  const std::vector<ArcIndex>& candidate_arcs() const { return candidates_; }
  std::vector<NodeIndex> nodes_of_kind(NodeKind kind) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<ArcIndex>> exclusion_groups_;
  std::vector<ArcIndex> candidates_;
  std::unordered_map<std::string, NodeIndex> node_by_id_;
  std::unordered_map<std::string, ArcIndex> arc_by_id_;
};

// Which candidate arcs are built (x). Indexed by arc; existing arcs are
// always reported as not built.
class ExpansionDecision {
 public:
  ExpansionDecision() = default;
  explicit ExpansionDecision(std::size_t arc_count) : built_(arc_count, 0) {}

  static ExpansionDecision none(const Instance& instance);
  static ExpansionDecision all(const Instance& instance);
  // Throws ValidationError on unknown or non-candidate ids.
  static ExpansionDecision from_ids(const Instance& instance, const std::vector<std::string>& ids);

  bool built(ArcIndex a) const { return a < built_.size() && built_[a] != 0; }
  void set(ArcIndex a, bool value);

  std::vector<ArcIndex> built_arcs() const;
  std::vector<std::string> built_ids(const Instance& instance) const;
  double cost(const Instance& instance) const;
  // True when every exclusion group has at most one built arc and only
  // candidates are marked.
  bool respects(const Instance& instance) const;

  friend bool operator==(const ExpansionDecision&, const ExpansionDecision&) = default;

 private:
  std::vector<char> built_;
};

// The expanded graph G(x) and its weakly connected components.
struct Topology {
  const Instance* instance = nullptr;
  ExpansionDecision decision;
  std::vector<ArcIndex> active_arcs;
  std::vector<std::vector<NodeIndex>> components;  // each sorted ascending
  std::vector<std::size_t> component_of;           // node -> component
  std::vector<char> active;                        // arc -> is active

  bool is_active(ArcIndex a) const { return active[a] != 0; }
  // Active arcs whose endpoints lie in component c, in index order.
  std::vector<ArcIndex> component_arcs(std::size_t c) const;
  // True if the active arcs of component c form a tree.
  bool component_is_tree(std::size_t c) const;
};

// Throws ConstraintError when the decision violates an exclusion group.
Topology expand(const Instance& instance, const ExpansionDecision& decision);

// Pressure-loss coefficient of a gas pipe:
// (4/pi)^2 * friction * rs * tm * length * zm / diameter^5.
double gas_lambda(double friction, double rs, double tm, double length, double zm, double diameter);

// Investment cost of a pipe: length * 278.24 * exp(1.6 * diameter), with the
// diameter in meters.
double pipe_cost(double diameter, double length);

enum class BigMVariant {
  directed,   // M+ = pi+_u - pi-_v, M- = pi-_u - pi+_v
  symmetric,  // bounds valid for both orientations (flow-direction model)
};

struct BigM {
  double m_minus = 0.0;
  double m_plus = 0.0;
};

BigM big_m(const Arc& arc, const std::vector<Node>& nodes, BigMVariant variant = BigMVariant::directed);

std::string_view to_string(NodeKind kind);
std::string_view to_string(LawModel model);
std::string_view to_string(ArcKind kind);

}  // namespace robnet
