#include "robnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

#include "robnet/error.hpp"

namespace robnet {

double PotentialLaw::effective_exponent() const {
  switch (model) {
    case LawModel::quadratic_signed:
      return 2.0;
    case LawModel::power_signed:
      return exponent;
    case LawModel::linear:
      return 1.0;
  }
  return 1.0;
}

double PotentialLaw::drop(double q) const {
  switch (model) {
    case LawModel::quadratic_signed:
      return lambda * q * std::abs(q);
    case LawModel::power_signed:
      if (q == 0.0) return 0.0;
      return std::copysign(lambda * std::pow(std::abs(q), exponent), q);
    case LawModel::linear:
      return lambda * q;
  }
  return 0.0;
}

double PotentialLaw::slope(double q) const {
  switch (model) {
    case LawModel::quadratic_signed:
      return 2.0 * lambda * std::abs(q);
    case LawModel::power_signed:
      if (q == 0.0) return exponent > 1.0 ? 0.0 : kInfinity;
      return exponent * lambda * std::pow(std::abs(q), exponent - 1.0);
    case LawModel::linear:
      return lambda;
  }
  return 0.0;
}

double PotentialLaw::energy(double q) const {
  const double p = effective_exponent();
  return lambda * std::pow(std::abs(q), p + 1.0) / (p + 1.0);
}

double potential_drop(const PotentialLaw& law, double q) { return law.drop(q); }

Instance::Instance(std::vector<Node> nodes, std::vector<Arc> arcs,
                   std::vector<std::vector<ArcIndex>> exclusion_groups)
    : nodes_(std::move(nodes)), arcs_(std::move(arcs)), exclusion_groups_(std::move(exclusion_groups)) {
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.id.empty()) throw ValidationError("node #" + std::to_string(i) + " has an empty id");
    if (!node_by_id_.emplace(n.id, i).second) throw ValidationError("duplicate node id \"" + n.id + "\"");
    if (std::isnan(n.potential_min) || std::isnan(n.potential_max) || n.potential_min > n.potential_max) {
      throw ValidationError("node \"" + n.id + "\": potential_min exceeds potential_max");
    }
  }
  std::set<std::tuple<NodeIndex, NodeIndex, std::string>> triples;
  for (ArcIndex a = 0; a < arcs_.size(); ++a) {
    const Arc& arc = arcs_[a];
    if (arc.id.empty()) throw ValidationError("arc #" + std::to_string(a) + " has an empty id");
    if (!arc_by_id_.emplace(arc.id, a).second) throw ValidationError("duplicate arc id \"" + arc.id + "\"");
    if (arc.from >= nodes_.size() || arc.to >= nodes_.size()) {
      throw ValidationError("arc \"" + arc.id + "\" references a missing node");
    }
    if (arc.from == arc.to) throw ValidationError("arc \"" + arc.id + "\" is a self-loop");
    if (!triples.emplace(arc.from, arc.to, arc.label).second) {
      throw ValidationError("arc \"" + arc.id + "\": (from, to, label) is not unique");
    }
    if (!(arc.law.lambda >= 0.0) || !std::isfinite(arc.law.lambda)) {
      throw ValidationError("arc \"" + arc.id + "\": lambda must be a finite value >= 0");
    }
    if (arc.law.model == LawModel::power_signed && !(arc.law.exponent > 0.0)) {
      throw ValidationError("arc \"" + arc.id + "\": exponent must be positive");
    }
    if (std::isnan(arc.flow_min) || std::isnan(arc.flow_max) || arc.flow_min > 0.0 || arc.flow_max < 0.0) {
      throw ValidationError("arc \"" + arc.id + "\": flow bounds must satisfy flow_min <= 0 <= flow_max");
    }
    if (!(arc.cost >= 0.0) || !std::isfinite(arc.cost)) {
      throw ValidationError("arc \"" + arc.id + "\": cost must be a finite value >= 0");
    }
    if (arc.is_candidate()) candidates_.push_back(a);
  }
  for (const auto& group : exclusion_groups_) {
    for (ArcIndex a : group) {
      if (a >= arcs_.size()) throw ValidationError("exclusion group references a missing arc");
      if (!arcs_[a].is_candidate()) {
        throw ValidationError("exclusion group references non-candidate arc \"" + arcs_[a].id + "\"");
      }
    }
  }
}

std::optional<NodeIndex> Instance::find_node(std::string_view id) const {
  auto it = node_by_id_.find(std::string(id));
  if (it == node_by_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<ArcIndex> Instance::find_arc(std::string_view id) const {
  auto it = arc_by_id_.find(std::string(id));
  if (it == arc_by_id_.end()) return std::nullopt;
  return it->second;
}

NodeIndex Instance::node_index(std::string_view id) const {
  if (auto i = find_node(id)) return *i;
  throw ValidationError("unknown node \"" + std::string(id) + "\"");
}

ArcIndex Instance::arc_index(std::string_view id) const {
  if (auto a = find_arc(id)) return *a;
  throw ValidationError("unknown arc \"" + std::string(id) + "\"");
}

std::vector<NodeIndex> Instance::nodes_of_kind(NodeKind kind) const {
  std::vector<NodeIndex> out;
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind == kind) out.push_back(i);
  }
  return out;
}

ExpansionDecision ExpansionDecision::none(const Instance& instance) {
  return ExpansionDecision(instance.arc_count());
}

ExpansionDecision ExpansionDecision::all(const Instance& instance) {
  ExpansionDecision x(instance.arc_count());
  for (ArcIndex a : instance.candidate_arcs()) x.set(a, true);
  return x;
}

ExpansionDecision ExpansionDecision::from_ids(const Instance& instance, const std::vector<std::string>& ids) {
  ExpansionDecision x(instance.arc_count());
  for (const auto& id : ids) {
    ArcIndex a = instance.arc_index(id);
    if (!instance.arc(a).is_candidate()) throw ValidationError("arc \"" + id + "\" is not a candidate arc");
    x.set(a, true);
  }
  return x;
}

void ExpansionDecision::set(ArcIndex a, bool value) {
  if (a >= built_.size()) built_.resize(a + 1, 0);
  built_[a] = value ? 1 : 0;
}

std::vector<ArcIndex> ExpansionDecision::built_arcs() const {
  std::vector<ArcIndex> out;
  for (ArcIndex a = 0; a < built_.size(); ++a) {
    if (built_[a]) out.push_back(a);
  }
  return out;
}

std::vector<std::string> ExpansionDecision::built_ids(const Instance& instance) const {
  std::vector<std::string> out;
  for (ArcIndex a : built_arcs()) out.push_back(instance.arc(a).id);
  return out;
}

double ExpansionDecision::cost(const Instance& instance) const {
  double total = 0.0;
  for (ArcIndex a : built_arcs()) total += instance.arc(a).cost;
  return total;
}

bool ExpansionDecision::respects(const Instance& instance) const {
  for (ArcIndex a : built_arcs()) {
    if (a >= instance.arc_count() || !instance.arc(a).is_candidate()) return false;
  }
  for (const auto& group : instance.exclusion_groups()) {
    int count = 0;
    for (ArcIndex a : group) count += built(a) ? 1 : 0;
    if (count > 1) return false;
  }
  return true;
}

std::vector<ArcIndex> Topology::component_arcs(std::size_t c) const {
  std::vector<ArcIndex> out;
  for (ArcIndex a : active_arcs) {
    if (component_of[instance->arc(a).from] == c) out.push_back(a);
  }
  return out;
}

bool Topology::component_is_tree(std::size_t c) const {
  return component_arcs(c).size() + 1 == components[c].size();
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

Topology expand(const Instance& instance, const ExpansionDecision& decision) {
  for (const auto& group : instance.exclusion_groups()) {
    int count = 0;
    for (ArcIndex a : group) count += decision.built(a) ? 1 : 0;
    if (count > 1) {
      std::string names;
      for (ArcIndex a : group) {
        if (decision.built(a)) names += (names.empty() ? "" : ", ") + instance.arc(a).id;
      }
      throw ConstraintError("decision builds more than one arc of an exclusion group: " + names);
    }
  }
  Topology topo;
  topo.instance = &instance;
  topo.decision = decision;
  topo.active.assign(instance.arc_count(), 0);
  DisjointSets sets(instance.node_count());
  for (ArcIndex a = 0; a < instance.arc_count(); ++a) {
    const Arc& arc = instance.arc(a);
    if (arc.is_candidate() && !decision.built(a)) continue;
    topo.active[a] = 1;
    topo.active_arcs.push_back(a);
    sets.unite(arc.from, arc.to);
  }
  // Components are numbered by their smallest node index.
  std::vector<std::size_t> label(instance.node_count(), SIZE_MAX);
  topo.component_of.assign(instance.node_count(), 0);
  for (NodeIndex i = 0; i < instance.node_count(); ++i) {
    std::size_t root = sets.find(i);
    if (label[root] == SIZE_MAX) {
      label[root] = topo.components.size();
      topo.components.emplace_back();
    }
    topo.component_of[i] = label[root];
    topo.components[label[root]].push_back(i);
  }
  return topo;
}

double gas_lambda(double friction, double rs, double tm, double length, double zm, double diameter) {
  if (!(friction > 0 && rs > 0 && tm > 0 && length > 0 && zm > 0 && diameter > 0)) {
    throw DomainError("gas_lambda: all inputs must be positive");
  }
  const double c = 4.0 / M_PI;
  return c * c * friction * rs * tm * length * zm / std::pow(diameter, 5);
}

double pipe_cost(double diameter, double length) {
  if (!(diameter >= 0.0) || !(length >= 0.0)) throw DomainError("pipe_cost: diameter and length must be >= 0");
  return length * 278.24 * std::exp(1.6 * diameter);
}

BigM big_m(const Arc& arc, const std::vector<Node>& nodes, BigMVariant variant) {
  const Node& u = nodes.at(arc.from);
  const Node& v = nodes.at(arc.to);
  for (const Node* n : {&u, &v}) {
    if (!std::isfinite(n->potential_min) || !std::isfinite(n->potential_max)) {
      throw DomainError("big_m: node \"" + n->id + "\" has an unbounded potential; big-M is undefined");
    }
  }
  if (variant == BigMVariant::directed) {
    return {u.potential_min - v.potential_max, u.potential_max - v.potential_min};
  }
  return {std::min(u.potential_min - v.potential_max, v.potential_min - u.potential_max),
          std::max(u.potential_max - v.potential_min, v.potential_max - u.potential_min)};
}

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::source:
      return "source";
    case NodeKind::sink:
      return "sink";
    case NodeKind::inner:
      return "inner";
  }
  return "inner";
}

std::string_view to_string(LawModel model) {
  switch (model) {
    case LawModel::quadratic_signed:
      return "quadratic_signed";
    case LawModel::power_signed:
      return "power_signed";
    case LawModel::linear:
      return "linear";
  }
  return "linear";
}

std::string_view to_string(ArcKind kind) { return kind == ArcKind::existing ? "existing" : "candidate"; }

}  // namespace robnet
