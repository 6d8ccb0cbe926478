#include "robnet/milp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <queue>
#include <string>

#include "robnet/error.hpp"

namespace robnet {

const char* to_string(MilpStatus status) {
  switch (status) {
    case MilpStatus::optimal:
      return "optimal";
    case MilpStatus::infeasible:
      return "infeasible";
    case MilpStatus::unbounded:
      return "unbounded";
    case MilpStatus::limit:
      return "limit";
  }
  return "unknown";
}

namespace {

struct BbNode {
  double bound;  // in minimization form
  std::size_t id;
  std::vector<std::pair<std::size_t, double>> fixes;  // (var, value)
};

struct NodeOrder {
  bool operator()(const BbNode& a, const BbNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

}  // namespace

MilpSolution solve_milp(const MilpProblem& problem, const MilpOptions& options) {
  const LpProblem& base = problem.base;
  for (std::size_t j : problem.binary_vars) {
    if (j >= base.num_vars()) throw StructuralError("binary index " + std::to_string(j) + " out of range");
    if (base.lower[j] < 0.0 || base.upper[j] > 1.0) {
      throw StructuralError("binary variable " + std::to_string(j) + " has bounds outside [0, 1]");
    }
  }
  const double osign = base.sense == Sense::maximize ? -1.0 : 1.0;

  MilpSolution best;
  best.status = MilpStatus::infeasible;
  double incumbent = kInfinity;  // minimization form
  std::priority_queue<BbNode, std::vector<BbNode>, NodeOrder> open;
  open.push({-kInfinity, 0, {}});
  std::size_t next_id = 1;
  IncrementalLp lp(base);

  auto prune_level = [&]() { return incumbent - 1e-9 * std::max(1.0, std::abs(incumbent)); };

  while (!open.empty()) {
    if (best.nodes >= options.node_limit) {
      best.status = MilpStatus::limit;
      best.best_bound = osign * open.top().bound;
      return best;
    }
    BbNode node = open.top();
    open.pop();
    if (node.bound >= prune_level()) continue;
    ++best.nodes;

    for (std::size_t j : problem.binary_vars) lp.set_bounds(j, base.lower[j], base.upper[j]);
    for (const auto& [j, v] : node.fixes) lp.set_bounds(j, v, v);
    LpSolution s = lp.solve();
    if (s.status == LpStatus::infeasible) continue;
    if (s.status == LpStatus::unbounded) {
      best.status = MilpStatus::unbounded;
      return best;
    }
    const double value = osign * s.objective_value;
    if (value >= prune_level()) continue;

    // First fractional binary in the given order.
    std::size_t branch = SIZE_MAX;
    for (std::size_t j : problem.binary_vars) {
      if (std::abs(s.point[j] - std::round(s.point[j])) > options.integrality_tolerance) {
        branch = j;
        break;
      }
    }
    if (branch == SIZE_MAX) {
      incumbent = value;
      best.status = MilpStatus::optimal;
      best.objective_value = s.objective_value;
      best.point = s.point;
      for (std::size_t j : problem.binary_vars) best.point[j] = std::round(best.point[j]);
      continue;
    }
    for (double v : {0.0, 1.0}) {
      BbNode child{value, next_id++, node.fixes};
      child.fixes.emplace_back(branch, v);
      open.push(std::move(child));
    }
  }
  if (best.status == MilpStatus::optimal) best.best_bound = best.objective_value;
  return best;
}

void append_rows(LpProblem& lp, const std::vector<SparseRow>& rows) {
  for (const auto& r : rows) lp.add_row(r.terms, r.relation, r.rhs);
}

LinearizationRows mccormick_rows(const McCormickColumns& c, double p_minus, double p_plus) {
  if (!std::isfinite(p_minus) || !std::isfinite(p_plus)) {
    throw DomainError("McCormick rows need finite bounds on the potential difference");
  }
  // y_arc = s + t * y
  const double s = c.y_complemented ? 1.0 : 0.0;
  const double t = c.y_complemented ? -1.0 : 1.0;
  LinearizationRows out;
  auto row = [&](double k_pi, double k_y, Relation rel, double rhs) {
    SparseRow r;
    if (k_pi != 0.0) {
      r.terms.emplace_back(c.pi_u, k_pi);
      r.terms.emplace_back(c.pi_v, -k_pi);
    }
    r.terms.emplace_back(c.y, k_y * t);
    r.terms.emplace_back(c.gamma, -1.0);
    r.relation = rel;
    r.rhs = rhs - k_y * s;
    out.rows.push_back(std::move(r));
  };
  row(2.0, 2.0 * p_plus, Relation::less_equal, 2.0 * p_plus);
  row(2.0, 2.0 * p_minus, Relation::greater_equal, 2.0 * p_minus);
  row(0.0, 2.0 * p_minus, Relation::less_equal, 0.0);
  row(0.0, 2.0 * p_plus, Relation::greater_equal, 0.0);
  out.aux_vars.push_back(c.gamma);
  return out;
}

std::vector<OrientedCycle> cycle_collection(const Instance& instance, const std::vector<ArcIndex>& arcs) {
  std::map<std::pair<NodeIndex, NodeIndex>, std::vector<ArcIndex>> corridors;
  for (ArcIndex a : arcs) {
    const Arc& arc = instance.arc(a);
    if (arc.law.lambda == 0.0) continue;
    corridors[{std::min(arc.from, arc.to), std::max(arc.from, arc.to)}].push_back(a);
  }
  std::vector<OrientedCycle> out;
  for (auto& [key, list] : corridors) {
    std::sort(list.begin(), list.end());
    for (std::size_t i = 0; i < list.size(); ++i) {
      for (std::size_t j = i + 1; j < list.size(); ++j) {
        const Arc& ai = instance.arc(list[i]);
        const Arc& aj = instance.arc(list[j]);
        // Go along ai, come back along aj.
        out.push_back({{{list[i], true}, {list[j], aj.from == ai.to}}});
      }
    }
  }

  // Fundamental cycles of the corridor graph.
  const std::size_t n = instance.node_count();
  std::vector<std::vector<ArcIndex>> adj(n);
  std::vector<ArcIndex> reps;
  for (const auto& [key, list] : corridors) {
    const ArcIndex a = list.front();
    reps.push_back(a);
    adj[key.first].push_back(a);
    adj[key.second].push_back(a);
  }
  std::sort(reps.begin(), reps.end());
  std::vector<char> seen(n, 0);
  std::vector<char> in_tree(instance.arc_count(), 0);
  std::vector<ArcIndex> up_arc(n, SIZE_MAX);
  std::vector<NodeIndex> up(n, SIZE_MAX);
  std::vector<std::size_t> depth(n, 0);
  for (NodeIndex r = 0; r < n; ++r) {
    if (seen[r] || adj[r].empty()) continue;
    seen[r] = 1;
    std::deque<NodeIndex> queue{r};
    while (!queue.empty()) {
      const NodeIndex u = queue.front();
      queue.pop_front();
      for (ArcIndex a : adj[u]) {
        const Arc& arc = instance.arc(a);
        const NodeIndex w = arc.from == u ? arc.to : arc.from;
        if (seen[w]) continue;
        seen[w] = 1;
        in_tree[a] = 1;
        up_arc[w] = a;
        up[w] = u;
        depth[w] = depth[u] + 1;
        queue.push_back(w);
      }
    }
  }
  for (ArcIndex a : reps) {
    if (in_tree[a]) continue;
    const Arc& arc = instance.arc(a);
    OrientedCycle cyc;
    cyc.arcs.emplace_back(a, true);
    NodeIndex x = arc.from;
    NodeIndex y = arc.to;
    std::vector<std::pair<ArcIndex, bool>> down;
    while (x != y) {
      if (depth[y] >= depth[x]) {
        const Arc& t = instance.arc(up_arc[y]);
        cyc.arcs.emplace_back(up_arc[y], t.from == y);  // y -> parent
        y = up[y];
      } else {
        const Arc& t = instance.arc(up_arc[x]);
        down.emplace_back(up_arc[x], t.to == x);  // parent -> x
        x = up[x];
      }
    }
    for (auto it = down.rbegin(); it != down.rend(); ++it) cyc.arcs.push_back(*it);
    out.push_back(std::move(cyc));
  }
  return out;
}

std::vector<CutRow> acyclic_cuts(const Instance& instance, const std::vector<ArcIndex>& arcs) {
  std::vector<CutRow> rows;
  for (const OrientedCycle& cyc : cycle_collection(instance, arcs)) {
    const double size = static_cast<double>(cyc.arcs.size());
    CutRow fwd, bwd;
    double n1 = 0.0, n2 = 0.0;
    for (const auto& [a, forward] : cyc.arcs) {
      fwd.terms.emplace_back(a, forward ? 1.0 : -1.0);
      bwd.terms.emplace_back(a, forward ? -1.0 : 1.0);
      (forward ? n1 : n2) += 1.0;
    }
    fwd.rhs = size - 1.0 - n2;
    bwd.rhs = size - 1.0 - n1;
    rows.push_back(std::move(fwd));
    rows.push_back(std::move(bwd));
  }
  return rows;
}

namespace {

// Conservation flows on `arcs` with per-arc direction binaries and acyclic
// cuts. Variables: q (one per arc in `arcs`), then y, then extra columns
// appended by the caller.
struct FlowModel {
  MilpProblem milp;
  std::vector<std::size_t> q_var;  // per arc index; SIZE_MAX if absent
};

FlowModel acyclic_flow_model(const Instance& instance, const std::vector<ArcIndex>& arcs, double bound) {
  FlowModel m;
  m.q_var.assign(instance.arc_count(), SIZE_MAX);
  for (ArcIndex a : arcs) m.q_var[a] = m.milp.base.add_variable(-bound, bound);
  std::vector<CutRow> cuts = acyclic_cuts(instance, arcs);
  std::vector<std::size_t> y_var(instance.arc_count(), SIZE_MAX);
  for (const auto& cut : cuts) {
    for (const auto& [a, coef] : cut.terms) {
      (void)coef;
      if (y_var[a] != SIZE_MAX) continue;
      y_var[a] = m.milp.base.add_variable(0.0, 1.0);
      m.milp.binary_vars.push_back(y_var[a]);
    }
  }
  for (ArcIndex a : arcs) {
    if (y_var[a] == SIZE_MAX) continue;
    // -B (1 - y) <= q <= B y
    m.milp.base.add_row(SparseTerms{{m.q_var[a], 1.0}, {y_var[a], -bound}}, Relation::less_equal, 0.0);
    m.milp.base.add_row(SparseTerms{{m.q_var[a], 1.0}, {y_var[a], -bound}}, Relation::greater_equal, -bound);
  }
  for (const auto& cut : cuts) {
    SparseTerms t;
    for (const auto& [a, coef] : cut.terms) t.emplace_back(y_var[a], coef);
    m.milp.base.add_row(t, Relation::less_equal, cut.rhs);
  }
  return m;
}

SparseTerms inflow_terms(const Instance& instance, const FlowModel& m, const std::vector<ArcIndex>& arcs,
                         NodeIndex v) {
  SparseTerms t;
  for (ArcIndex a : arcs) {
    const Arc& arc = instance.arc(a);
    if (arc.to == v) t.emplace_back(m.q_var[a], 1.0);
    if (arc.from == v) t.emplace_back(m.q_var[a], -1.0);
  }
  return t;
}

TightenedBounds extremize(const Instance& instance, const std::vector<ArcIndex>& arcs, FlowModel& m) {
  TightenedBounds tb;
  tb.lo.assign(instance.arc_count(), 0.0);
  tb.hi.assign(instance.arc_count(), 0.0);
  tb.qtilde.assign(instance.arc_count(), 0.0);
  for (ArcIndex a : arcs) {
    for (Sense sense : {Sense::minimize, Sense::maximize}) {
      m.milp.base.sense = sense;
      std::fill(m.milp.base.objective.begin(), m.milp.base.objective.end(), 0.0);
      m.milp.base.objective[m.q_var[a]] = 1.0;
      MilpSolution s = solve_milp(m.milp);
      if (s.status == MilpStatus::infeasible) {
        throw ImbalanceError("no balanced acyclic flow exists for the given loads", 0, 0.0);
      }
      if (s.status != MilpStatus::optimal) {
        throw NumericalError(std::string("flow-bound tightening ended with status ") + to_string(s.status), 0.0);
      }
      (sense == Sense::minimize ? tb.lo : tb.hi)[a] = s.objective_value;
    }
    tb.qtilde[a] = std::max(std::abs(tb.lo[a]), std::abs(tb.hi[a]));
  }
  return tb;
}

}  // namespace

TightenedBounds tighten_flow_bounds(const Instance& instance, const ExpansionDecision& decision,
                                    const Scenario& scenario) {
  const Topology topo = expand(instance, decision);
  const double btol = balance_tolerance(scenario);
  for (std::size_t c = 0; c < topo.components.size(); ++c) {
    double net = 0.0;
    for (NodeIndex i : topo.components[c]) net += scenario[i];
    if (std::abs(net) > btol) {
      throw ImbalanceError("component " + std::to_string(c) + " has net load " + std::to_string(net), c, net);
    }
  }
  double bound = 0.0;
  for (double d : scenario.load) bound += std::max(0.0, d);
  FlowModel m = acyclic_flow_model(instance, topo.active_arcs, bound);
  for (NodeIndex v = 0; v < instance.node_count(); ++v) {
    m.milp.base.add_row(inflow_terms(instance, m, topo.active_arcs, v), Relation::equal, scenario[v]);
  }
  return extremize(instance, topo.active_arcs, m);
}

TightenedBounds tighten_flow_bounds_uncertain(const Instance& instance, const ExpansionDecision& decision,
                                              const UncertaintySet& uset) {
  const Topology topo = expand(instance, decision);
  double supply = 0.0, demand = 0.0;
  for (std::size_t c = 0; c < uset.dimension(); ++c) {
    std::vector<double> w(uset.node_count, 0.0);
    w[uset.coords[c]] = 1.0;
    supply += std::max(0.0, -optimize_linear(uset, w, Sense::minimize).value);
    demand += std::max(0.0, optimize_linear(uset, w, Sense::maximize).value);
  }
  const double bound = std::min(supply, demand);
  FlowModel m = acyclic_flow_model(instance, topo.active_arcs, bound);
  std::vector<std::size_t> d_var(uset.dimension());
  for (std::size_t c = 0; c < uset.dimension(); ++c) d_var[c] = m.milp.base.add_variable(-kInfinity, kInfinity);
  auto over_d = [&](const std::vector<double>& coef) {
    SparseTerms t;
    for (std::size_t c = 0; c < coef.size(); ++c) {
      if (coef[c] != 0.0) t.emplace_back(d_var[c], coef[c]);
    }
    return t;
  };
  for (const auto& e : uset.equalities) m.milp.base.add_row(over_d(e.coef), Relation::equal, e.rhs);
  for (const auto& h : uset.inequalities) m.milp.base.add_row(over_d(h.coef), Relation::less_equal, h.rhs);
  for (NodeIndex v = 0; v < instance.node_count(); ++v) {
    SparseTerms t = inflow_terms(instance, m, topo.active_arcs, v);
    if (uset.coord_of[v] != SIZE_MAX) t.emplace_back(d_var[uset.coord_of[v]], -1.0);
    m.milp.base.add_row(t, Relation::equal, 0.0);
  }
  return extremize(instance, topo.active_arcs, m);
}

ConvexRelaxation build_convex_relaxation(const Instance& instance, const std::vector<Scenario>& scenarios,
                                         double kappa, const ConvexRelaxationOptions& options) {
  if (options.segments < 1) throw DomainError("convex relaxation needs at least one segment");
  for (const Arc& arc : instance.arcs()) {
    if (arc.law.model == LawModel::power_signed && arc.law.exponent < 1.0) {
      throw DomainError("arc \"" + arc.id + "\": potential law is not convex on the nonnegatives");
    }
  }
  for (const Node& n : instance.nodes()) {
    if (!std::isfinite(n.potential_min) || !std::isfinite(n.potential_max)) {
      throw DomainError("convex relaxation needs finite potential bounds (node \"" + n.id + "\")");
    }
  }

  ConvexRelaxation out;
  LpProblem& lp = out.problem.base;
  lp.sense = Sense::minimize;
  out.x_var.assign(instance.arc_count(), SIZE_MAX);
  for (ArcIndex a : instance.candidate_arcs()) {
    out.x_var[a] = lp.add_variable(0.0, 1.0, instance.arc(a).cost);
    out.problem.binary_vars.push_back(out.x_var[a]);
  }
  {
    SparseTerms floor;
    for (ArcIndex a : instance.candidate_arcs()) floor.emplace_back(out.x_var[a], instance.arc(a).cost);
    if (kappa > 0.0) lp.add_row(floor, Relation::greater_equal, kappa);
  }
  for (const auto& group : instance.exclusion_groups()) {
    SparseTerms t;
    for (ArcIndex a : group) t.emplace_back(out.x_var[a], 1.0);
    lp.add_row(t, Relation::less_equal, 1.0);
  }

  // Corridors: unordered node pairs; the direction variable means "from the
  // lower to the higher node index".
  std::map<std::pair<NodeIndex, NodeIndex>, std::size_t> corridor_id;
  std::vector<std::size_t> corridor_of(instance.arc_count());
  for (ArcIndex a = 0; a < instance.arc_count(); ++a) {
    const Arc& arc = instance.arc(a);
    auto key = std::make_pair(std::min(arc.from, arc.to), std::max(arc.from, arc.to));
    auto it = corridor_id.emplace(key, corridor_id.size()).first;
    corridor_of[a] = it->second;
  }
  std::vector<ArcIndex> all_arcs(instance.arc_count());
  for (ArcIndex a = 0; a < instance.arc_count(); ++a) all_arcs[a] = a;
  const std::vector<CutRow> cuts = acyclic_cuts(instance, all_arcs);
  const ExpansionDecision full = ExpansionDecision::all(instance);
  const bool exclusions = !instance.exclusion_groups().empty();

  for (const Scenario& d : scenarios) {
    TightenedBounds tb;
    double throughput = 0.0;
    for (double v : d.load) throughput += std::max(0.0, v);
    bool tightened = false;
    if (options.tighten && !exclusions) {
      tb = tighten_flow_bounds(instance, full, d);
      tightened = true;
    } else if (options.tighten) {
      // Exclusion groups forbid the full build; tighten on the relaxed
      // instance without them, which only widens the intervals.
      Instance relaxed(instance.nodes(), instance.arcs());
      tb = tighten_flow_bounds(relaxed, ExpansionDecision::all(relaxed), d);
      tightened = true;
    }
    std::vector<std::size_t> q(instance.arc_count()), gamma(instance.arc_count());
    std::vector<double> qt(instance.arc_count());
    for (ArcIndex a = 0; a < instance.arc_count(); ++a) {
      const Arc& arc = instance.arc(a);
      double lo = tightened ? tb.lo[a] : -throughput;
      double hi = tightened ? tb.hi[a] : throughput;
      lo = std::max(lo, arc.flow_min);
      hi = std::min(hi, arc.flow_max);
      if (lo > hi) {  // the scenario cannot be routed within the bounds
        lo = hi = 0.0;
        lp.add_row(SparseTerms{}, Relation::greater_equal, 1.0);
      }
      q[a] = lp.add_variable(lo, hi);
      qt[a] = std::max(std::abs(lo), std::abs(hi));
    }
    std::vector<std::size_t> pi(instance.node_count());
    for (NodeIndex v = 0; v < instance.node_count(); ++v) {
      pi[v] = lp.add_variable(instance.node(v).potential_min, instance.node(v).potential_max);
    }
    std::vector<std::size_t> y(corridor_id.size());
    for (auto& col : y) {
      col = lp.add_variable(0.0, 1.0);
      out.problem.binary_vars.push_back(col);
    }
    for (ArcIndex a = 0; a < instance.arc_count(); ++a) gamma[a] = lp.add_variable(-kInfinity, kInfinity);

    // Conservation.
    for (NodeIndex v = 0; v < instance.node_count(); ++v) {
      SparseTerms t;
      for (ArcIndex a = 0; a < instance.arc_count(); ++a) {
        const Arc& arc = instance.arc(a);
        if (arc.to == v) t.emplace_back(q[a], 1.0);
        if (arc.from == v) t.emplace_back(q[a], -1.0);
      }
      lp.add_row(t, Relation::equal, d[v]);
    }

    for (ArcIndex a = 0; a < instance.arc_count(); ++a) {
      const Arc& arc = instance.arc(a);
      const bool comp = arc.from > arc.to;
      const std::size_t yc = y[corridor_of[a]];
      // y_arc = s + t * y_corridor
      const double s = comp ? 1.0 : 0.0;
      const double t = comp ? -1.0 : 1.0;
      // Direction coupling: -qt (1 - y_arc) <= q <= qt y_arc.
      lp.add_row(SparseTerms{{q[a], 1.0}, {yc, -qt[a] * t}}, Relation::less_equal, qt[a] * s);
      lp.add_row(SparseTerms{{q[a], 1.0}, {yc, -qt[a] * t}}, Relation::greater_equal, -qt[a] + qt[a] * s);
      if (arc.is_candidate()) {
        // Unbuilt candidates carry no flow.
        lp.add_row(SparseTerms{{q[a], 1.0}, {out.x_var[a], -qt[a]}}, Relation::less_equal, 0.0);
        lp.add_row(SparseTerms{{q[a], 1.0}, {out.x_var[a], qt[a]}}, Relation::greater_equal, 0.0);
      }
      const BigM directed = big_m(arc, instance.nodes(), BigMVariant::directed);
      append_rows(lp, mccormick_rows({pi[arc.from], pi[arc.to], yc, gamma[a], comp}, directed.m_minus,
                                     directed.m_plus)
                          .rows);

      // (pi_v - pi_u) + gamma >= tangent(q) [+ (1 - x) M-].
      const double m_minus = arc.is_candidate() ? big_m(arc, instance.nodes(), BigMVariant::symmetric).m_minus : 0.0;
      std::vector<double> touch;
      if (arc.law.model == LawModel::linear) {
        touch = {-1.0, 1.0};
      } else if (options.segments == 1 || qt[a] == 0.0) {
        touch = {0.0};
      } else {
        for (std::size_t k = 0; k < options.segments; ++k) {
          touch.push_back(-qt[a] + 2.0 * qt[a] * static_cast<double>(k) / static_cast<double>(options.segments - 1));
        }
        if (std::none_of(touch.begin(), touch.end(), [](double p) { return p == 0.0; })) touch.push_back(0.0);
      }
      for (double p : touch) {
        double g, c0;
        if (arc.law.model == LawModel::linear) {
          g = p * arc.law.lambda;  // p = +-1 selects +-lambda q
          c0 = 0.0;
        } else {
          const double ap = std::abs(p);
          g = p == 0.0 ? 0.0 : std::copysign(arc.law.slope(ap), p);
          c0 = arc.law.drop(ap) - g * p;
        }
        SparseTerms terms{{pi[arc.from], -1.0}, {pi[arc.to], 1.0}, {gamma[a], 1.0}};
        if (g != 0.0) terms.emplace_back(q[a], -g);
        double rhs = c0;
        if (arc.is_candidate()) {
          terms.emplace_back(out.x_var[a], m_minus);
          rhs += m_minus;
        }
        lp.add_row(terms, Relation::greater_equal, rhs);
      }
    }

    // Acyclic cuts mapped onto corridor variables.
    for (const CutRow& cut : cuts) {
      std::map<std::size_t, double> coef;
      double rhs = cut.rhs;
      for (const auto& [a, c] : cut.terms) {
        const Arc& arc = instance.arc(a);
        const std::size_t yc = y[corridor_of[a]];
        if (arc.from > arc.to) {  // y_arc = 1 - y_corridor
          rhs -= c;
          coef[yc] -= c;
        } else {
          coef[yc] += c;
        }
      }
      SparseTerms t;
      for (const auto& [col, c] : coef) {
        if (std::abs(c) > 1e-12) t.emplace_back(col, c);
      }
      if (t.empty()) continue;  // constant row, always satisfied by parallel sharing
      lp.add_row(t, Relation::less_equal, rhs);
    }
  }
  return out;
}

}  // namespace robnet
