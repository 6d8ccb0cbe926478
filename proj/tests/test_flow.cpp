#include <doctest.h>

#include "robnet/error.hpp"
#include "robnet/flow.hpp"
#include "support.hpp"

using namespace robnet;
using namespace robnet::testing;

namespace {

Instance line(double lambda, double lo, double hi, double flow_max = kInf) {
  std::vector<Node> nodes{{"a", NodeKind::source, lo, hi}, {"b", NodeKind::sink, lo, hi}};
  Arc arc;
  arc.id = "ab";
  arc.label = "ab";
  arc.from = 0;
  arc.to = 1;
  arc.law = PotentialLaw::quadratic(lambda);
  arc.flow_max = flow_max;
  return Instance(nodes, {arc});
}

double net_out(const Instance& inst, const FlowState& st, NodeIndex i) {
  double s = 0.0;
  for (ArcIndex a = 0; a < inst.arc_count(); ++a) {
    if (inst.arc(a).from == i) s += st.flow[a];
    if (inst.arc(a).to == i) s -= st.flow[a];
  }
  return s;
}

double energy(const Instance& inst, const Topology& topo, const std::vector<double>& q) {
  double e = 0.0;
  for (ArcIndex a : topo.active_arcs) e += inst.arc(a).law.energy(q[a]);
  return e;
}

}  // namespace

TEST_CASE("single arc by hand") {
  const Instance inst = line(1.0, 1.0, 5.0);
  const FlowNetwork net(expand(inst, ExpansionDecision::none(inst)));
  Scenario d(2);
  d[0] = -2;
  d[1] = 2;
  const FlowState st = net.solve(d);
  CHECK(st.flow[0] == doctest::Approx(2.0));
  CHECK(st.potential[0] - st.potential[1] == doctest::Approx(4.0));
  CHECK(check_operational_feasibility(net, d).feasible);
  d[0] = -2.1;
  d[1] = 2.1;
  const FeasibilityReport r = check_operational_feasibility(net, d);
  CHECK_FALSE(r.feasible);
  CHECK(r.potential_gap[0] == doctest::Approx(4.41 - 4.0));
}

TEST_CASE("flow bound violations are reported") {
  const Instance inst = line(1.0, 0.0, 100.0, 1.5);
  const FlowNetwork net(expand(inst, ExpansionDecision::none(inst)));
  Scenario d(2);
  d[0] = -2;
  d[1] = 2;
  const FeasibilityReport r = check_operational_feasibility(net, d);
  CHECK_FALSE(r.feasible);
  REQUIRE(r.flow_violations.size() == 1);
  CHECK(r.flow_violations[0].upper);
  CHECK(r.flow_violations[0].amount == doctest::Approx(0.5));
}

TEST_CASE("imbalance") {
  const Instance inst = line(1.0, 0.0, 10.0);
  const FlowNetwork net(expand(inst, ExpansionDecision::none(inst)));
  Scenario d(2);
  d[0] = -1;
  d[1] = 2;
  CHECK_THROWS_AS(net.solve(d), ImbalanceError);
  const FeasibilityReport r = check_operational_feasibility(net, d);
  CHECK_FALSE(r.feasible);
  REQUIRE(r.imbalances.size() == 1);
  CHECK(r.imbalances[0].second == doctest::Approx(1.0));
  CHECK_FALSE(r.state.has_value());
}

TEST_CASE("parallel arcs split by law") {
  // lambda 1 and 4 in parallel: q1^2 = 4 q2^2, so q1 = 2 q2 and q1 + q2 = 3.
  std::vector<Node> nodes{{"a", NodeKind::source, 0, 100}, {"b", NodeKind::sink, 0, 100}};
  Arc p, q;
  p.id = p.label = "p";
  q.id = q.label = "q";
  p.to = q.to = 1;
  p.law = PotentialLaw::quadratic(1.0);
  q.law = PotentialLaw::quadratic(4.0);
  const Instance inst(nodes, {p, q});
  Scenario d(2);
  d[0] = -3;
  d[1] = 3;
  const FlowState st = solve_flow(expand(inst, ExpansionDecision::none(inst)), d);
  CHECK(st.flow[0] == doctest::Approx(2.0));
  CHECK(st.flow[1] == doctest::Approx(1.0));
}

TEST_CASE("random networks: conservation, potential law and minimum energy") {
  Rng rng(2024);
  for (int t = 0; t < 60; ++t) {
    RandomNetworkOptions o;
    o.nodes = 3 + rng.index(8);
    o.extra_arcs = rng.index(6);
    o.sources = 1 + rng.index(2);
    o.sinks = 1 + rng.index(3);
    o.mixed_laws = true;
    const Instance inst = random_network(rng, o);
    const ExpansionDecision x = random_decision(rng, inst);
    const Topology topo = expand(inst, x);
    const Scenario d = random_balanced_load(rng, inst, topo);
    const FlowState st = solve_flow(topo, d);
    for (NodeIndex i = 0; i < inst.node_count(); ++i) CHECK(std::abs(net_out(inst, st, i) + d[i]) <= 1e-8);
    for (ArcIndex a : topo.active_arcs) {
      const Arc& arc = inst.arc(a);
      const double drop = st.potential[arc.from] - st.potential[arc.to];
      CHECK(std::abs(drop - arc.law.drop(st.flow[a])) <= 1e-7 * std::max(1.0, std::abs(drop)));
    }
    // Pushing a small circulation around any cycle must not lower the energy.
    const double e0 = energy(inst, topo, st.flow);
    for (const OrientedCycle& c : cycle_collection(inst, topo.active_arcs)) {
      for (double eps : {1e-3, -1e-3}) {
        std::vector<double> q = st.flow;
        for (const auto& [a, forward] : c.arcs) q[a] += forward ? eps : -eps;
        CHECK(energy(inst, topo, q) >= e0 - 1e-12);
      }
    }
    // A random start reaches the same flow.
    FlowOptions fo;
    fo.seed = static_cast<std::uint64_t>(t);
    const FlowState again = solve_flow(topo, d, fo);
    for (ArcIndex a : topo.active_arcs) {
      const PotentialLaw& law = inst.arc(a).law;
      CHECK(std::abs(again.flow[a] - st.flow[a]) <= 1e-6 * std::max(1.0, std::abs(st.flow[a])));
      CHECK(std::abs(law.drop(again.flow[a]) - law.drop(st.flow[a])) <= 1e-8);
    }
  }
}

TEST_CASE("feasibility agrees with a potential LP") {
  Rng rng(77);
  for (int t = 0; t < 40; ++t) {
    RandomNetworkOptions o;
    o.nodes = 4 + rng.index(5);
    o.extra_arcs = rng.index(4);
    const Instance inst = random_network(rng, o);
    const ExpansionDecision x = random_decision(rng, inst);
    const Topology topo = expand(inst, x);
    Scenario d = random_balanced_load(rng, inst, topo);
    for (double& v : d.load) v *= 2.0;
    const FeasibilityReport r = check_operational_feasibility(inst, x, d);
    REQUIRE(r.state.has_value());
    // pi in bounds with pi_u - pi_v fixed to the solved drops.
    LpProblem lp;
    for (const Node& n : inst.nodes()) lp.add_variable(n.potential_min, n.potential_max);
    for (ArcIndex a : topo.active_arcs) {
      const Arc& arc = inst.arc(a);
      SparseTerms terms{{arc.from, 1.0}, {arc.to, -1.0}};
      lp.add_row(terms, Relation::equal, arc.law.drop(r.state->flow[a]));
    }
    const bool lp_ok = solve_lp(lp).status == LpStatus::optimal;
    double worst_gap = 0.0;
    for (double g : r.potential_gap) worst_gap = std::max(worst_gap, g);
    if (worst_gap < 1e-5 || worst_gap > 1e-3) CHECK(lp_ok == r.feasible);
  }
}

TEST_CASE("zero-lambda arcs carry a conserving flow") {
  std::vector<Node> nodes{{"s", NodeKind::source, 0, 10}, {"m", NodeKind::inner, 0, 10}, {"t", NodeKind::sink, 0, 10}};
  Arc a, b;
  a.id = a.label = "sm";
  a.to = 1;
  a.law = PotentialLaw::linear(0.0);
  b.id = b.label = "mt";
  b.from = 1;
  b.to = 2;
  b.law = PotentialLaw::quadratic(1.0);
  const Instance inst(nodes, {a, b});
  Scenario d(3);
  d[0] = -1.5;
  d[2] = 1.5;
  const FlowState st = solve_flow(expand(inst, ExpansionDecision::none(inst)), d);
  CHECK(st.flow[0] == doctest::Approx(1.5));
  CHECK(st.flow[1] == doctest::Approx(1.5));
  CHECK(st.potential[0] == doctest::Approx(st.potential[1]));
}

TEST_CASE("components are solved independently") {
  std::vector<Node> nodes{{"a", NodeKind::source, 0, 10}, {"b", NodeKind::sink, 0, 10},
                          {"c", NodeKind::source, 0, 10}, {"d", NodeKind::sink, 0, 10}};
  Arc ab, cd;
  ab.id = ab.label = "ab";
  ab.to = 1;
  cd.id = cd.label = "cd";
  cd.from = 2;
  cd.to = 3;
  const Instance inst(nodes, {ab, cd});
  Scenario d(4);
  d[0] = -1;
  d[1] = 1;
  d[2] = -2;
  d[3] = 2;
  const FlowState st = solve_flow(expand(inst, ExpansionDecision::none(inst)), d);
  CHECK(st.flow[0] == doctest::Approx(1.0));
  CHECK(st.flow[1] == doctest::Approx(2.0));
  CHECK(st.potential[0] == 0.0);
  CHECK(st.potential[2] == 0.0);
  d[3] = 3;
  const FeasibilityReport r = check_operational_feasibility(inst, ExpansionDecision::none(inst), d);
  REQUIRE(r.imbalances.size() == 1);
  CHECK(r.imbalances[0].first == 1);
}
