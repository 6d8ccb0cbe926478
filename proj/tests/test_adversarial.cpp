#include <doctest.h>

#include "robnet/academic.hpp"
#include "robnet/adversarial.hpp"
#include "robnet/error.hpp"
#include "support.hpp"

using namespace robnet;
using namespace robnet::testing;

namespace {

struct Brute {
  double max_diff = -kInf;
  double min_flow = kInf;
  double max_flow = -kInf;
};

// Extremes over the vertices plus a sample cloud.
Brute brute_extremes(const Instance& inst, const ExpansionDecision& x, const UncertaintySet& u, NodeIndex p,
                     NodeIndex q, ArcIndex arc, std::size_t samples) {
  const FlowNetwork net(expand(inst, x));
  const auto verts = vertices_by_enumeration(u);
  Brute b;
  auto visit = [&](const Scenario& d) {
    const FlowState st = net.solve(d);
    b.max_diff = std::max(b.max_diff, st.potential[p] - st.potential[q]);
    b.min_flow = std::min(b.min_flow, st.flow[arc]);
    b.max_flow = std::max(b.max_flow, st.flow[arc]);
  };
  for (const Scenario& d : verts) visit(d);
  for (const Scenario& d : cloud(u, verts, samples, 9)) visit(d);
  return b;
}

}  // namespace

TEST_CASE("imbalance oracle is exact") {
  std::vector<Node> nodes{{"a", NodeKind::source, 0, 10}, {"b", NodeKind::sink, 0, 10},
                          {"c", NodeKind::source, 0, 10}, {"d", NodeKind::sink, 0, 10}};
  Arc ab, cd, bc;
  ab.id = ab.label = "ab";
  ab.to = 1;
  cd.id = cd.label = "cd";
  cd.from = 2;
  cd.to = 3;
  bc.id = bc.label = "bc";
  bc.from = 1;
  bc.to = 2;
  bc.kind = ArcKind::candidate;
  bc.cost = 1;
  const Instance inst(nodes, {ab, cd, bc});
  const UncertaintySet u = box_uncertainty(inst, {{"a", {-3, -1}}, {"b", {1, 2}}, {"c", {-3, -1}}, {"d", {1, 2}}});
  // Component {a, b}: net in [-3 + 1, -1 + 2] but the total must balance, so
  // the other component mirrors it. Max |net| = 1 at a = -1, b = 2 and so on.
  const AdversarialResult r = component_imbalance(inst, ExpansionDecision::none(inst), u, 0);
  CHECK(r.value == doctest::Approx(1.0));
  CHECK(contains(u, r.witness));
  const ExpansionDecision joined = ExpansionDecision::all(inst);
  CHECK(component_imbalance(inst, joined, u, 0).value == doctest::Approx(0.0));
  const RobustnessCertificate cert = certify_robust_feasibility(inst, ExpansionDecision::none(inst), u);
  CHECK(cert.verdict == Verdict::violated);
  REQUIRE(cert.violation);
  CHECK(cert.violation->kind == ViolationKind::imbalance);
}

TEST_CASE("oracles dominate the brute-force extremes") {
  Rng rng(31);
  for (int t = 0; t < 25; ++t) {
    RandomNetworkOptions o;
    o.nodes = 4 + rng.index(4);
    o.extra_arcs = 1 + rng.index(3);
    o.sources = 1 + rng.index(2);
    o.sinks = 2;
    o.mixed_laws = t % 2 == 1;
    const Instance inst = random_network(rng, o);
    const ExpansionDecision x = ExpansionDecision::all(inst);
    const Topology topo = expand(inst, x);
    if (topo.components.size() != 1) continue;
    const UncertaintySet u = random_box(rng, inst);
    const NodeIndex p = rng.index(inst.node_count());
    NodeIndex q = rng.index(inst.node_count() - 1);
    if (q >= p) ++q;
    const ArcIndex arc = topo.active_arcs[rng.index(topo.active_arcs.size())];
    const Brute b = brute_extremes(inst, x, u, p, q, arc, 200);
    AdversarialContext ctx(inst, x, u);
    ctx.prepare();
    const AdversarialResult diff = ctx.max_potential_difference(p, q);
    const AdversarialResult lo = ctx.min_arc_flow(arc);
    const AdversarialResult hi = ctx.max_arc_flow(arc);
    const double tol = 1e-7;
    CHECK(diff.value >= b.max_diff - tol * std::max(1.0, std::abs(b.max_diff)));
    CHECK(lo.value <= b.min_flow + tol);
    CHECK(hi.value >= b.max_flow - tol);
    // Reported values are attained at their witnesses, which lie in U.
    for (const AdversarialResult* r : {&diff, &lo, &hi}) CHECK(contains(u, r->witness, 1e-7));
    const FlowState at = solve_flow(topo, diff.witness);
    CHECK(at.potential[p] - at.potential[q] == doctest::Approx(diff.value).epsilon(1e-7));
    CHECK(solve_flow(topo, hi.witness).flow[arc] == doctest::Approx(hi.value).epsilon(1e-7));
  }
}

TEST_CASE("thresholds stop early") {
  const AcademicExample ex = make_academic_example(3, AcademicVariant::original);
  const Instance& inst = ex.instance;
  const UncertaintySet u = build_uncertainty(ex.uncertainty, inst);
  const ExpansionDecision none = ExpansionDecision::none(inst);
  const NodeIndex s = inst.node_index("s"), d1 = inst.node_index("1");
  const AdversarialResult full = max_potential_difference(inst, none, u, s, d1);
  // Two unit arcs in series carrying 2: drop 4 + 4.
  CHECK(full.value == doctest::Approx(8.0));
  CHECK(full.regime == SearchRegime::exact_vertex);
  const AdversarialResult cut = max_potential_difference(inst, none, u, s, d1, 1.0);
  CHECK(cut.threshold_hit);
  CHECK(cut.value > 1.0);
  CHECK(cut.evaluations <= full.evaluations);
  const ArcIndex a = inst.arc_index("0_2_ex");
  CHECK(max_arc_flow(inst, none, u, a).value == doctest::Approx(2.0));
  CHECK(min_arc_flow(inst, none, u, a).value == doctest::Approx(0.0));
  CHECK_FALSE(max_arc_flow(inst, none, u, a, 5.0).threshold_hit);
}

TEST_CASE("pair selection") {
  const AcademicExample ex = make_academic_example(3, AcademicVariant::original);
  const Instance& inst = ex.instance;
  const PairSelection ss = candidate_pairs(inst, ExpansionDecision::none(inst), PairMode::source_sink);
  CHECK(ss.mode == PairMode::source_sink);
  CHECK_FALSE(ss.fallback);
  CHECK(ss.pairs.size() == 3);
  const PairSelection all = candidate_pairs(inst, ExpansionDecision::none(inst), PairMode::all_pairs);
  CHECK(all.pairs.size() == 5 * 4);
  CHECK(std::is_sorted(all.pairs.begin(), all.pairs.end()));

  // A sink whose lower bound is below the inner node's refuses the reduction.
  std::vector<Node> nodes = inst.nodes();
  nodes[inst.node_index("0")].potential_min = 2;
  const Instance skew(nodes, inst.arcs());
  const PairSelection fb = candidate_pairs(skew, ExpansionDecision::none(skew), PairMode::source_sink);
  CHECK(fb.mode == PairMode::all_pairs);
  REQUIRE(fb.fallback);
  CHECK(fb.fallback->find("sink") != std::string::npos);
}

TEST_CASE("certificate matches brute force on random instances") {
  Rng rng(404);
  std::size_t robust = 0, violated = 0;
  for (int t = 0; t < 60; ++t) {
    RandomNetworkOptions o;
    o.nodes = 4 + rng.index(4);
    o.extra_arcs = rng.index(3);
    o.sources = 1 + rng.index(2);
    o.sinks = 2;
    o.candidates = 2;
    o.flow_bounds = t % 3 == 0;
    o.uniform_potentials = t % 2 == 0;
    const Instance inst = random_network(rng, o);
    const ExpansionDecision x = random_decision(rng, inst);
    const UncertaintySet u = random_box(rng, inst, rng.uniform(0.3, 1.5));
    CertifyOptions opts;
    opts.pair_mode = t % 4 == 0 ? PairMode::all_pairs : PairMode::source_sink;
    const RobustnessCertificate cert = certify_robust_feasibility(inst, x, u, opts);
    const BruteVerdict bv = brute_force_robust(inst, x, u, 100, 5);
    if (cert.verdict == Verdict::robust_feasible) {
      ++robust;
      CHECK(bv.robust);
    } else {
      ++violated;
      CHECK(cert.verdict == Verdict::violated);
      REQUIRE(cert.violation);
      CHECK(contains(u, cert.violation->witness, 1e-7));
      CHECK_FALSE(check_operational_feasibility(inst, x, cert.violation->witness).feasible);
    }
    if (!bv.robust) CHECK(cert.verdict == Verdict::violated);
  }
  CHECK(robust > 5);
  CHECK(violated > 5);
}

TEST_CASE("threads and pair modes agree") {
  const AcademicExample ex = make_academic_example(4, AcademicVariant::adapted);
  const Instance& inst = ex.instance;
  const UncertaintySet u = build_uncertainty(ex.uncertainty, inst);
  for (const ExpansionDecision& x : {ExpansionDecision::none(inst), ExpansionDecision::all(inst)}) {
    CertifyOptions one;
    CertifyOptions many;
    many.threads = 4;
    CertifyOptions all = many;
    all.pair_mode = PairMode::all_pairs;
    const auto a = certify_robust_feasibility(inst, x, u, one);
    const auto b = certify_robust_feasibility(inst, x, u, many);
    const auto c = certify_robust_feasibility(inst, x, u, all);
    CHECK(a.verdict == b.verdict);
    CHECK(a.verdict == c.verdict);
    if (a.violation) {
      CHECK(a.violation->u == b.violation->u);
      CHECK(a.violation->v == b.violation->v);
      CHECK(a.violation->witness.approx_equal(b.violation->witness));
    }
  }
}

TEST_CASE("vertex cap") {
  const AcademicExample ex = make_academic_example(5, AcademicVariant::adapted);
  const UncertaintySet u = build_uncertainty(ex.uncertainty, ex.instance);
  CHECK_THROWS_AS(shared_vertices(u, 3), BudgetError);
  CertifyOptions o;
  o.search.vertex_cap = 3;
  const RobustnessCertificate cert =
      certify_robust_feasibility(ex.instance, ExpansionDecision::all(ex.instance), u, o);
  CHECK(cert.verdict == Verdict::inconclusive);
  CHECK_FALSE(cert.notes.empty());
}
