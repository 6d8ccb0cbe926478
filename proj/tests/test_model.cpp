#include <doctest.h>

#include <cmath>

#include "robnet/academic.hpp"
#include "robnet/error.hpp"
#include "robnet/model.hpp"

using namespace robnet;

namespace {

Node node(const char* id, NodeKind kind, double lo = 0.0, double hi = 10.0) { return {id, kind, lo, hi}; }

Arc arc(const char* id, NodeIndex u, NodeIndex v, ArcKind kind = ArcKind::existing, double cost = 0.0) {
  Arc a;
  a.id = id;
  a.from = u;
  a.to = v;
  a.label = id;
  a.kind = kind;
  a.cost = cost;
  return a;
}

}  // namespace

TEST_CASE("potential laws are odd and match hand values") {
  CHECK(PotentialLaw::quadratic(1.0).drop(2.0) == doctest::Approx(4.0));
  CHECK(PotentialLaw::quadratic(1.0).drop(-2.0) == doctest::Approx(-4.0));
  CHECK(PotentialLaw::power(2.0).drop(3.0) == doctest::Approx(2.0 * std::pow(3.0, 1.852)));
  CHECK(PotentialLaw::power(2.0).drop(3.0) == doctest::Approx(15.2988).epsilon(1e-5));
  CHECK(PotentialLaw::linear(0.5).drop(-4.0) == doctest::Approx(-2.0));
  for (double q : {0.0, 0.3, 1.0, 7.5}) {
    for (const PotentialLaw& law : {PotentialLaw::quadratic(1.3), PotentialLaw::power(0.7), PotentialLaw::linear(2.0)}) {
      CHECK(law.drop(-q) == doctest::Approx(-law.drop(q)));
      CHECK(law.drop(q + 0.1) > law.drop(q));
    }
  }
  CHECK(PotentialLaw::quadratic(1.0).slope(3.0) == doctest::Approx(6.0));
  CHECK(PotentialLaw::quadratic(3.0).energy(2.0) == doctest::Approx(8.0));
}

TEST_CASE("gas lambda and pipe cost") {
  const double c = 16.0 / (M_PI * M_PI);
  CHECK(gas_lambda(1, 1, 1, 1, 1, 1) == doctest::Approx(1.62114).epsilon(1e-5));
  CHECK(gas_lambda(1, 1, 1, 1, 1, 2) == doctest::Approx(c / 32.0));
  CHECK(gas_lambda(0.01, 500, 283, 10000, 0.9, 0.5) == doctest::Approx(c * 0.01 * 500 * 283 * 10000 * 0.9 / 0.03125));
  CHECK_THROWS_AS(gas_lambda(0, 1, 1, 1, 1, 1), DomainError);
  CHECK(pipe_cost(0.0, 1.0) == doctest::Approx(278.24));
  CHECK(pipe_cost(0.8, 0.0) == 0.0);
  CHECK(pipe_cost(1.0, 1.0) == doctest::Approx(1378.13).epsilon(1e-5));
}

TEST_CASE("big-M variants") {
  std::vector<Node> nodes{node("u", NodeKind::inner, 1, 5), node("v", NodeKind::inner, 1, 5)};
  Arc a = arc("a", 0, 1);
  BigM m = big_m(a, nodes);
  CHECK(m.m_minus == -4.0);
  CHECK(m.m_plus == 4.0);
  m = big_m(a, nodes, BigMVariant::symmetric);
  CHECK(m.m_minus == -4.0);
  CHECK(m.m_plus == 4.0);
  nodes = {node("u", NodeKind::inner, 0, 2), node("v", NodeKind::inner, 1, 3)};
  m = big_m(a, nodes);
  CHECK(m.m_minus == -3.0);
  CHECK(m.m_plus == 1.0);
  nodes[1].potential_max = kInfinity;
  CHECK_THROWS_AS(big_m(a, nodes), DomainError);
}

TEST_CASE("instance validation names the offender") {
  std::vector<Node> nodes{node("a", NodeKind::source), node("b", NodeKind::sink)};
  CHECK_NOTHROW(Instance(nodes, {arc("x", 0, 1)}));
  CHECK_THROWS_WITH_AS(Instance({node("a", NodeKind::source), node("a", NodeKind::sink)}, {}),
                       doctest::Contains("\"a\""), ValidationError);
  CHECK_THROWS_AS(Instance(nodes, {arc("x", 0, 0)}), ValidationError);
  CHECK_THROWS_AS(Instance(nodes, {arc("x", 0, 1), arc("x", 1, 0)}), ValidationError);
  Arc bad = arc("y", 0, 1);
  bad.flow_min = 1.0;
  CHECK_THROWS_WITH_AS(Instance(nodes, {bad}), doctest::Contains("\"y\""), ValidationError);
  Arc neg = arc("c", 0, 1, ArcKind::candidate, -1.0);
  CHECK_THROWS_AS(Instance(nodes, {neg}), ValidationError);
  CHECK_THROWS_AS(Instance(nodes, {arc("x", 0, 1)}, {{0}}), ValidationError);
  nodes[0].potential_min = 11.0;
  CHECK_THROWS_AS(Instance(nodes, {}), ValidationError);
}

TEST_CASE("expansion decisions and exclusion groups") {
  std::vector<Node> nodes{node("a", NodeKind::source), node("b", NodeKind::sink)};
  Arc c1 = arc("c1", 0, 1, ArcKind::candidate, 2.0);
  Arc c2 = arc("c2", 0, 1, ArcKind::candidate, 3.0);
  const Instance inst(nodes, {arc("e", 0, 1), c1, c2}, {{1, 2}});
  ExpansionDecision x = ExpansionDecision::from_ids(inst, {"c2"});
  CHECK(x.built(2));
  CHECK(x.cost(inst) == 3.0);
  CHECK(x.respects(inst));
  CHECK_THROWS_AS(ExpansionDecision::from_ids(inst, {"e"}), ValidationError);
  CHECK_THROWS_AS(ExpansionDecision::from_ids(inst, {"zz"}), ValidationError);
  const ExpansionDecision all = ExpansionDecision::all(inst);
  CHECK_FALSE(all.respects(inst));
  CHECK_THROWS_AS(expand(inst, all), ConstraintError);
}

TEST_CASE("expanded graph components") {
  const AcademicExample ex = make_academic_example(3, AcademicVariant::original);
  const Instance& inst = ex.instance;
  CHECK(inst.node_count() == 5);
  CHECK(inst.candidate_arcs().size() == 4);
  CHECK(inst.arc_count() == 8);
  Topology t = expand(inst, ExpansionDecision::all(inst));
  CHECK(t.components.size() == 1);
  CHECK(t.active_arcs.size() == 8);
  CHECK_FALSE(t.component_is_tree(0));
  t = expand(inst, ExpansionDecision::none(inst));
  CHECK(t.component_is_tree(0));

  // Candidates only: build (0,1,ca).
  std::vector<Node> nodes(inst.nodes());
  std::vector<Arc> arcs;
  for (ArcIndex a : inst.candidate_arcs()) arcs.push_back(inst.arc(a));
  const Instance greenfield(nodes, arcs);
  CHECK(expand(greenfield, ExpansionDecision::none(greenfield)).components.size() == 5);
  const Topology one = expand(greenfield, ExpansionDecision::from_ids(greenfield, {"0_1_ca"}));
  REQUIRE(one.components.size() == 4);
  CHECK(one.components[0] == std::vector<NodeIndex>{0});
  CHECK(one.components[1] == std::vector<NodeIndex>{1, 2});
  CHECK(one.components[2] == std::vector<NodeIndex>{3});
}

TEST_CASE("academic generator") {
  const AcademicExample a = make_academic_example(3, AcademicVariant::adapted);
  const ArcIndex large = a.instance.arc_index("s_0_large");
  CHECK(a.instance.arc(large).is_candidate());
  CHECK(a.instance.arc(large).law.lambda == doctest::Approx(1.0 / 25.0));
  CHECK(a.uncertainty.source_band.hi == 3.0);
  const AcademicExample o = make_academic_example(2, AcademicVariant::original);
  CHECK(o.instance.node_count() == 4);
  CHECK(o.instance.arc_count() - o.instance.candidate_arcs().size() == 3);
  CHECK(o.instance.candidate_arcs().size() == 3);
  CHECK_THROWS_AS(make_academic_example(1, AcademicVariant::original), DomainError);
}
