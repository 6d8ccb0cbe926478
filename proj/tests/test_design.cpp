#include <doctest.h>

#include "robnet/academic.hpp"
#include "robnet/design.hpp"
#include "robnet/error.hpp"
#include "support.hpp"

using namespace robnet;
using namespace robnet::testing;

namespace {

struct BruteMaster {
  bool feasible = false;
  double cost = 0.0;
  std::vector<ArcIndex> built;
};

// Cheapest exclusion-respecting subset with cost >= kappa that passes every
// scenario, ties to the lexicographically smallest arc list.
BruteMaster brute_master(const Instance& inst, const std::vector<Scenario>& S, double kappa) {
  const auto& cand = inst.candidate_arcs();
  BruteMaster best;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << cand.size()); ++mask) {
    ExpansionDecision x(inst.arc_count());
    for (std::size_t k = 0; k < cand.size(); ++k) x.set(cand[k], (mask >> k) & 1U);
    const double c = x.cost(inst);
    if (c < kappa - 1e-9 || !x.respects(inst)) continue;
    bool ok = true;
    for (const Scenario& d : S) ok = ok && check_operational_feasibility(inst, x, d).feasible;
    if (!ok) continue;
    const auto b = x.built_arcs();
    if (!best.feasible || c < best.cost - 1e-9 || (c <= best.cost + 1e-9 && b < best.built)) {
      best = {true, c, b};
    }
  }
  return best;
}

}  // namespace

TEST_CASE("scenario set rejects duplicates") {
  ScenarioSet s;
  CHECK(s.add(Scenario(std::vector<double>{-1, 1}), ScenarioOrigin::initial));
  CHECK_FALSE(s.add(Scenario(std::vector<double>{-1, 1 + 1e-12}), ScenarioOrigin::potential));
  CHECK(s.size() == 1);
}

TEST_CASE("master matches subset enumeration") {
  Rng rng(12);
  for (int t = 0; t < 40; ++t) {
    RandomNetworkOptions o;
    o.nodes = 4 + rng.index(3);
    o.extra_arcs = rng.index(2);
    o.candidates = 2 + rng.index(4);
    o.sinks = 2;
    const Instance inst = random_network(rng, o);
    const UncertaintySet u = random_box(rng, inst, rng.uniform(0.5, 2.0));
    std::vector<Scenario> S = sample(u, 1 + rng.index(3), static_cast<std::uint64_t>(t));
    const double kappa = rng.uniform() < 0.3 ? rng.uniform(0.0, 4.0) : 0.0;
    const MasterResult m = master_solve(inst, S, kappa);
    const BruteMaster b = brute_master(inst, S, kappa);
    REQUIRE(m.feasible == b.feasible);
    if (!b.feasible) continue;
    CHECK(m.objective == doctest::Approx(b.cost));
    CHECK(m.decision.built_arcs() == b.built);
  }
}

TEST_CASE("master honours exclusions and the budget") {
  const AcademicExample ex = make_academic_example(2, AcademicVariant::original);
  std::vector<std::vector<ArcIndex>> groups{{ex.instance.arc_index("0_1_ca"), ex.instance.arc_index("0_2_ca")}};
  const Instance inst(ex.instance.nodes(), ex.instance.arcs(), groups);
  Scenario d(inst.node_count());
  d[inst.node_index("s")] = -2;
  d[inst.node_index("1")] = 1;
  d[inst.node_index("2")] = 1;
  // Two unit loads over s-0 (drop 4) then 0-i (drop 1): sum 5 > 4, so s_0_ca
  // is required. Both loads fit once the trunk is doubled.
  const MasterResult m = master_solve(inst, {d}, 0.0);
  REQUIRE(m.feasible);
  CHECK(m.decision.built_ids(inst) == std::vector<std::string>{"s_0_ca"});
  d[inst.node_index("1")] = 2;
  d[inst.node_index("2")] = 0;
  d[inst.node_index("s")] = -2;
  // Cost 3 needs both excluded arcs.
  CHECK_FALSE(master_solve(inst, {d}, 2.5).feasible);
  const MasterResult r = master_solve(inst, {d}, 1.5);
  REQUIRE(r.feasible);
  CHECK(r.decision.built_ids(inst) == std::vector<std::string>{"s_0_ca", "0_1_ca"});
  MasterOptions tiny;
  tiny.subset_budget = 1;
  CHECK_THROWS_AS(master_solve(inst, {d}, 3.0, tiny), BudgetError);
}

TEST_CASE("academic examples") {
  for (std::size_t n : {2u, 3u, 4u}) {
    for (AcademicVariant v : {AcademicVariant::original, AcademicVariant::adapted}) {
      CAPTURE(n);
      CAPTURE(to_string(v));
      const AcademicExample ex = make_academic_example(n, v);
      const UncertaintySet u = build_uncertainty(ex.uncertainty, ex.instance);
      const DesignSolution sol = solve_robust_design(ex.instance, u);
      REQUIRE(sol.status == DesignStatus::optimal);
      CHECK(sol.objective == doctest::Approx(static_cast<double>(n + 1)));
      CHECK(brute_force_robust(ex.instance, sol.decision, u, 200, 1).robust);
      // Every scenario is a member of U and cuts off every cheaper decision.
      for (const Scenario& d : sol.scenario_set.scenarios) CHECK(contains(u, d, 1e-8));
      const BruteMaster b = brute_master(ex.instance, sol.scenario_set.scenarios, 0.0);
      CHECK(b.cost == doctest::Approx(sol.objective));
      if (v == AcademicVariant::original) {
        CHECK(sol.scenario_set.size() == n + 1);
      } else {
        CHECK(sol.scenario_set.size() == 2);
        CHECK(sol.decision.built(ex.instance.arc_index("s_0_large")));
      }
    }
  }
}

TEST_CASE("relaxation modes agree and bound the master") {
  const AcademicExample ex = make_academic_example(3, AcademicVariant::original);
  const UncertaintySet u = build_uncertainty(ex.uncertainty, ex.instance);
  std::vector<double> objectives;
  for (RelaxMode m : {RelaxMode::none, RelaxMode::reduced, RelaxMode::convex, RelaxMode::both}) {
    DesignOptions o;
    o.relax = m;
    std::vector<IterationRecord> seen;
    const DesignSolution sol = solve_robust_design(ex.instance, u, o, [&](const IterationRecord& r) { seen.push_back(r); });
    REQUIRE(sol.status == DesignStatus::optimal);
    objectives.push_back(sol.objective);
    CHECK(seen.size() == sol.iterations.size());
    for (std::size_t i = 0; i < seen.size(); ++i) {
      CHECK(seen[i].iteration == i + 1);
      if (i > 0) CHECK(seen[i].kappa >= seen[i - 1].kappa);
      if (seen[i].reduced_bound && std::isfinite(*seen[i].reduced_bound)) {
        CHECK(*seen[i].reduced_bound <= seen[i].master_objective + 1e-9);
      }
      if (seen[i].convex_bound && std::isfinite(*seen[i].convex_bound)) {
        CHECK(*seen[i].convex_bound <= seen[i].master_objective + 1e-9);
      }
    }
  }
  for (double v : objectives) CHECK(v == doctest::Approx(objectives.front()));
}

TEST_CASE("random instances reach a certified optimum") {
  Rng rng(88);
  std::size_t optimal = 0;
  for (int t = 0; t < 20; ++t) {
    RandomNetworkOptions o;
    o.nodes = 4 + rng.index(3);
    o.extra_arcs = rng.index(2);
    o.candidates = 3;
    o.sinks = 2;
    o.uniform_potentials = true;
    const Instance inst = random_network(rng, o);
    const UncertaintySet u = random_box(rng, inst, rng.uniform(0.3, 1.2));
    DesignOptions opts;
    opts.certify.search.starts = 10;
    const DesignSolution sol = solve_robust_design(inst, u, opts);
    CHECK(sol.status != DesignStatus::inconclusive);
    if (sol.status == DesignStatus::infeasible) {
      CHECK_FALSE(brute_master(inst, sol.scenario_set.scenarios, 0.0).feasible);
      continue;
    }
    ++optimal;
    CHECK(brute_force_robust(inst, sol.decision, u, 100, 2).robust);
    CHECK(brute_master(inst, sol.scenario_set.scenarios, 0.0).cost == doctest::Approx(sol.objective));
  }
  CHECK(optimal > 3);
}

TEST_CASE("initial scenarios") {
  const AcademicExample ex = make_academic_example(2, AcademicVariant::original);
  const UncertaintySet u = build_uncertainty(ex.uncertainty, ex.instance);
  DesignOptions o;
  Scenario outside(ex.instance.node_count());
  outside[ex.instance.node_index("s")] = -9;
  outside[ex.instance.node_index("1")] = 9;
  o.initial_scenarios = {outside};
  CHECK_THROWS_AS(solve_robust_design(ex.instance, u, o), DomainError);
  o.initial_scenarios = {Scenario(3)};
  CHECK_THROWS_AS(solve_robust_design(ex.instance, u, o), StructuralError);
  o.initial_scenarios = {Scenario::zero(ex.instance)};
  o.max_iterations = 1;
  const DesignSolution one = solve_robust_design(ex.instance, u, o);
  CHECK(one.status == DesignStatus::inconclusive);
  CHECK(one.message.find("iteration") != std::string::npos);
}

TEST_CASE("names round trip") {
  for (RelaxMode m : {RelaxMode::none, RelaxMode::reduced, RelaxMode::convex, RelaxMode::both}) {
    CHECK(parse_relax_mode(to_string(m)) == m);
  }
  CHECK_FALSE(parse_relax_mode("fast"));
}
