#include "robnet/design.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>

#include "robnet/error.hpp"
#include "robnet/flow.hpp"
#include "robnet/milp.hpp"

namespace robnet {

namespace {

double cost_tolerance(double cost) { return 1e-9 * std::max(1.0, std::abs(cost)); }

bool feasible_on(const FlowNetwork& network, const std::vector<Scenario>& scenarios, std::size_t& checks) {
  // Most recent scenarios first; they are the likeliest to fail.
  for (auto it = scenarios.rbegin(); it != scenarios.rend(); ++it) {
    ++checks;
    if (!check_operational_feasibility(network, *it).feasible) return false;
  }
  return true;
}

}  // namespace

bool ScenarioSet::contains(const Scenario& d, double tol) const {
  return std::any_of(scenarios.begin(), scenarios.end(), [&](const Scenario& s) { return s.approx_equal(d, tol); });
}

bool ScenarioSet::add(Scenario d, ScenarioOrigin origin) {
  if (contains(d)) return false;
  scenarios.push_back(std::move(d));
  origins.push_back(origin);
  return true;
}

bool feasible_for_all(const Instance& instance, const ExpansionDecision& decision,
                      const std::vector<Scenario>& scenarios) {
  if (!decision.respects(instance)) return false;
  std::size_t checks = 0;
  return feasible_on(FlowNetwork(expand(instance, decision)), scenarios, checks);
}

MasterResult master_solve(const Instance& instance, const std::vector<Scenario>& scenarios, double kappa,
                          const MasterOptions& options) {
  std::vector<ArcIndex> cand = instance.candidate_arcs();
  std::stable_sort(cand.begin(), cand.end(),
                   [&](ArcIndex a, ArcIndex b) { return instance.arc(a).cost < instance.arc(b).cost; });
  const std::size_t m = cand.size();

  struct Entry {
    double cost;
    std::vector<std::size_t> pos;  // increasing positions into cand
  };
  auto later = [](const Entry& a, const Entry& b) {
    if (a.cost != b.cost) return a.cost > b.cost;
    return a.pos > b.pos;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(later)> queue(later);
  queue.push({0.0, {}});

  MasterResult res;
  std::vector<ArcIndex> best_set;
  double found_cost = 0.0;
  while (!queue.empty()) {
    Entry e = queue.top();
    queue.pop();
    if (res.feasible && e.cost > found_cost + cost_tolerance(found_cost)) break;
    if (++res.subsets > options.subset_budget) {
      throw BudgetError("master enumeration exceeded " + std::to_string(options.subset_budget) + " subsets");
    }
    const std::size_t next = e.pos.empty() ? 0 : e.pos.back() + 1;
    if (next < m) {
      Entry add = e;
      add.pos.push_back(next);
      add.cost += instance.arc(cand[next]).cost;
      if (!e.pos.empty()) {
        Entry swap = e;
        swap.cost += instance.arc(cand[next]).cost - instance.arc(cand[e.pos.back()]).cost;
        swap.pos.back() = next;
        queue.push(std::move(swap));
      }
      queue.push(std::move(add));
    }
    if (e.cost < kappa - cost_tolerance(kappa)) continue;

    ExpansionDecision x(instance.arc_count());
    std::vector<ArcIndex> built;
    for (std::size_t p : e.pos) {
      x.set(cand[p], true);
      built.push_back(cand[p]);
    }
    std::sort(built.begin(), built.end());
    if (res.feasible && built >= best_set) continue;
    if (!x.respects(instance)) continue;
    if (!feasible_on(FlowNetwork(expand(instance, x)), scenarios, res.flow_checks)) continue;
    if (!res.feasible) found_cost = e.cost;
    res.feasible = true;
    res.decision = std::move(x);
    best_set = std::move(built);
  }
  if (res.feasible) res.objective = res.decision.cost(instance);
  return res;
}

RelaxationOutcome reduced_relaxation(const Instance& instance, const Scenario& last, double kappa,
                                     const MasterOptions& options) {
  RelaxationOutcome out;
  const MasterResult r = master_solve(instance, {last}, kappa, options);
  if (!r.feasible) {
    out.bound = std::numeric_limits<double>::infinity();
    out.note = "infeasible for the last scenario";
    return out;
  }
  out.solved = true;
  out.bound = r.objective;
  out.candidate = r.decision;
  return out;
}

RelaxationOutcome convex_relaxation_bound(const Instance& instance, const std::vector<Scenario>& scenarios,
                                          double kappa, std::size_t segments) {
  RelaxationOutcome out;
  ConvexRelaxationOptions copts;
  copts.segments = segments;
  const ConvexRelaxation rel = build_convex_relaxation(instance, scenarios, kappa, copts);
  const MilpSolution sol = solve_milp(rel.problem);
  switch (sol.status) {
    case MilpStatus::infeasible:
      out.bound = std::numeric_limits<double>::infinity();
      out.note = "relaxation infeasible";
      return out;
    case MilpStatus::unbounded:
      out.note = "relaxation unbounded";
      return out;
    case MilpStatus::limit:
      out.bound = sol.best_bound;
      out.note = "node limit reached";
      if (sol.point.empty()) return out;
      break;
    case MilpStatus::optimal:
      out.bound = sol.objective_value;
      break;
  }
  out.solved = true;
  out.candidate = ExpansionDecision(instance.arc_count());
  for (ArcIndex a : instance.candidate_arcs()) {
    if (sol.point[rel.x_var[a]] > 0.5) out.candidate.set(a, true);
  }
  return out;
}

DesignSolution solve_robust_design(const Instance& instance, const UncertaintySet& uset,
                                   const DesignOptions& options, const IterationCallback& on_iteration) {
  using Clock = std::chrono::steady_clock;
  DesignSolution sol;
  if (options.initial_scenarios.empty()) {
    sol.scenario_set.add(Scenario::zero(instance), ScenarioOrigin::initial);
  }
  for (const Scenario& d : options.initial_scenarios) {
    if (d.size() != instance.node_count()) throw StructuralError("initial scenario has the wrong length");
    if (!contains(uset, d)) throw DomainError("initial scenario is not a member of the uncertainty set");
    sol.scenario_set.add(d, ScenarioOrigin::initial);
  }

  VertexList vertices;
  try {
    vertices = shared_vertices(uset, options.certify.search.vertex_cap);
  } catch (const Error& e) {
    sol.status = DesignStatus::inconclusive;
    sol.message = e.what();
    return sol;
  }

  const bool use_reduced = options.relax == RelaxMode::reduced || options.relax == RelaxMode::both;
  const bool use_convex = options.relax == RelaxMode::convex || options.relax == RelaxMode::both;
  double kappa = 0.0;
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    const auto t0 = Clock::now();
    IterationRecord rec;
    rec.iteration = it;
    rec.kappa = kappa;
    const std::vector<Scenario>& S = sol.scenario_set.scenarios;
    auto emit = [&] {
      rec.scenario_count = sol.scenario_set.size();
      rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
      sol.iterations.push_back(rec);
      if (on_iteration) on_iteration(rec);
    };

    try {
      std::optional<ExpansionDecision> accepted;
      double floor = kappa;
      if (use_reduced) {
        const RelaxationOutcome r = reduced_relaxation(instance, S.back(), kappa, options.master);
        rec.reduced_bound = r.bound;
        if (r.solved) {
          floor = std::max(floor, r.bound);
          if (feasible_for_all(instance, r.candidate, S)) {
            accepted = r.candidate;
            rec.accepted_by = "reduced";
          }
        }
      }
      if (!accepted && use_convex) {
        try {
          const RelaxationOutcome r = convex_relaxation_bound(instance, S, kappa, options.segments);
          if (r.solved || std::isinf(r.bound)) rec.convex_bound = r.bound;
          if (r.solved) {
            floor = std::max(floor, r.bound);
            if (r.candidate.cost(instance) <= r.bound + cost_tolerance(r.bound) &&
                feasible_for_all(instance, r.candidate, S)) {
              accepted = r.candidate;
              rec.accepted_by = "convex";
            }
          }
        } catch (const DomainError&) {
          // Laws or bounds outside the relaxation's scope; no bound this round.
        }
      }
      if (!accepted) {
        const MasterResult m = master_solve(instance, S, floor, options.master);
        rec.master_subsets = m.subsets;
        rec.accepted_by = "master";
        if (!m.feasible) {
          sol.status = DesignStatus::infeasible;
          sol.message = "no expansion is feasible for the current scenario set";
          rec.verdict = Verdict::violated;
          emit();
          return sol;
        }
        accepted = m.decision;
      }
      rec.decision = *accepted;
      rec.master_objective = accepted->cost(instance);

      RobustnessCertificate cert =
          certify_robust_feasibility(instance, *accepted, uset, options.certify, vertices);
      rec.verdict = cert.verdict;
      rec.checks = cert.checks;
      sol.decision = *accepted;
      sol.objective = rec.master_objective;
      sol.certificate = cert;
      if (cert.verdict == Verdict::robust_feasible) {
        sol.status = DesignStatus::optimal;
        emit();
        return sol;
      }
      if (cert.verdict == Verdict::inconclusive) {
        sol.status = DesignStatus::inconclusive;
        sol.message = cert.notes.empty() ? "adversarial search inconclusive" : cert.notes.front();
        emit();
        return sol;
      }
      const Violation& v = *cert.violation;
      const ScenarioOrigin origin = v.kind == ViolationKind::imbalance   ? ScenarioOrigin::imbalance
                                    : v.kind == ViolationKind::potential ? ScenarioOrigin::potential
                                                                         : ScenarioOrigin::flow;
      if (!sol.scenario_set.add(v.witness, origin)) {
        sol.status = DesignStatus::inconclusive;
        sol.message = "witness scenario already in the scenario set";
        emit();
        return sol;
      }
      rec.added = origin;
      kappa = rec.master_objective;
      emit();
    } catch (const Error& e) {
      sol.status = DesignStatus::inconclusive;
      sol.message = e.what();
      emit();
      return sol;
    }
  }
  sol.status = DesignStatus::inconclusive;
  sol.message = "iteration limit reached";
  return sol;
}

const char* to_string(ScenarioOrigin origin) {
  switch (origin) {
    case ScenarioOrigin::initial:
      return "initial";
    case ScenarioOrigin::imbalance:
      return "imbalance";
    case ScenarioOrigin::potential:
      return "potential";
    case ScenarioOrigin::flow:
      return "flow";
  }
  return "?";
}

const char* to_string(RelaxMode mode) {
  switch (mode) {
    case RelaxMode::none:
      return "none";
    case RelaxMode::reduced:
      return "reduced";
    case RelaxMode::convex:
      return "convex";
    case RelaxMode::both:
      return "both";
  }
  return "?";
}

const char* to_string(DesignStatus status) {
  switch (status) {
    case DesignStatus::optimal:
      return "optimal";
    case DesignStatus::infeasible:
      return "infeasible";
    case DesignStatus::inconclusive:
      return "inconclusive";
  }
  return "?";
}

std::optional<RelaxMode> parse_relax_mode(std::string_view text) {
  for (RelaxMode m : {RelaxMode::none, RelaxMode::reduced, RelaxMode::convex, RelaxMode::both}) {
    if (text == to_string(m)) return m;
  }
  return std::nullopt;
}

}  // namespace robnet
