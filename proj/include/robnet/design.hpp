#pragma once

// Adversarial scenario generation for the robust expansion problem: master
// solves over a growing scenario set, lower bounds and the outer loop.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "robnet/adversarial.hpp"
#include "robnet/model.hpp"
#include "robnet/scenario.hpp"
#include "robnet/uncertainty.hpp"

namespace robnet {

enum class ScenarioOrigin { initial, imbalance, potential, flow };

struct ScenarioSet {
  std::vector<Scenario> scenarios;
  std::vector<ScenarioOrigin> origins;

  std::size_t size() const { return scenarios.size(); }
  bool contains(const Scenario& d, double tol = 1e-9) const;
  // False (and no change) for a duplicate.
  bool add(Scenario d, ScenarioOrigin origin);
};

struct MasterOptions {
  std::size_t subset_budget = 5'000'000;  // subsets popped before BudgetError
};

struct MasterResult {
  bool feasible = false;
  ExpansionDecision decision;
  double objective = 0.0;
  std::size_t subsets = 0;      // subsets popped
  std::size_t flow_checks = 0;  // scenario feasibility checks
};

// Cheapest decision with cost >= kappa that is operationally feasible for
// every scenario; ties go to the lexicographically smallest built set.
// Throws BudgetError when the subset budget runs out.
MasterResult master_solve(const Instance& instance, const std::vector<Scenario>& scenarios, double kappa,
                          const MasterOptions& options = {});

// True when the decision is operationally feasible for every scenario.
bool feasible_for_all(const Instance& instance, const ExpansionDecision& decision,
                      const std::vector<Scenario>& scenarios);

struct RelaxationOutcome {
  bool solved = false;             // false: infeasible or not run
  double bound = 0.0;              // +inf when the relaxation is infeasible
  ExpansionDecision candidate;
  std::optional<std::string> note;  // why the bound is missing
};

// Master over the most recent scenario alone.
RelaxationOutcome reduced_relaxation(const Instance& instance, const Scenario& last, double kappa,
                                     const MasterOptions& options = {});

// Branch-and-bound over the linear outer approximation; the candidate is
// the rounded expansion vector.
RelaxationOutcome convex_relaxation_bound(const Instance& instance, const std::vector<Scenario>& scenarios,
                                          double kappa, std::size_t segments = 9);

enum class RelaxMode { none, reduced, convex, both };

struct DesignOptions {
  // Empty means the zero scenario.
  std::vector<Scenario> initial_scenarios;
  RelaxMode relax = RelaxMode::reduced;
  std::size_t segments = 9;
  CertifyOptions certify;
  MasterOptions master;
  std::size_t max_iterations = 1000;
};

struct IterationRecord {
  std::size_t iteration = 0;  // 1-based
  double kappa = 0.0;
  std::optional<double> reduced_bound;
  std::optional<double> convex_bound;
  std::string accepted_by;  // "reduced", "convex" or "master"
  double master_objective = 0.0;
  ExpansionDecision decision;
  Verdict verdict = Verdict::robust_feasible;
  std::optional<ScenarioOrigin> added;
  std::size_t scenario_count = 0;  // |S| after the iteration
  ChecksRun checks;
  std::size_t master_subsets = 0;
  double wall_ms = 0.0;
};

enum class DesignStatus { optimal, infeasible, inconclusive };

struct DesignSolution {
  DesignStatus status = DesignStatus::inconclusive;
  ExpansionDecision decision;
  double objective = 0.0;
  ScenarioSet scenario_set;
  std::vector<IterationRecord> iterations;
  RobustnessCertificate certificate;
  std::string message;  // reason for infeasible or inconclusive
};

using IterationCallback = std::function<void(const IterationRecord&)>;

DesignSolution solve_robust_design(const Instance& instance, const UncertaintySet& uset,
                                   const DesignOptions& options = {}, const IterationCallback& on_iteration = {});

const char* to_string(ScenarioOrigin origin);
const char* to_string(RelaxMode mode);
const char* to_string(DesignStatus status);
std::optional<RelaxMode> parse_relax_mode(std::string_view text);

}  // namespace robnet
