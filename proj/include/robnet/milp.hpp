#pragma once

// Binary branch-and-bound and the linear models built on it: McCormick rows,
// acyclic cuts, flow-bound tightening and the convex relaxation of the
// expansion problem.

#include <cstddef>
#include <utility>
#include <vector>

#include "robnet/lp.hpp"
#include "robnet/model.hpp"
#include "robnet/scenario.hpp"
#include "robnet/uncertainty.hpp"

namespace robnet {

struct MilpProblem {
  LpProblem base;
  std::vector<std::size_t> binary_vars;
};

enum class MilpStatus { optimal, infeasible, unbounded, limit };

struct MilpSolution {
  MilpStatus status = MilpStatus::infeasible;
  double objective_value = 0.0;
  std::vector<double> point;
  std::size_t nodes = 0;
  double best_bound = 0.0;  // best remaining bound when stopped on the limit
};

struct MilpOptions {
  std::size_t node_limit = 100000;
  double integrality_tolerance = 1e-6;
};

MilpSolution solve_milp(const MilpProblem& problem, const MilpOptions& options = {});

struct SparseRow {
  SparseTerms terms;
  Relation relation = Relation::less_equal;
  double rhs = 0.0;
};

struct LinearizationRows {
  std::vector<SparseRow> rows;
  std::vector<std::size_t> aux_vars;
};

void append_rows(LpProblem& lp, const std::vector<SparseRow>& rows);

struct McCormickColumns {
  std::size_t pi_u = 0;
  std::size_t pi_v = 0;
  std::size_t y = 0;
  std::size_t gamma = 0;
  bool y_complemented = false;  // the arc direction variable is 1 - y
};

// Four rows pinning gamma = 2 y (pi_u - pi_v) for binary y, given
// p_minus <= pi_u - pi_v <= p_plus. Throws DomainError on infinite bounds.
LinearizationRows mccormick_rows(const McCormickColumns& cols, double p_minus, double p_plus);

struct OrientedCycle {
  std::vector<std::pair<ArcIndex, bool>> arcs;  // (arc, traversed along its direction)
};

// Every 2-cycle of parallel arcs plus a fundamental cycle basis of the
// corridor graph (one representative arc per unordered node pair). Arcs with
// zero lambda are ignored.
std::vector<OrientedCycle> cycle_collection(const Instance& instance, const std::vector<ArcIndex>& arcs);

// sum coef_a * y_a <= rhs over per-arc direction variables.
struct CutRow {
  std::vector<std::pair<ArcIndex, double>> terms;
  double rhs = 0.0;
};

std::vector<CutRow> acyclic_cuts(const Instance& instance, const std::vector<ArcIndex>& arcs);

struct TightenedBounds {
  std::vector<double> lo;  // per arc; inactive arcs 0
  std::vector<double> hi;
  std::vector<double> qtilde;
};

// Min and max of each active arc flow over acyclic conservation flows.
// Throws ImbalanceError when a component is unbalanced.
TightenedBounds tighten_flow_bounds(const Instance& instance, const ExpansionDecision& decision,
                                    const Scenario& scenario);
// Same with d ranging over U. Throws DomainError when U is empty.
TightenedBounds tighten_flow_bounds_uncertain(const Instance& instance, const ExpansionDecision& decision,
                                              const UncertaintySet& uset);

struct ConvexRelaxationOptions {
  std::size_t segments = 9;
  bool tighten = true;  // flow bounds from tightening, else total throughput
};

struct ConvexRelaxation {
  MilpProblem problem;
  std::vector<std::size_t> x_var;  // per arc; SIZE_MAX for existing arcs
};

// Throws DomainError for power laws with exponent < 1 and for infinite
// potential bounds.
ConvexRelaxation build_convex_relaxation(const Instance& instance, const std::vector<Scenario>& scenarios,
                                         double kappa, const ConvexRelaxationOptions& options = {});

const char* to_string(MilpStatus status);

}  // namespace robnet
