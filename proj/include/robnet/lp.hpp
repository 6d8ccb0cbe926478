#pragma once

// Dense two-phase primal simplex for small linear programs, plus a dual
// simplex warm start for bound changes.

#include <cstddef>
#include <memory>
#include <utility>
#include <vector>

#include "robnet/model.hpp"

namespace robnet {

enum class Sense { minimize, maximize };
enum class Relation { less_equal, equal, greater_equal };

struct LpRow {
  std::vector<double> coef;
  Relation relation = Relation::less_equal;
  double rhs = 0.0;
};

// Sparse (index, coefficient) list; converted to a dense row on insertion.
using SparseTerms = std::vector<std::pair<std::size_t, double>>;

struct LpProblem {
  Sense sense = Sense::minimize;
  std::vector<double> objective;
  std::vector<LpRow> rows;
  std::vector<double> lower;  // per variable, -inf allowed
  std::vector<double> upper;  // per variable, +inf allowed

  std::size_t num_vars() const { return objective.size(); }
  // Appends a variable; existing rows are widened with a zero coefficient.
  std::size_t add_variable(double lo, double hi, double cost = 0.0);
  void add_row(std::vector<double> coef, Relation relation, double rhs);
  void add_row(const SparseTerms& terms, Relation relation, double rhs);
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  double objective_value = 0.0;
  std::vector<double> point;
  // Multipliers of the user rows at an optimum, such that for problems whose
  // variables are only bounded below by zero, objective == sum(dual_i * rhs_i).
  std::vector<double> row_duals;
  // Final basis as column indices of the internal standard form.
  std::vector<std::size_t> basis;
  std::size_t iterations = 0;
};

struct LpOptions {
  std::size_t max_iterations = 200000;
};

// Throws StructuralError on dimension mismatch, NumericalError when the
// iteration cap is hit.
LpSolution solve_lp(const LpProblem& problem, const LpOptions& options = {});

// An LP whose variable bounds change between solves. After the first
// optimum, bound changes on variables with finite bounds are re-solved by
// dual simplex from the previous tableau; anything else, and any warm
// solution that fails a residual check, falls back to a cold solve.
class IncrementalLp {
 public:
  explicit IncrementalLp(LpProblem problem, LpOptions options = {});
  ~IncrementalLp();
  IncrementalLp(IncrementalLp&&) noexcept;
  IncrementalLp& operator=(IncrementalLp&&) noexcept;

  const LpProblem& problem() const { return problem_; }
  void set_bounds(std::size_t var, double lo, double hi);
  LpSolution solve();

  std::size_t cold_solves() const { return cold_solves_; }

 private:
  struct State;
  LpProblem problem_;
  LpOptions options_;
  std::unique_ptr<State> state_;
  std::size_t cold_solves_ = 0;
};

const char* to_string(LpStatus status);

}  // namespace robnet
