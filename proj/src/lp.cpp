#include "robnet/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "robnet/error.hpp"

namespace robnet {

std::size_t LpProblem::add_variable(double lo, double hi, double cost) {
  objective.push_back(cost);
  lower.push_back(lo);
  upper.push_back(hi);
  for (auto& row : rows) row.coef.push_back(0.0);
  return objective.size() - 1;
}

void LpProblem::add_row(std::vector<double> coef, Relation relation, double rhs) {
  coef.resize(std::max(coef.size(), num_vars()), 0.0);
  rows.push_back({std::move(coef), relation, rhs});
}

void LpProblem::add_row(const SparseTerms& terms, Relation relation, double rhs) {
  std::vector<double> coef(num_vars(), 0.0);
  for (const auto& [j, v] : terms) {
    if (j >= coef.size()) throw StructuralError("sparse row references variable " + std::to_string(j));
    coef[j] += v;
  }
  rows.push_back({std::move(coef), relation, rhs});
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal:
      return "optimal";
    case LpStatus::infeasible:
      return "infeasible";
    case LpStatus::unbounded:
      return "unbounded";
  }
  return "unknown";
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kFeasTol = 1e-9;

enum class VarMap { shifted, negated, split };

struct VarTransform {
  VarMap map = VarMap::shifted;
  std::size_t col = 0;      // x' column (or x+ for split)
  std::size_t col_neg = 0;  // x- column for split
  double offset = 0.0;      // lo for shifted, hi for negated
};

// Standard form: min c's x' s.t. A x' = b, x' >= 0, b >= 0, with a dense
// tableau that keeps one identity column per row for dual recovery.
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), t_(rows * (cols + 1), 0.0) {}

  double& at(std::size_t r, std::size_t c) { return t_[r * (n_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return t_[r * (n_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, n_); }
  double rhs(std::size_t r) const { return at(r, n_); }

  void pivot(std::size_t pr, std::size_t pc, std::vector<double>& cost) {
    const std::size_t w = n_ + 1;
    double* prow = &t_[pr * w];
    const double inv = 1.0 / prow[pc];
    nz_.clear();
    for (std::size_t c = 0; c < w; ++c) {
      if (prow[c] == 0.0) continue;
      prow[c] *= inv;
      nz_.push_back(c);
    }
    prow[pc] = 1.0;
    for (std::size_t r = 0; r < m_; ++r) {
      if (r == pr) continue;
      double* row = &t_[r * w];
      const double f = row[pc];
      if (f == 0.0) continue;
      for (std::size_t c : nz_) row[c] -= f * prow[c];
      row[pc] = 0.0;
    }
    const double f = cost[pc];
    if (f != 0.0) {
      for (std::size_t c : nz_) cost[c] -= f * prow[c];
      cost[pc] = 0.0;
    }
  }

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<double> t_;
  std::vector<std::size_t> nz_;
};

struct SimplexRun {
  Tableau& tab;
  std::vector<std::size_t>& basis;
  const std::vector<char>& allowed;  // column may enter
  std::vector<char>& row_alive;
  std::size_t& iterations;
  std::size_t max_iterations;

  // Returns false when unbounded.
  bool run(std::vector<double>& cost) {
    bool degenerate_last = false;
    const std::size_t n = tab.cols();
    while (true) {
      if (++iterations > max_iterations) {
        throw NumericalError("simplex iteration cap reached", -cost[n]);
      }
      std::size_t enter = n;
      double best = -kCostTol;
      for (std::size_t c = 0; c < n; ++c) {
        if (!allowed[c] || cost[c] >= -kCostTol) continue;
        if (degenerate_last) {  // Bland: lowest eligible index
          enter = c;
          break;
        }
        if (cost[c] < best) {
          best = cost[c];
          enter = c;
        }
      }
      if (enter == n) return true;

      // Harris two-pass ratio test: bound the step with a small feasibility
      // allowance, then take the largest pivot among the rows within it.
      std::size_t leave = tab.rows();
      double bound = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < tab.rows(); ++r) {
        if (!row_alive[r]) continue;
        const double a = tab.at(r, enter);
        if (a <= kPivotTol) continue;
        bound = std::min(bound, (std::max(0.0, tab.rhs(r)) + kFeasTol) / a);
      }
      if (!std::isfinite(bound)) return false;
      double best_pivot = 0.0;
      double min_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < tab.rows(); ++r) {
        if (!row_alive[r]) continue;
        const double a = tab.at(r, enter);
        if (a <= kPivotTol) continue;
        const double ratio = std::max(0.0, tab.rhs(r)) / a;
        if (ratio > bound) continue;
        // Bland mode keeps the lowest basic index among exact ties.
        const bool take = leave == tab.rows() ||
                          (degenerate_last ? ratio < min_ratio - 1e-12 ||
                                                 (ratio <= min_ratio + 1e-12 && basis[r] < basis[leave])
                                           : a > best_pivot);
        if (take) {
          leave = r;
          best_pivot = a;
          min_ratio = ratio;
        }
      }
      if (leave == tab.rows()) return false;
      degenerate_last = min_ratio <= 1e-12;
      tab.pivot(leave, enter, cost);
      basis[leave] = enter;
      for (std::size_t r = 0; r < tab.rows(); ++r) {
        if (tab.rhs(r) < 0.0 && tab.rhs(r) > -kFeasTol) tab.rhs(r) = 0.0;
      }
    }
  }
};

// Solver state in standard form. Structural column c holds x' / col_scale_c,
// where x' is the transformed variable.
class SimplexState {
 public:
  // False when the bounds or an empty row make the problem infeasible.
  bool build(const LpProblem& problem);
  // Two-phase primal simplex from the slack basis.
  LpStatus cold(const LpOptions& options);
  // Bound change on a variable; false when it cannot be absorbed as a
  // right-hand-side update.
  bool move_bounds(std::size_t var, double lo, double hi);
  // Dual simplex from the current basis after bound moves. Empty when the
  // warm solve should be abandoned.
  std::optional<LpStatus> warm(const LpOptions& options);
  LpSolution extract(const LpProblem& problem) const;

 private:
  struct StdRow {
    std::vector<double> coef;
    Relation rel;
    double rhs;
    double scale;  // row_std = row_orig / scale (before sign flip)
    std::size_t user_row;
  };

  void refresh_rhs();
  bool farkas(std::size_t r) const;

  std::size_t nv_ = 0, nuser_ = 0, nstruct_ = 0, m_ = 0, ncols_ = 0, first_art_ = 0;
  std::vector<double> objective_;
  double osign_ = 1.0;
  std::vector<VarTransform> vt_;
  std::vector<double> col_scale_;
  std::vector<std::size_t> ub_row_;  // per variable; SIZE_MAX without one
  std::vector<double> cur_lo_, cur_hi_;
  std::vector<std::size_t> row_user_;
  std::vector<double> row_scale_, sign_;
  std::vector<std::size_t> ident_col_;
  std::vector<std::vector<std::pair<std::size_t, double>>> init_col_;  // structural and slack columns
  std::vector<double> b_;  // right-hand side of the first tableau after bound moves
  Tableau tab_{0, 0};
  std::vector<std::size_t> basis_;
  std::vector<char> row_alive_;
  std::vector<double> cost_;
  std::vector<char> allowed_;
  std::size_t iterations_ = 0;
};

bool SimplexState::build(const LpProblem& problem) {
  nv_ = problem.num_vars();
  objective_ = problem.objective;
  osign_ = problem.sense == Sense::maximize ? -1.0 : 1.0;
  for (std::size_t j = 0; j < nv_; ++j) {
    if (problem.lower[j] > problem.upper[j] || problem.lower[j] == kInfinity || problem.upper[j] == -kInfinity) {
      return false;
    }
  }

  vt_.assign(nv_, {});
  nstruct_ = 0;
  std::vector<std::pair<std::size_t, double>> ub_rows;  // (variable, hi - lo)
  for (std::size_t j = 0; j < nv_; ++j) {
    const double lo = problem.lower[j];
    const double hi = problem.upper[j];
    if (std::isfinite(lo)) {
      vt_[j] = {VarMap::shifted, nstruct_++, 0, lo};
      if (std::isfinite(hi)) ub_rows.emplace_back(j, hi - lo);
    } else if (std::isfinite(hi)) {
      vt_[j] = {VarMap::negated, nstruct_++, 0, hi};
    } else {
      vt_[j].map = VarMap::split;
      vt_[j].col = nstruct_++;
      vt_[j].col_neg = nstruct_++;
    }
  }
  cur_lo_ = problem.lower;
  cur_hi_ = problem.upper;

  std::vector<StdRow> rows;
  nuser_ = problem.rows.size();
  for (std::size_t i = 0; i < nuser_; ++i) {
    const LpRow& row = problem.rows[i];
    std::vector<double> coef(nstruct_, 0.0);
    double rhs = row.rhs;
    for (std::size_t j = 0; j < nv_; ++j) {
      const double a = row.coef[j];
      if (a == 0.0) continue;
      switch (vt_[j].map) {
        case VarMap::shifted:
          coef[vt_[j].col] += a;
          rhs -= a * vt_[j].offset;
          break;
        case VarMap::negated:
          coef[vt_[j].col] -= a;
          rhs -= a * vt_[j].offset;
          break;
        case VarMap::split:
          coef[vt_[j].col] += a;
          coef[vt_[j].col_neg] -= a;
          break;
      }
    }
    double mx = 0.0;
    for (double v : coef) mx = std::max(mx, std::abs(v));
    if (mx == 0.0) {
      const double tol = kFeasTol * std::max(1.0, std::abs(rhs));
      const bool ok = (row.relation == Relation::less_equal && 0.0 <= rhs + tol) ||
                      (row.relation == Relation::greater_equal && 0.0 >= rhs - tol) ||
                      (row.relation == Relation::equal && std::abs(rhs) <= tol);
      if (!ok) return false;
      continue;
    }
    for (double& v : coef) v /= mx;
    rows.push_back({std::move(coef), row.relation, rhs / mx, mx, i});
  }
  // Geometric equilibration in powers of two.
  col_scale_.assign(nstruct_, 1.0);
  auto pow2 = [](double lo, double hi) { return std::exp2(std::round(-0.5 * std::log2(lo * hi))); };
  for (int pass = 0; pass < 4; ++pass) {
    for (std::size_t c = 0; c < nstruct_; ++c) {
      double lo = kInfinity, hi = 0.0;
      for (const StdRow& r : rows) {
        const double a = std::abs(r.coef[c]);
        if (a == 0.0) continue;
        lo = std::min(lo, a);
        hi = std::max(hi, a);
      }
      if (hi == 0.0) continue;
      const double f = pow2(lo, hi);
      for (StdRow& r : rows) r.coef[c] *= f;
      col_scale_[c] *= f;
    }
    for (StdRow& r : rows) {
      double lo = kInfinity, hi = 0.0;
      for (double v : r.coef) {
        if (v == 0.0) continue;
        lo = std::min(lo, std::abs(v));
        hi = std::max(hi, std::abs(v));
      }
      const double f = pow2(lo, hi);
      for (double& v : r.coef) v *= f;
      r.rhs *= f;
      r.scale /= f;
    }
  }
  ub_row_.assign(nv_, SIZE_MAX);
  for (const auto& [j, width] : ub_rows) {
    const std::size_t c = vt_[j].col;
    std::vector<double> coef(nstruct_, 0.0);
    coef[c] = 1.0;
    ub_row_[j] = rows.size();
    rows.push_back({std::move(coef), Relation::less_equal, width / col_scale_[c], 1.0, nuser_});
  }

  m_ = rows.size();
  // Columns: structural | slack/surplus per inequality | artificial per row
  // needing one.
  std::vector<std::size_t> slack_col(m_, SIZE_MAX);
  sign_.assign(m_, 1.0);
  ncols_ = nstruct_;
  for (std::size_t r = 0; r < m_; ++r) {
    if (rows[r].rel != Relation::equal) slack_col[r] = ncols_++;
  }
  first_art_ = ncols_;
  ident_col_.assign(m_, SIZE_MAX);
  for (std::size_t r = 0; r < m_; ++r) {
    if (rows[r].rhs < 0) sign_[r] = -1.0;
    double slack_coef = 0.0;
    if (rows[r].rel == Relation::less_equal) slack_coef = sign_[r];
    if (rows[r].rel == Relation::greater_equal) slack_coef = -sign_[r];
    ident_col_[r] = slack_coef > 0 ? slack_col[r] : ncols_++;
  }

  tab_ = Tableau(m_, ncols_);
  basis_.assign(m_, 0);
  init_col_.assign(first_art_, {});
  b_.assign(m_, 0.0);
  row_user_.assign(m_, 0);
  row_scale_.assign(m_, 1.0);
  for (std::size_t r = 0; r < m_; ++r) {
    for (std::size_t c = 0; c < nstruct_; ++c) {
      const double a = sign_[r] * rows[r].coef[c];
      if (a == 0.0) continue;
      tab_.at(r, c) = a;
      init_col_[c].emplace_back(r, a);
    }
    if (slack_col[r] != SIZE_MAX) {
      const double a = sign_[r] * (rows[r].rel == Relation::less_equal ? 1.0 : -1.0);
      tab_.at(r, slack_col[r]) = a;
      init_col_[slack_col[r]].emplace_back(r, a);
    }
    tab_.at(r, ident_col_[r]) = 1.0;
    b_[r] = sign_[r] * rows[r].rhs;
    tab_.rhs(r) = b_[r];
    basis_[r] = ident_col_[r];
    row_user_[r] = rows[r].user_row;
    row_scale_[r] = rows[r].scale;
  }
  row_alive_.assign(m_, 1);
  iterations_ = 0;
  return true;
}

LpStatus SimplexState::cold(const LpOptions& options) {
  // Phase 1.
  cost_.assign(ncols_ + 1, 0.0);
  if (first_art_ < ncols_) {
    for (std::size_t c = first_art_; c < ncols_; ++c) cost_[c] = 1.0;
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] < first_art_) continue;
      for (std::size_t c = 0; c <= ncols_; ++c) cost_[c] -= tab_.at(r, c);
    }
    allowed_.assign(ncols_, 1);
    SimplexRun run{tab_, basis_, allowed_, row_alive_, iterations_, options.max_iterations};
    run.run(cost_);
    const double infeas = -cost_[ncols_];
    if (infeas > kFeasTol * std::max<double>(1.0, static_cast<double>(m_))) return LpStatus::infeasible;
    // Drive remaining artificials out of the basis.
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] < first_art_) continue;
      std::size_t pc = ncols_;
      double best = kPivotTol;
      for (std::size_t c = 0; c < first_art_; ++c) {
        if (std::abs(tab_.at(r, c)) > best) {
          best = std::abs(tab_.at(r, c));
          pc = c;
        }
      }
      if (pc == ncols_) {
        row_alive_[r] = 0;  // redundant row
      } else {
        std::vector<double> dummy(ncols_ + 1, 0.0);
        tab_.pivot(r, pc, dummy);
        basis_[r] = pc;
      }
    }
  }

  // Phase 2 in minimization form.
  cost_.assign(ncols_ + 1, 0.0);
  for (std::size_t j = 0; j < nv_; ++j) {
    const double c = osign_ * objective_[j];
    switch (vt_[j].map) {
      case VarMap::shifted:
        cost_[vt_[j].col] += c;
        break;
      case VarMap::negated:
        cost_[vt_[j].col] -= c;
        break;
      case VarMap::split:
        cost_[vt_[j].col] += c;
        cost_[vt_[j].col_neg] -= c;
        break;
    }
  }
  for (std::size_t c = 0; c < nstruct_; ++c) cost_[c] *= col_scale_[c];
  for (std::size_t r = 0; r < m_; ++r) {
    if (!row_alive_[r]) continue;
    const double cb = cost_[basis_[r]];
    if (cb == 0.0) continue;
    for (std::size_t c = 0; c <= ncols_; ++c) cost_[c] -= cb * tab_.at(r, c);
  }
  allowed_.assign(ncols_, 1);
  for (std::size_t c = first_art_; c < ncols_; ++c) allowed_[c] = 0;
  SimplexRun run{tab_, basis_, allowed_, row_alive_, iterations_, options.max_iterations};
  return run.run(cost_) ? LpStatus::optimal : LpStatus::unbounded;
}

bool SimplexState::move_bounds(std::size_t var, double lo, double hi) {
  if (lo == cur_lo_[var] && hi == cur_hi_[var]) return true;
  if (vt_[var].map != VarMap::shifted || ub_row_[var] == SIZE_MAX || !std::isfinite(lo) || !std::isfinite(hi)) {
    return false;
  }
  const std::size_t c = vt_[var].col;
  const double shift = (lo - cur_lo_[var]) / col_scale_[c];
  if (shift != 0.0) {
    for (const auto& [r, a] : init_col_[c]) b_[r] -= shift * a;
  }
  b_[ub_row_[var]] += (hi - cur_hi_[var]) / col_scale_[c];
  vt_[var].offset = lo;
  cur_lo_[var] = lo;
  cur_hi_[var] = hi;
  return true;
}

// Basic values from the current inverse, read off the identity columns.
void SimplexState::refresh_rhs() {
  for (std::size_t r = 0; r < m_; ++r) {
    double v = 0.0;
    for (std::size_t k = 0; k < m_; ++k) {
      if (b_[k] != 0.0) v += tab_.at(r, ident_col_[k]) * b_[k];
    }
    tab_.rhs(r) = v;
  }
}

// Recomputes tableau row r from the original data and checks that it
// proves infeasibility: nonnegative on every free column, negative rhs.
bool SimplexState::farkas(std::size_t r) const {
  std::vector<double> y(m_);
  double ymax = 0.0, yb = 0.0, ybabs = 0.0;
  for (std::size_t k = 0; k < m_; ++k) {
    y[k] = tab_.at(r, ident_col_[k]);
    ymax = std::max(ymax, std::abs(y[k]));
    yb += y[k] * b_[k];
    ybabs += std::abs(y[k] * b_[k]);
  }
  const double tol = 1e-9 * std::max(1.0, ymax);
  for (std::size_t c = 0; c < first_art_; ++c) {
    double a = 0.0;
    for (const auto& [k, v] : init_col_[c]) a += y[k] * v;
    if (a < -tol) return false;
  }
  return yb < -1e-7 * std::max(1.0, ybabs);
}

std::optional<LpStatus> SimplexState::warm(const LpOptions& options) {
  refresh_rhs();
  const std::size_t cap = std::min(options.max_iterations, 20 * m_ + 1000);
  std::size_t count = 0;
  while (true) {
    std::size_t leave = m_;
    double worst = -kFeasTol;
    for (std::size_t r = 0; r < m_; ++r) {
      if (row_alive_[r] && tab_.rhs(r) < worst) {
        worst = tab_.rhs(r);
        leave = r;
      }
    }
    if (leave == m_) break;
    if (++count > cap) return std::nullopt;

    // Harris ratio test on the reduced costs.
    double bound = kInfinity;
    for (std::size_t c = 0; c < ncols_; ++c) {
      const double a = tab_.at(leave, c);
      if (!allowed_[c] || a >= -kPivotTol) continue;
      bound = std::min(bound, (std::max(0.0, cost_[c]) + kCostTol) / -a);
    }
    if (!std::isfinite(bound)) {
      if (farkas(leave)) return LpStatus::infeasible;
      return std::nullopt;
    }
    std::size_t enter = ncols_;
    double best_pivot = 0.0;
    for (std::size_t c = 0; c < ncols_; ++c) {
      const double a = tab_.at(leave, c);
      if (!allowed_[c] || a >= -kPivotTol) continue;
      if (std::max(0.0, cost_[c]) / -a > bound) continue;
      if (-a > best_pivot) {
        best_pivot = -a;
        enter = c;
      }
    }
    tab_.pivot(leave, enter, cost_);
    basis_[leave] = enter;
  }
  iterations_ += count;

  for (std::size_t r = 0; r < m_; ++r) {
    if (tab_.rhs(r) < 0.0) tab_.rhs(r) = 0.0;
  }
  std::size_t primal = 0;
  try {
    SimplexRun run{tab_, basis_, allowed_, row_alive_, primal, cap};
    if (!run.run(cost_)) return std::nullopt;
  } catch (const NumericalError&) {
    return std::nullopt;
  }
  iterations_ += primal;
  refresh_rhs();
  for (std::size_t r = 0; r < m_; ++r) {
    if (!row_alive_[r]) continue;
    if (tab_.rhs(r) < -1e-7) return std::nullopt;
    if (tab_.rhs(r) < 0.0) tab_.rhs(r) = 0.0;
  }
  return LpStatus::optimal;
}

LpSolution SimplexState::extract(const LpProblem& problem) const {
  LpSolution sol;
  std::vector<double> xstd(ncols_, 0.0);
  for (std::size_t r = 0; r < m_; ++r) {
    if (row_alive_[r]) xstd[basis_[r]] = tab_.rhs(r);
  }
  for (std::size_t c = 0; c < nstruct_; ++c) xstd[c] *= col_scale_[c];
  sol.point.assign(nv_, 0.0);
  for (std::size_t j = 0; j < nv_; ++j) {
    switch (vt_[j].map) {
      case VarMap::shifted:
        sol.point[j] = vt_[j].offset + xstd[vt_[j].col];
        break;
      case VarMap::negated:
        sol.point[j] = vt_[j].offset - xstd[vt_[j].col];
        break;
      case VarMap::split:
        sol.point[j] = xstd[vt_[j].col] - xstd[vt_[j].col_neg];
        break;
    }
    // Snap to bounds against round-off.
    sol.point[j] = std::clamp(sol.point[j], problem.lower[j], problem.upper[j]);
  }
  double obj = 0.0;
  for (std::size_t j = 0; j < nv_; ++j) obj += objective_[j] * sol.point[j];
  sol.objective_value = obj;

  // Duals: identity column reduced cost is c_col - y_r, with c_col = 0.
  sol.row_duals.assign(nuser_, 0.0);
  for (std::size_t r = 0; r < m_; ++r) {
    if (row_user_[r] >= nuser_ || !row_alive_[r]) continue;
    sol.row_duals[row_user_[r]] = osign_ * -cost_[ident_col_[r]] * sign_[r] / row_scale_[r];
  }
  sol.basis = basis_;
  sol.iterations = iterations_;
  sol.status = LpStatus::optimal;
  return sol;
}

void validate(const LpProblem& problem) {
  const std::size_t nv = problem.num_vars();
  if (problem.lower.size() != nv || problem.upper.size() != nv) {
    throw StructuralError("variable bounds do not match the objective width");
  }
  for (std::size_t i = 0; i < problem.rows.size(); ++i) {
    if (problem.rows[i].coef.size() != nv) {
      throw StructuralError("row " + std::to_string(i) + " has width " +
                            std::to_string(problem.rows[i].coef.size()) + ", expected " + std::to_string(nv));
    }
  }
}

bool satisfies(const LpProblem& problem, const std::vector<double>& x) {
  constexpr double kTol = 1e-7;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] < problem.lower[j] || x[j] > problem.upper[j]) return false;
  }
  for (const LpRow& row : problem.rows) {
    double lhs = 0.0, mag = std::abs(row.rhs);
    for (std::size_t j = 0; j < x.size(); ++j) {
      lhs += row.coef[j] * x[j];
      mag += std::abs(row.coef[j] * x[j]);
    }
    const double tol = kTol * std::max(1.0, mag);
    if (row.relation != Relation::greater_equal && lhs > row.rhs + tol) return false;
    if (row.relation != Relation::less_equal && lhs < row.rhs - tol) return false;
  }
  return true;
}

}  // namespace

LpSolution solve_lp(const LpProblem& problem, const LpOptions& options) {
  validate(problem);
  SimplexState state;
  LpSolution sol;
  if (!state.build(problem)) return sol;
  const LpStatus status = state.cold(options);
  if (status == LpStatus::optimal) return state.extract(problem);
  sol.status = status;
  return sol;
}

struct IncrementalLp::State {
  SimplexState simplex;
  bool warm = false;  // holds an optimal basis
};

IncrementalLp::IncrementalLp(LpProblem problem, LpOptions options)
    : problem_(std::move(problem)), options_(options), state_(std::make_unique<State>()) {
  validate(problem_);
}

IncrementalLp::~IncrementalLp() = default;
IncrementalLp::IncrementalLp(IncrementalLp&&) noexcept = default;
IncrementalLp& IncrementalLp::operator=(IncrementalLp&&) noexcept = default;

void IncrementalLp::set_bounds(std::size_t var, double lo, double hi) {
  if (var >= problem_.num_vars()) throw StructuralError("variable " + std::to_string(var) + " out of range");
  problem_.lower[var] = lo;
  problem_.upper[var] = hi;
}

LpSolution IncrementalLp::solve() {
  LpSolution sol;
  for (std::size_t j = 0; j < problem_.num_vars(); ++j) {
    if (problem_.lower[j] > problem_.upper[j]) return sol;
  }
  if (state_->warm) {
    bool movable = true;
    for (std::size_t j = 0; j < problem_.num_vars() && movable; ++j) {
      movable = state_->simplex.move_bounds(j, problem_.lower[j], problem_.upper[j]);
    }
    if (movable) {
      const std::optional<LpStatus> status = state_->simplex.warm(options_);
      if (status == LpStatus::infeasible) return sol;
      if (status == LpStatus::optimal) {
        LpSolution s = state_->simplex.extract(problem_);
        if (satisfies(problem_, s.point)) return s;
      }
    }
  }

  ++cold_solves_;
  state_->warm = false;
  if (!state_->simplex.build(problem_)) return sol;
  const LpStatus status = state_->simplex.cold(options_);
  if (status != LpStatus::optimal) {
    sol.status = status;
    return sol;
  }
  state_->warm = true;
  return state_->simplex.extract(problem_);
}

}  // namespace robnet
