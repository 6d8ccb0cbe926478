#include "robnet/uncertainty.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "robnet/error.hpp"
#include "robnet/random.hpp"

namespace robnet {

Scenario UncertaintySet::lift(const std::vector<double>& c) const {
  Scenario d(node_count);
  for (std::size_t i = 0; i < coords.size(); ++i) d[coords[i]] = c[i];
  return d;
}

std::vector<double> UncertaintySet::project(const Scenario& d) const {
  std::vector<double> c(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) c[i] = d[coords[i]];
  return c;
}

namespace {

UncertaintySet skeleton(const Instance& instance) {
  UncertaintySet u;
  u.node_count = instance.node_count();
  u.coord_of.assign(instance.node_count(), SIZE_MAX);
  for (NodeIndex i = 0; i < instance.node_count(); ++i) {
    if (instance.node(i).kind == NodeKind::inner) continue;
    u.coord_of[i] = u.coords.size();
    u.coords.push_back(i);
    u.coord_is_source.push_back(instance.node(i).kind == NodeKind::source ? 1 : 0);
  }
  u.equalities.push_back({std::vector<double>(u.coords.size(), 1.0), 0.0, "balance"});
  return u;
}

void add_interval(UncertaintySet& u, std::size_t c, double lo, double hi, const std::string& tag) {
  std::vector<double> a(u.coords.size(), 0.0);
  a[c] = 1.0;
  u.inequalities.push_back({a, hi, tag});
  a[c] = -1.0;
  u.inequalities.push_back({a, -lo, tag});
}

void check_band(const Band& band, const char* name) {
  if (!(band.lo >= 0.0 && band.lo <= 1.0 && band.hi >= 1.0 && std::isfinite(band.hi))) {
    throw ValidationError(std::string(name) + " must satisfy 0 <= lo <= 1 <= hi < inf");
  }
}

}  // namespace

Scenario base_scenario(const UncertaintyConfig& config, const Instance& instance) {
  Scenario base(instance.node_count());
  for (const auto& [id, value] : config.base_load) {
    auto i = instance.find_node(id);
    if (!i) throw ValidationError("base_load references unknown node \"" + id + "\"");
    const Node& n = instance.node(*i);
    if (!std::isfinite(value)) throw ValidationError("base_load of \"" + id + "\" is not finite");
    if (n.kind == NodeKind::inner && value != 0.0) {
      throw ValidationError("base_load of inner node \"" + id + "\" must be 0");
    }
    if (n.kind == NodeKind::source && value > 0.0) {
      throw ValidationError("base_load of source \"" + id + "\" must be <= 0");
    }
    if (n.kind == NodeKind::sink && value < 0.0) {
      throw ValidationError("base_load of sink \"" + id + "\" must be >= 0");
    }
    base[*i] = value;
  }
  if (std::abs(base.total()) > balance_tolerance(base)) {
    throw ValidationError("base_load is not balanced (sum " + std::to_string(base.total()) + ")");
  }
  return base;
}

UncertaintySet build_uncertainty(const UncertaintyConfig& config, const Instance& instance) {
  check_band(config.sink_band, "sink_band");
  check_band(config.source_band, "source_band");
  const Scenario base = base_scenario(config, instance);

  const bool want_sum = config.kind == UncertaintyKind::sum || config.kind == UncertaintyKind::all;
  const bool want_corr = config.kind == UncertaintyKind::corr || config.kind == UncertaintyKind::all;

  UncertaintySet u = skeleton(instance);
  u.provenance = std::string(to_string(config.kind));
  for (std::size_t c = 0; c < u.coords.size(); ++c) {
    const NodeIndex i = u.coords[c];
    const double b = base[i];
    if (instance.node(i).kind == NodeKind::sink) {
      add_interval(u, c, config.sink_band.lo * b, config.sink_band.hi * b, "box");
    } else {
      add_interval(u, c, config.source_band.hi * b, config.source_band.lo * b, "box");
    }
  }

  if (want_sum) {
    if (!config.sum_band) throw ValidationError("uncertainty kind requires sum_band");
    const Band& s = *config.sum_band;
    if (!(s.lo >= 0.0 && s.lo <= 1.0 && s.hi >= 1.0 && std::isfinite(s.hi))) {
      throw ValidationError("sum_band must satisfy 0 <= lo <= 1 <= hi < inf");
    }
    double total = 0.0;
    std::vector<double> a(u.coords.size(), 0.0);
    for (std::size_t c = 0; c < u.coords.size(); ++c) {
      if (instance.node(u.coords[c]).kind != NodeKind::source) continue;
      a[c] = 1.0;
      total += base[u.coords[c]];
    }
    u.inequalities.push_back({a, s.lo * total, "sum"});
    for (double& v : a) v = -v;
    u.inequalities.push_back({a, -s.hi * total, "sum"});
  }

  if (want_corr) {
    if (!config.corr) throw ValidationError("uncertainty kind requires corr");
    const CorrelationConfig& cc = *config.corr;
    if (!(cc.cap >= 0.0)) throw ValidationError("corr.cap must be >= 0");
    std::vector<NodeIndex> chosen;
    if (!cc.sinks.empty()) {
      for (const auto& id : cc.sinks) {
        auto i = instance.find_node(id);
        if (!i) throw ValidationError("corr selection references unknown node \"" + id + "\"");
        if (instance.node(*i).kind != NodeKind::sink) {
          throw ValidationError("corr selection node \"" + id + "\" is not a sink");
        }
        if (base[*i] == 0.0) {
          throw ValidationError("corr selection contains sink \"" + id + "\" with zero base load");
        }
        chosen.push_back(*i);
      }
    } else {
      if (!(cc.fraction >= 0.0 && cc.fraction <= 1.0)) throw ValidationError("corr.fraction must lie in [0, 1]");
      std::vector<NodeIndex> eligible;
      std::size_t sink_count = 0;
      for (NodeIndex i : instance.nodes_of_kind(NodeKind::sink)) {
        ++sink_count;
        if (base[i] != 0.0) eligible.push_back(i);
      }
      auto want = static_cast<std::size_t>(std::ceil(cc.fraction * static_cast<double>(sink_count) - 1e-12));
      want = std::min(want, eligible.size());
      Rng rng(cc.seed);
      for (std::size_t k = 0; k < want; ++k) {
        std::size_t j = k + rng.index(eligible.size() - k);
        std::swap(eligible[k], eligible[j]);
      }
      chosen.assign(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(want));
    }
    std::sort(chosen.begin(), chosen.end());
    chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
    u.seed = cc.seed;
    for (std::size_t x = 0; x < chosen.size(); ++x) {
      for (std::size_t y = x + 1; y < chosen.size(); ++y) {
        const NodeIndex p = chosen[x];
        const NodeIndex q = chosen[y];
        u.correlated_pairs.emplace_back(p, q);
        std::vector<double> a(u.coords.size(), 0.0);
        a[u.coord_of[p]] = 1.0 / base[p];
        a[u.coord_of[q]] = -1.0 / base[q];
        u.inequalities.push_back({a, cc.cap, "corr"});
        for (double& v : a) v = -v;
        u.inequalities.push_back({a, cc.cap, "corr"});
      }
    }
  }
  return u;
}

UncertaintySet box_uncertainty(const Instance& instance,
                               const std::map<std::string, std::pair<double, double>>& bounds) {
  UncertaintySet u = skeleton(instance);
  u.provenance = "box";
  for (const auto& [id, lohi] : bounds) {
    const NodeIndex i = instance.node_index(id);
    if (u.coord_of[i] == SIZE_MAX) throw ValidationError("inner node \"" + id + "\" cannot carry load");
    if (lohi.first > lohi.second) throw ValidationError("empty load interval for \"" + id + "\"");
  }
  for (std::size_t c = 0; c < u.coords.size(); ++c) {
    auto it = bounds.find(instance.node(u.coords[c]).id);
    const double lo = it == bounds.end() ? 0.0 : it->second.first;
    const double hi = it == bounds.end() ? 0.0 : it->second.second;
    add_interval(u, c, lo, hi, "box");
  }
  return u;
}

bool contains(const UncertaintySet& uset, const Scenario& d, double tol) {
  if (d.size() != uset.node_count) return false;
  for (NodeIndex i = 0; i < d.size(); ++i) {
    if (uset.coord_of[i] == SIZE_MAX && std::abs(d[i]) > tol) return false;
  }
  const std::vector<double> c = uset.project(d);
  const double scale = std::max(1.0, d.max_abs());
  auto dot = [&](const std::vector<double>& a) {
    double s = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) s += a[k] * c[k];
    return s;
  };
  for (const auto& e : uset.equalities) {
    if (std::abs(dot(e.coef) - e.rhs) > tol * scale) return false;
  }
  for (const auto& h : uset.inequalities) {
    if (dot(h.coef) - h.rhs > tol * std::max(1.0, std::abs(h.rhs))) return false;
  }
  return true;
}

LpProblem uncertainty_lp(const UncertaintySet& uset) {
  LpProblem lp;
  for (std::size_t c = 0; c < uset.dimension(); ++c) lp.add_variable(-kInfinity, kInfinity);
  for (const auto& e : uset.equalities) lp.add_row(e.coef, Relation::equal, e.rhs);
  for (const auto& h : uset.inequalities) lp.add_row(h.coef, Relation::less_equal, h.rhs);
  return lp;
}

LinearOptimum optimize_linear(const UncertaintySet& uset, const std::vector<double>& weight, Sense sense) {
  if (weight.size() != uset.node_count) throw StructuralError("weight vector does not match the node count");
  LpProblem lp = uncertainty_lp(uset);
  lp.sense = sense;
  for (std::size_t c = 0; c < uset.dimension(); ++c) lp.objective[c] = weight[uset.coords[c]];
  LpSolution s = solve_lp(lp);
  if (s.status == LpStatus::infeasible) throw DomainError("uncertainty set is empty");
  if (s.status == LpStatus::unbounded) throw DomainError("uncertainty set is unbounded in the requested direction");
  return {s.objective_value, uset.lift(s.point)};
}

namespace {

struct BitSet {
  std::vector<std::uint64_t> w;
  explicit BitSet(std::size_t n = 0) : w((n + 63) / 64, 0) {}
  void set(std::size_t i) { w[i / 64] |= std::uint64_t{1} << (i % 64); }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto x : w) c += static_cast<std::size_t>(std::popcount(x));
    return c;
  }
  bool subset_of(const BitSet& o) const {
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (w[k] & ~o.w[k]) return false;
    }
    return true;
  }
  friend BitSet operator&(const BitSet& a, const BitSet& b) {
    BitSet r;
    r.w.resize(a.w.size());
    for (std::size_t k = 0; k < a.w.size(); ++k) r.w[k] = a.w[k] & b.w[k];
    return r;
  }
};

struct Ray {
  std::vector<double> z;
  BitSet zero;
};

void normalize(std::vector<double>& z) {
  double m = 0.0;
  for (double v : z) m = std::max(m, std::abs(v));
  if (m > 0.0) {
    for (double& v : z) v /= m;
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

std::vector<Scenario> enumerate_vertices(const UncertaintySet& uset, std::size_t cap) {
  const std::size_t k = uset.dimension();
  {
    LpProblem lp = uncertainty_lp(uset);
    if (solve_lp(lp).status == LpStatus::infeasible) throw DomainError("uncertainty set is empty");
  }
  if (k <= 1) {
    return {Scenario(uset.node_count)};  // balance forces the zero scenario
  }

  // Eliminate coordinate 0 through the balance row: d_0 = -sum of the rest.
  const std::size_t n = k - 1;
  const std::size_t dim = n + 1;  // homogenized (x, t)
  std::vector<std::vector<double>> rows;
  for (const auto& h : uset.inequalities) {
    std::vector<double> r(dim, 0.0);
    for (std::size_t j = 0; j < n; ++j) r[j] = h.coef[j + 1] - h.coef[0];
    r[n] = -h.rhs;
    double m = 0.0;
    for (std::size_t j = 0; j < n; ++j) m = std::max(m, std::abs(r[j]));
    if (m < 1e-14) {
      if (h.rhs < -1e-12) throw DomainError("uncertainty set is empty");
      continue;
    }
    normalize(r);
    rows.push_back(std::move(r));
  }
  {
    std::vector<double> t(dim, 0.0);
    t[n] = -1.0;
    rows.insert(rows.begin(), std::move(t));
  }
  const std::size_t m = rows.size();

  // Initial simplicial cone from dim independent rows (t >= 0 first).
  std::vector<std::size_t> chosen;
  std::vector<char> in_basis(m, 0);
  {
    Eigen::MatrixXd acc(0, static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < m && chosen.size() < dim; ++i) {
      Eigen::MatrixXd trial(acc.rows() + 1, acc.cols());
      trial << acc, Eigen::Map<const Eigen::RowVectorXd>(rows[i].data(), static_cast<Eigen::Index>(dim));
      Eigen::FullPivLU<Eigen::MatrixXd> lu(trial);
      lu.setThreshold(1e-10);
      if (static_cast<std::size_t>(lu.rank()) == chosen.size() + 1) {
        acc = trial;
        chosen.push_back(i);
        in_basis[i] = 1;
      }
    }
    if (chosen.size() < dim) throw DomainError("uncertainty set is unbounded");
  }
  Eigen::MatrixXd hb(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) hb(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[chosen[r]][c];
  }
  const Eigen::MatrixXd inv = -hb.fullPivLu().inverse();
  std::vector<Ray> rays;
  for (std::size_t j = 0; j < dim; ++j) {
    Ray ray{std::vector<double>(dim), BitSet(m)};
    for (std::size_t r = 0; r < dim; ++r) ray.z[r] = inv(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
    normalize(ray.z);
    for (std::size_t r = 0; r < dim; ++r) {
      if (r != j) ray.zero.set(chosen[r]);
    }
    rays.push_back(std::move(ray));
  }

  const std::size_t ray_budget = std::max<std::size_t>(cap * 20, 1000);
  for (std::size_t i = 0; i < m; ++i) {
    if (in_basis[i]) continue;
    const auto& h = rows[i];
    std::vector<std::size_t> plus, minus;
    std::vector<double> val(rays.size());
    for (std::size_t r = 0; r < rays.size(); ++r) {
      val[r] = dot(h, rays[r].z);
      if (val[r] > 1e-9) {
        plus.push_back(r);
      } else if (val[r] < -1e-9) {
        minus.push_back(r);
      } else {
        rays[r].zero.set(i);
      }
    }
    if (plus.empty()) continue;
    std::vector<Ray> next;
    for (std::size_t r = 0; r < rays.size(); ++r) {
      if (val[r] <= 1e-9) next.push_back(rays[r]);
    }
    for (std::size_t p : plus) {
      for (std::size_t q : minus) {
        BitSet common = rays[p].zero & rays[q].zero;
        if (common.count() + 2 < dim) continue;
        bool adjacent = true;
        for (std::size_t r = 0; r < rays.size() && adjacent; ++r) {
          if (r != p && r != q && common.subset_of(rays[r].zero)) adjacent = false;
        }
        if (!adjacent) continue;
        Ray ray{std::vector<double>(dim), common};
        for (std::size_t c = 0; c < dim; ++c) ray.z[c] = val[p] * rays[q].z[c] - val[q] * rays[p].z[c];
        normalize(ray.z);
        ray.zero.set(i);
        next.push_back(std::move(ray));
      }
    }
    rays = std::move(next);
    if (rays.size() > ray_budget) {
      throw BudgetError("vertex enumeration exceeds the cap of " + std::to_string(cap) + " vertices");
    }
  }

  std::vector<Scenario> out;
  for (const Ray& ray : rays) {
    if (ray.z[n] <= 1e-9) throw DomainError("uncertainty set is unbounded");
    std::vector<double> c(k);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      c[j + 1] = ray.z[j] / ray.z[n];
      s += c[j + 1];
    }
    c[0] = -s;
    for (double& v : c) {
      if (std::abs(v) < 1e-12) v = 0.0;
    }
    Scenario d = uset.lift(c);
    bool duplicate = false;
    for (const auto& e : out) {
      if (e.approx_equal(d, 1e-9 * std::max(1.0, d.max_abs()))) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) out.push_back(std::move(d));
  }
  if (out.size() > cap) {
    throw BudgetError("vertex enumeration exceeds the cap of " + std::to_string(cap) + " vertices");
  }

  // Each vertex must be the unique maximizer of the sum of its tight normals.
  for (const Scenario& d : out) {
    const std::vector<double> c = uset.project(d);
    std::vector<double> weight(uset.node_count, 0.0);
    for (const auto& h : uset.inequalities) {
      double mx = 0.0;
      for (double v : h.coef) mx = std::max(mx, std::abs(v));
      if (mx == 0.0) continue;
      if (std::abs(dot(h.coef, c) - h.rhs) <= 1e-8 * std::max(1.0, std::abs(h.rhs))) {
        for (std::size_t j = 0; j < k; ++j) weight[uset.coords[j]] += h.coef[j] / mx;
      }
    }
    LinearOptimum opt = optimize_linear(uset, weight, Sense::maximize);
    if (!opt.argument.approx_equal(d, 1e-6 * std::max(1.0, d.max_abs()))) {
      throw NumericalError("vertex enumeration produced a point that is not a vertex", 0.0);
    }
  }
  return out;
}

std::vector<Scenario> sample(const UncertaintySet& uset, std::size_t n, std::uint64_t seed) {
  const std::size_t k = uset.dimension();
  std::vector<double> lo(k), hi(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double> w(uset.node_count, 0.0);
    w[uset.coords[c]] = 1.0;
    lo[c] = optimize_linear(uset, w, Sense::minimize).value;
    hi[c] = optimize_linear(uset, w, Sense::maximize).value;
  }
  // Coordinates that absorb the imbalance: sources, or all if none.
  std::vector<std::size_t> absorb;
  for (std::size_t c = 0; c < k; ++c) {
    if (uset.coord_is_source[c]) absorb.push_back(c);
  }
  if (absorb.empty()) {
    for (std::size_t c = 0; c < k; ++c) absorb.push_back(c);
  }

  Rng rng(seed);
  std::vector<Scenario> out;
  out.reserve(n);
  std::size_t attempts = 0;
  const std::size_t max_attempts = std::max<std::size_t>(10000, n * 10000);
  std::vector<double> c(k);
  while (out.size() < n) {
    if (attempts >= max_attempts) {
      throw DomainError("sampling acceptance rate below 1e-4; use mixtures of enumerated vertices instead");
    }
    ++attempts;
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      c[j] = rng.uniform(lo[j], hi[j]);
      s += c[j];
    }
    if (k > 0) {
      const double shift = -s / static_cast<double>(absorb.size());
      for (std::size_t j : absorb) c[j] += shift;
    }
    Scenario d = uset.lift(c);
    if (contains(uset, d)) out.push_back(std::move(d));
  }
  return out;
}

std::string_view to_string(UncertaintyKind kind) {
  switch (kind) {
    case UncertaintyKind::box:
      return "box";
    case UncertaintyKind::sum:
      return "sum";
    case UncertaintyKind::corr:
      return "corr";
    case UncertaintyKind::all:
      return "all";
  }
  return "box";
}

std::optional<UncertaintyKind> parse_uncertainty_kind(std::string_view text) {
  if (text == "box") return UncertaintyKind::box;
  if (text == "sum") return UncertaintyKind::sum;
  if (text == "corr") return UncertaintyKind::corr;
  if (text == "all") return UncertaintyKind::all;
  return std::nullopt;
}

}  // namespace robnet
