#pragma once

// Independent oracles and random instance generators shared by the unit and
// acceptance tests. Nothing here calls the solver under test except where a
// helper says so.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "robnet/flow.hpp"
#include "robnet/lp.hpp"
#include "robnet/milp.hpp"
#include "robnet/model.hpp"
#include "robnet/random.hpp"
#include "robnet/uncertainty.hpp"

namespace robnet::testing {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Calls f on every k-subset of {0..n-1}.
inline void for_each_subset(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& f) {
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  if (k > n) return;
  while (true) {
    f(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Half-space form a . x <= b of an LP (equalities as two rows, finite
// variable bounds as rows).
struct Halfspaces {
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  std::vector<char> is_equality_half;
};

inline Halfspaces halfspaces_of(const LpProblem& p) {
  Halfspaces h;
  const std::size_t n = p.num_vars();
  auto push = [&](std::vector<double> a, double b) {
    h.a.push_back(std::move(a));
    h.b.push_back(b);
  };
  for (const LpRow& r : p.rows) {
    std::vector<double> neg(n);
    for (std::size_t j = 0; j < n; ++j) neg[j] = -r.coef[j];
    if (r.relation != Relation::greater_equal) push(r.coef, r.rhs);
    if (r.relation != Relation::less_equal) push(neg, -r.rhs);
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    if (std::isfinite(p.upper[j])) {
      e[j] = 1.0;
      push(e, p.upper[j]);
    }
    if (std::isfinite(p.lower[j])) {
      e[j] = -1.0;
      push(e, -p.lower[j]);
    }
  }
  return h;
}

struct EnumLp {
  bool feasible = false;
  double value = 0.0;
  std::vector<double> point;
};

// Optimum of a bounded LP by enumerating every basic point.
inline EnumLp lp_by_enumeration(const LpProblem& p, double tol = 1e-7) {
  const Halfspaces h = halfspaces_of(p);
  const std::size_t n = p.num_vars();
  EnumLp best;
  const double sign = p.sense == Sense::minimize ? 1.0 : -1.0;
  for_each_subset(h.a.size(), n, [&](const std::vector<std::size_t>& act) {
    Eigen::MatrixXd m(n, n);
    Eigen::VectorXd rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) m(i, j) = h.a[act[i]][j];
      rhs(i) = h.b[act[i]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    if (lu.rank() < static_cast<Eigen::Index>(n)) return;
    const Eigen::VectorXd x = lu.solve(rhs);
    for (std::size_t r = 0; r < h.a.size(); ++r) {
      double lhs = 0.0;
      for (std::size_t j = 0; j < n; ++j) lhs += h.a[r][j] * x(j);
      if (lhs > h.b[r] + tol * std::max(1.0, std::abs(h.b[r]))) return;
    }
    double v = 0.0;
    for (std::size_t j = 0; j < n; ++j) v += p.objective[j] * x(j);
    if (!best.feasible || sign * v < sign * best.value) {
      best.feasible = true;
      best.value = v;
      best.point.assign(x.data(), x.data() + n);
    }
  });
  return best;
}

struct EnumMilp {
  bool feasible = false;
  double value = 0.0;
  std::vector<int> point;
};

// Pure binary program by trying all 2^n points.
inline EnumMilp binary_by_enumeration(const LpProblem& p, double tol = 1e-9) {
  const std::size_t n = p.num_vars();
  EnumMilp best;
  const double sign = p.sense == Sense::minimize ? 1.0 : -1.0;
  std::vector<int> x(n);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    for (std::size_t j = 0; j < n; ++j) x[j] = static_cast<int>((mask >> j) & 1U);
    bool ok = true;
    for (std::size_t j = 0; j < n && ok; ++j) ok = x[j] >= p.lower[j] - tol && x[j] <= p.upper[j] + tol;
    for (const LpRow& r : p.rows) {
      if (!ok) break;
      double lhs = 0.0;
      for (std::size_t j = 0; j < n; ++j) lhs += r.coef[j] * x[j];
      if (r.relation == Relation::less_equal) ok = lhs <= r.rhs + tol;
      if (r.relation == Relation::greater_equal) ok = lhs >= r.rhs - tol;
      if (r.relation == Relation::equal) ok = std::abs(lhs - r.rhs) <= tol;
    }
    if (!ok) continue;
    double v = 0.0;
    for (std::size_t j = 0; j < n; ++j) v += p.objective[j] * x[j];
    if (!best.feasible || sign * v < sign * best.value) {
      best.feasible = true;
      best.value = v;
      best.point = x;
    }
  }
  return best;
}

inline bool satisfies_rows(const UncertaintySet& u, const std::vector<double>& c, double tol = 1e-9) {
  for (const HalfSpace& h : u.inequalities) {
    double lhs = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) lhs += h.coef[k] * c[k];
    if (lhs > h.rhs + tol * std::max(1.0, std::abs(h.rhs))) return false;
  }
  for (const HalfSpace& h : u.equalities) {
    double lhs = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) lhs += h.coef[k] * c[k];
    if (std::abs(lhs - h.rhs) > tol * std::max(1.0, std::abs(h.rhs))) return false;
  }
  return true;
}

// Vertices of U by brute force over active sets of its rows.
inline std::vector<Scenario> vertices_by_enumeration(const UncertaintySet& u) {
  const std::size_t k = u.dimension();
  std::vector<Scenario> out;
  if (k == 0) {
    out.emplace_back(u.node_count);
    return out;
  }
  const std::size_t free_rows = k - u.equalities.size();
  for_each_subset(u.inequalities.size(), free_rows, [&](const std::vector<std::size_t>& act) {
    Eigen::MatrixXd m(k, k);
    Eigen::VectorXd rhs(k);
    std::size_t r = 0;
    for (const HalfSpace& h : u.equalities) {
      for (std::size_t j = 0; j < k; ++j) m(r, j) = h.coef[j];
      rhs(r++) = h.rhs;
    }
    for (std::size_t i : act) {
      for (std::size_t j = 0; j < k; ++j) m(r, j) = u.inequalities[i].coef[j];
      rhs(r++) = u.inequalities[i].rhs;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    if (lu.rank() < static_cast<Eigen::Index>(k)) return;
    const Eigen::VectorXd x = lu.solve(rhs);
    std::vector<double> c(x.data(), x.data() + k);
    if (!satisfies_rows(u, c, 1e-9)) return;
    const Scenario d = u.lift(c);
    for (const Scenario& e : out) {
      if (e.approx_equal(d, 1e-8)) return;
    }
    out.push_back(d);
  });
  return out;
}

// Members of U drawn uniformly from the coordinate bounding box of the given
// vertices, with the first coordinate of the balance row solved for.
inline std::vector<Scenario> cloud(const UncertaintySet& u, const std::vector<Scenario>& vertices, std::size_t n,
                                   std::uint64_t seed) {
  const std::size_t k = u.dimension();
  std::vector<Scenario> out;
  if (k == 0) return out;
  std::vector<double> lo(k, kInf), hi(k, -kInf);
  for (const Scenario& v : vertices) {
    const auto c = u.project(v);
    for (std::size_t j = 0; j < k; ++j) {
      lo[j] = std::min(lo[j], c[j]);
      hi[j] = std::max(hi[j], c[j]);
    }
  }
  Rng rng(seed);
  std::size_t attempts = 0;
  while (out.size() < n && attempts < 200 * n) {
    ++attempts;
    std::vector<double> c(k);
    double rest = 0.0;
    for (std::size_t j = 1; j < k; ++j) {
      c[j] = rng.uniform(lo[j], hi[j]);
      rest += c[j];
    }
    c[0] = -rest;
    if (satisfies_rows(u, c, 1e-12)) out.push_back(u.lift(c));
  }
  return out;
}

struct BruteVerdict {
  bool robust = true;
  std::size_t points = 0;
};

// Robust feasibility by checking every vertex plus a sample cloud.
inline BruteVerdict brute_force_robust(const Instance& instance, const ExpansionDecision& x, const UncertaintySet& u,
                                       std::size_t samples, std::uint64_t seed) {
  const FlowNetwork net(expand(instance, x));
  const auto verts = vertices_by_enumeration(u);
  BruteVerdict v;
  auto visit = [&](const Scenario& d) {
    ++v.points;
    if (!check_operational_feasibility(net, d).feasible) v.robust = false;
  };
  for (const Scenario& d : verts) visit(d);
  for (const Scenario& d : cloud(u, verts, samples, seed)) {
    if (!v.robust) break;
    visit(d);
  }
  return v;
}

struct RandomNetworkOptions {
  std::size_t nodes = 6;
  std::size_t extra_arcs = 2;  // beyond a spanning tree
  std::size_t sources = 1;
  std::size_t sinks = 2;
  std::size_t candidates = 2;
  bool mixed_laws = false;
  bool flow_bounds = false;
  bool uniform_potentials = false;  // equal bounds everywhere
};

// Connected random network: a random spanning tree plus extra arcs, with
// candidates parallel to existing arcs or on new corridors.
inline Instance random_network(Rng& rng, const RandomNetworkOptions& o) {
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < o.nodes; ++i) {
    Node n;
    n.id = "n" + std::to_string(i);
    n.kind = i < o.sources ? NodeKind::source : i < o.sources + o.sinks ? NodeKind::sink : NodeKind::inner;
    if (o.uniform_potentials) {
      n.potential_min = 1.0;
      n.potential_max = 9.0;
    } else {
      n.potential_min = rng.uniform(0.0, 2.0);
      n.potential_max = n.potential_min + rng.uniform(2.0, 9.0);
    }
    nodes.push_back(n);
  }
  auto law = [&]() {
    const double lambda = rng.uniform(0.5, 2.0);
    if (!o.mixed_laws) return PotentialLaw::quadratic(lambda);
    switch (rng.index(3)) {
      case 0:
        return PotentialLaw::quadratic(lambda);
      case 1:
        return PotentialLaw::power(lambda);
      default:
        return PotentialLaw::linear(lambda);
    }
  };
  std::vector<Arc> arcs;
  auto add = [&](NodeIndex u, NodeIndex v, ArcKind kind) {
    Arc a;
    a.id = "a" + std::to_string(arcs.size());
    a.from = u;
    a.to = v;
    a.label = a.id;
    a.kind = kind;
    a.law = law();
    if (kind == ArcKind::candidate) a.cost = static_cast<double>(1 + rng.index(5));
    if (o.flow_bounds && rng.uniform() < 0.3) a.flow_max = rng.uniform(1.0, 4.0);
    arcs.push_back(a);
  };
  for (std::size_t i = 1; i < o.nodes; ++i) {
    const NodeIndex parent = rng.index(i);
    if (rng.uniform() < 0.5) {
      add(parent, i, ArcKind::existing);
    } else {
      add(i, parent, ArcKind::existing);
    }
  }
  for (std::size_t e = 0; e < o.extra_arcs; ++e) {
    const NodeIndex u = rng.index(o.nodes);
    NodeIndex v = rng.index(o.nodes - 1);
    if (v >= u) ++v;
    add(u, v, ArcKind::existing);
  }
  for (std::size_t c = 0; c < o.candidates; ++c) {
    if (rng.uniform() < 0.6) {
      const Arc& base = arcs[rng.index(arcs.size())];
      add(base.from, base.to, ArcKind::candidate);
    } else {
      const NodeIndex u = rng.index(o.nodes);
      NodeIndex v = rng.index(o.nodes - 1);
      if (v >= u) ++v;
      add(u, v, ArcKind::candidate);
    }
  }
  return Instance(std::move(nodes), std::move(arcs));
}

// Random box uncertainty over the sources and sinks of `instance`; the
// source intervals cover the sink totals, so U is never empty.
inline UncertaintySet random_box(Rng& rng, const Instance& instance, double scale = 1.0) {
  std::map<std::string, std::pair<double, double>> bounds;
  double lo_total = 0.0, hi_total = 0.0;
  std::size_t sources = 0;
  for (const Node& n : instance.nodes()) {
    if (n.kind == NodeKind::source) ++sources;
    if (n.kind != NodeKind::sink) continue;
    const double lo = rng.uniform(0.0, 1.0) * scale;
    const double hi = lo + rng.uniform(0.2, 1.5) * scale;
    bounds[n.id] = {lo, hi};
    lo_total += lo;
    hi_total += hi;
  }
  for (const Node& n : instance.nodes()) {
    if (n.kind != NodeKind::source) continue;
    const double k = static_cast<double>(sources);
    bounds[n.id] = {-hi_total * rng.uniform(1.0, 1.4) / k, -lo_total * rng.uniform(0.6, 1.0) / k};
  }
  return box_uncertainty(instance, bounds);
}

inline ExpansionDecision random_decision(Rng& rng, const Instance& instance) {
  ExpansionDecision x = ExpansionDecision::none(instance);
  for (ArcIndex a : instance.candidate_arcs()) x.set(a, rng.uniform() < 0.5);
  return x;
}

// Balanced random load on the sources and sinks of a topology component set.
inline Scenario random_balanced_load(Rng& rng, const Instance& instance, const Topology& topo) {
  Scenario d(instance.node_count());
  for (const auto& comp : topo.components) {
    std::vector<NodeIndex> src, snk;
    for (NodeIndex i : comp) {
      if (instance.node(i).kind == NodeKind::source) src.push_back(i);
      if (instance.node(i).kind == NodeKind::sink) snk.push_back(i);
    }
    if (src.empty() || snk.empty()) continue;
    double total = 0.0;
    for (NodeIndex i : snk) {
      d[i] = rng.uniform(0.1, 2.0);
      total += d[i];
    }
    std::vector<double> w(src.size());
    double ws = 0.0;
    for (double& x : w) {
      x = rng.uniform(0.2, 1.0);
      ws += x;
    }
    for (std::size_t k = 0; k < src.size(); ++k) d[src[k]] = -total * w[k] / ws;
  }
  return d;
}

}  // namespace robnet::testing
