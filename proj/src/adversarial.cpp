#include "robnet/adversarial.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include "robnet/error.hpp"
#include "robnet/random.hpp"

namespace robnet {

namespace {

bool improves(double candidate, double incumbent) {
  return candidate > incumbent + 1e-9 * std::max(1.0, std::abs(incumbent));
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  x ^= x >> 31;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  return x;
}

// Runs tasks 0..n-1 on up to `threads` workers; results land by index.
template <class Result, class Task>
std::vector<Result> run_indexed(std::size_t n, std::size_t threads, const Task& task,
                                std::vector<std::exception_ptr>& errors) {
  std::vector<Result> out(n);
  errors.assign(n, nullptr);
  auto body = [&](std::size_t i) {
    try {
      out[i] = task(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

std::string describe(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  }
  return "unknown error";
}

}  // namespace

VertexList shared_vertices(const UncertaintySet& uset, std::size_t cap) {
  return std::make_shared<const std::vector<Scenario>>(enumerate_vertices(uset, cap));
}

AdversarialContext::AdversarialContext(const Instance& instance, const ExpansionDecision& decision,
                                       const UncertaintySet& uset, SearchOptions options, VertexList vertices)
    : instance_(&instance),
      uset_(&uset),
      options_(options),
      network_(expand(instance, decision)),
      vertices_(std::move(vertices)) {
  if (uset.node_count != instance.node_count()) {
    throw StructuralError("uncertainty set does not match the instance");
  }
}

AdversarialResult AdversarialContext::component_imbalance(std::size_t component) const {
  const Topology& topo = topology();
  if (component >= topo.components.size()) throw DomainError("component index out of range");
  std::vector<double> weight(instance_->node_count(), 0.0);
  for (NodeIndex i : topo.components[component]) weight[i] = 1.0;
  const LinearOptimum hi = optimize_linear(*uset_, weight, Sense::maximize);
  const LinearOptimum lo = optimize_linear(*uset_, weight, Sense::minimize);
  AdversarialResult r;
  if (hi.value >= -lo.value) {
    r.value = hi.value;
    r.witness = hi.argument;
  } else {
    r.value = -lo.value;
    r.witness = lo.argument;
  }
  r.value = std::max(r.value, 0.0);
  return r;
}

void AdversarialContext::prepare() {
  if (prepared_) return;
  if (!vertices_) vertices_ = shared_vertices(*uset_, options_.vertex_cap);
  vertex_states_.clear();
  vertex_coords_.clear();
  for (const Scenario& d : *vertices_) {
    vertex_states_.push_back(network_.solve(d));
    vertex_coords_.push_back(uset_->project(d));
  }
  step0_ = 0.0;
  for (std::size_t k = 0; k < uset_->dimension(); ++k) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& c : vertex_coords_) {
      lo = std::min(lo, c[k]);
      hi = std::max(hi, c[k]);
    }
    if (!vertex_coords_.empty()) step0_ = std::max(step0_, hi - lo);
  }
  prepared_ = true;
}

void AdversarialContext::require_prepared() const {
  if (!prepared_) throw StructuralError("adversarial context used before prepare()");
}

AdversarialResult AdversarialContext::search(const Objective& objective, const Exceeds& exceeds,
                                             std::uint64_t stream) const {
  require_prepared();
  const std::size_t nv = vertex_states_.size();
  if (nv == 0) throw DomainError("uncertainty set has no vertices");

  AdversarialResult best;
  best.value = -std::numeric_limits<double>::infinity();
  std::vector<double> vertex_value(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    vertex_value[i] = objective(vertex_states_[i]);
    if (i == 0 || vertex_value[i] > best.value) {
      best.value = vertex_value[i];
      best.witness = (*vertices_)[i];
    }
    if (exceeds && exceeds(vertex_value[i])) {
      best.value = vertex_value[i];
      best.witness = (*vertices_)[i];
      best.threshold_hit = true;
      return best;
    }
  }
  const double vertex_best = best.value;

  const std::size_t dim = uset_->dimension();
  if (dim < 2 || step0_ <= 0.0 || options_.starts == 0 || options_.evaluations_per_start == 0) return best;

  // Starts: best vertices first, then random convex combinations of vertices.
  std::vector<std::size_t> order(nv);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return vertex_value[a] > vertex_value[b]; });
  std::vector<std::vector<double>> starts;
  const std::size_t from_vertices = std::min(nv, std::max<std::size_t>(1, options_.starts / 2));
  for (std::size_t k = 0; k < from_vertices; ++k) starts.push_back(vertex_coords_[order[k]]);
  Rng rng(mix(options_.seed, stream));
  while (starts.size() < options_.starts) {
    std::vector<double> w(nv);
    double total = 0.0;
    for (double& x : w) {
      x = -std::log(1.0 - rng.uniform());
      total += x;
    }
    std::vector<double> c(dim, 0.0);
    for (std::size_t i = 0; i < nv; ++i) {
      for (std::size_t k = 0; k < dim; ++k) c[k] += w[i] / total * vertex_coords_[i][k];
    }
    starts.push_back(std::move(c));
  }

  // Moves along e_i - e_j keep the balance row; j runs over the sources.
  std::vector<std::size_t> partners;
  for (std::size_t k = 0; k < dim; ++k) {
    if (uset_->coord_is_source[k]) partners.push_back(k);
  }
  if (partners.empty()) {
    partners.resize(dim);
    std::iota(partners.begin(), partners.end(), std::size_t{0});
  }
  const auto& rows = uset_->inequalities;
  auto max_step = [&](const std::vector<double>& c, std::size_t i, std::size_t j, double sign) {
    double t = std::numeric_limits<double>::infinity();
    for (const HalfSpace& h : rows) {
      const double r = sign * (h.coef[i] - h.coef[j]);
      if (r <= 1e-12) continue;
      double lhs = 0.0;
      for (std::size_t k = 0; k < dim; ++k) lhs += h.coef[k] * c[k];
      t = std::min(t, std::max(0.0, h.rhs - lhs) / r);
    }
    return t;
  };

  std::size_t evaluations = 0;
  for (const auto& start : starts) {
    std::vector<double> c = start;
    double value = objective(network_.solve(uset_->lift(c)));
    ++evaluations;
    std::size_t budget = options_.evaluations_per_start - 1;
    double h = step0_;
    while (budget > 0 && h > 1e-9 * std::max(1.0, step0_)) {
      bool moved = false;
      for (std::size_t i = 0; i < dim && budget > 0; ++i) {
        for (std::size_t j : partners) {
          if (j == i || budget == 0) continue;
          for (double sign : {1.0, -1.0}) {
            if (budget == 0) break;
            const double t = std::min(h, max_step(c, i, j, sign));
            if (t <= 1e-12 * std::max(1.0, step0_)) continue;
            std::vector<double> trial = c;
            trial[i] += sign * t;
            trial[j] -= sign * t;
            const Scenario d = uset_->lift(trial);
            const double v = objective(network_.solve(d));
            ++evaluations;
            --budget;
            if (v > value + 1e-12 * std::max(1.0, std::abs(value))) {
              c = std::move(trial);
              value = v;
              moved = true;
              if (v > best.value) {
                best.value = v;
                best.witness = d;
              }
              if (exceeds && exceeds(v)) {
                best.threshold_hit = true;
                best.evaluations = evaluations;
                best.regime = improves(best.value, vertex_best) ? SearchRegime::heuristic_local
                                                                : SearchRegime::exact_vertex;
                return best;
              }
            }
          }
        }
      }
      if (!moved) h *= 0.5;
    }
  }
  best.evaluations = evaluations;
  if (improves(best.value, vertex_best)) best.regime = SearchRegime::heuristic_local;
  return best;
}

AdversarialResult AdversarialContext::max_potential_difference(NodeIndex u, NodeIndex v,
                                                               std::optional<double> threshold) const {
  const Topology& topo = topology();
  if (u >= instance_->node_count() || v >= instance_->node_count()) throw DomainError("node index out of range");
  if (u == v) throw DomainError("potential difference needs two distinct nodes");
  if (topo.component_of[u] != topo.component_of[v]) {
    throw DomainError("nodes " + instance_->node(u).id + " and " + instance_->node(v).id +
                      " lie in different components");
  }
  const std::size_t comp = topo.component_of[u];
  Exceeds exceeds;
  if (threshold) {
    const double t = *threshold;
    exceeds = [&topo, comp, t](double value) { return potential_gap_violated(topo, comp, value - t); };
  }
  return search([u, v](const FlowState& s) { return s.potential[u] - s.potential[v]; }, exceeds,
                mix(1, mix(u, v)));
}

AdversarialResult AdversarialContext::min_arc_flow(ArcIndex arc, std::optional<double> threshold) const {
  if (arc >= instance_->arc_count() || !topology().is_active(arc)) throw DomainError("arc is not active");
  Exceeds exceeds;
  if (threshold) {
    const double t = *threshold;
    exceeds = [t](double neg) { return -neg < t - violation_tolerance(t); };
  }
  AdversarialResult r = search([arc](const FlowState& s) { return -s.flow[arc]; }, exceeds, mix(2, arc));
  r.value = -r.value;
  return r;
}

AdversarialResult AdversarialContext::max_arc_flow(ArcIndex arc, std::optional<double> threshold) const {
  if (arc >= instance_->arc_count() || !topology().is_active(arc)) throw DomainError("arc is not active");
  Exceeds exceeds;
  if (threshold) {
    const double t = *threshold;
    exceeds = [t](double q) { return q > t + violation_tolerance(t); };
  }
  return search([arc](const FlowState& s) { return s.flow[arc]; }, exceeds, mix(3, arc));
}

namespace {

AdversarialContext prepared_context(const Instance& instance, const ExpansionDecision& decision,
                                    const UncertaintySet& uset, const SearchOptions& options) {
  AdversarialContext ctx(instance, decision, uset, options);
  ctx.prepare();
  return ctx;
}

}  // namespace

AdversarialResult component_imbalance(const Instance& instance, const ExpansionDecision& decision,
                                      const UncertaintySet& uset, std::size_t component) {
  return AdversarialContext(instance, decision, uset).component_imbalance(component);
}

AdversarialResult max_potential_difference(const Instance& instance, const ExpansionDecision& decision,
                                           const UncertaintySet& uset, NodeIndex u, NodeIndex v,
                                           std::optional<double> threshold, const SearchOptions& options) {
  return prepared_context(instance, decision, uset, options).max_potential_difference(u, v, threshold);
}

AdversarialResult min_arc_flow(const Instance& instance, const ExpansionDecision& decision,
                               const UncertaintySet& uset, ArcIndex arc, std::optional<double> threshold,
                               const SearchOptions& options) {
  return prepared_context(instance, decision, uset, options).min_arc_flow(arc, threshold);
}

AdversarialResult max_arc_flow(const Instance& instance, const ExpansionDecision& decision,
                               const UncertaintySet& uset, ArcIndex arc, std::optional<double> threshold,
                               const SearchOptions& options) {
  return prepared_context(instance, decision, uset, options).max_arc_flow(arc, threshold);
}

PairSelection candidate_pairs(const Instance& instance, const Topology& topology, PairMode mode) {
  PairSelection sel;
  if (mode == PairMode::source_sink) {
    for (const auto& comp : topology.components) {
      for (NodeIndex w : comp) {
        const Node& a = instance.node(w);
        for (NodeIndex v : comp) {
          const Node& b = instance.node(v);
          if (a.kind == NodeKind::source && b.kind != NodeKind::source && a.potential_max > b.potential_max) {
            sel.fallback = "source " + a.id + " has a higher upper potential bound than node " + b.id;
          } else if (a.kind == NodeKind::sink && b.kind != NodeKind::sink && a.potential_min < b.potential_min) {
            sel.fallback = "sink " + a.id + " has a lower lower potential bound than node " + b.id;
          }
          if (sel.fallback) break;
        }
        if (sel.fallback) break;
      }
      if (sel.fallback) break;
    }
    if (!sel.fallback) {
      sel.mode = PairMode::source_sink;
      for (const auto& comp : topology.components) {
        for (NodeIndex u : comp) {
          if (instance.node(u).kind != NodeKind::source) continue;
          for (NodeIndex v : comp) {
            if (instance.node(v).kind == NodeKind::sink) sel.pairs.emplace_back(u, v);
          }
        }
      }
      std::sort(sel.pairs.begin(), sel.pairs.end());
      return sel;
    }
  }
  sel.mode = PairMode::all_pairs;
  for (const auto& comp : topology.components) {
    for (NodeIndex u : comp) {
      for (NodeIndex v : comp) {
        if (u != v) sel.pairs.emplace_back(u, v);
      }
    }
  }
  std::sort(sel.pairs.begin(), sel.pairs.end());
  return sel;
}

PairSelection candidate_pairs(const Instance& instance, const ExpansionDecision& decision, PairMode mode) {
  return candidate_pairs(instance, expand(instance, decision), mode);
}

namespace {

void note_regime(RobustnessCertificate& cert, const AdversarialResult& r) {
  if (r.regime == SearchRegime::heuristic_local) cert.regime = SearchRegime::heuristic_local;
}

// Keeps the first strictly larger magnitude; inputs arrive in tie-break order.
void keep_worst(std::optional<Violation>& worst, const Violation& v) {
  if (!worst || improves(v.magnitude, worst->magnitude)) worst = v;
}

}  // namespace

RobustnessCertificate certify_robust_feasibility(const Instance& instance, const ExpansionDecision& decision,
                                                 const UncertaintySet& uset, const CertifyOptions& options,
                                                 VertexList vertices) {
  RobustnessCertificate cert;
  AdversarialContext ctx(instance, decision, uset, options.search, std::move(vertices));
  const Topology& topo = ctx.topology();

  auto finish = [&](Violation v) {
    const FeasibilityReport rep = check_operational_feasibility(ctx.network(), v.witness);
    if (rep.feasible) {
      cert.verdict = Verdict::inconclusive;
      cert.notes.push_back("witness of the reported violation passes the operational check");
    } else {
      cert.verdict = Verdict::violated;
    }
    cert.violation = std::move(v);
    return cert;
  };

  // Component imbalance.
  for (std::size_t c = 0; c < topo.components.size(); ++c) {
    ++cert.checks.imbalance;
    const AdversarialResult r = ctx.component_imbalance(c);
    if (r.value > balance_tolerance(r.witness)) {
      Violation v;
      v.kind = ViolationKind::imbalance;
      v.component = c;
      v.value = r.value;
      v.magnitude = r.value;
      v.witness = r.witness;
      return finish(std::move(v));
    }
  }

  try {
    ctx.prepare();
  } catch (const Error& e) {
    cert.verdict = Verdict::inconclusive;
    cert.notes.push_back(e.what());
    return cert;
  }
  cert.checks.flow_solves += ctx.vertex_count();

  // Potential differences.
  const PairSelection sel = candidate_pairs(instance, topo, options.pair_mode);
  cert.pair_mode = sel.mode;
  cert.pair_fallback = sel.fallback;
  std::vector<std::pair<NodeIndex, NodeIndex>> pairs;
  std::vector<double> limits;
  for (const auto& [u, v] : sel.pairs) {
    const double limit = instance.node(u).potential_max - instance.node(v).potential_min;
    if (!std::isfinite(limit)) continue;
    pairs.emplace_back(u, v);
    limits.push_back(limit);
  }
  std::vector<std::exception_ptr> errors;
  auto pair_results = run_indexed<AdversarialResult>(
      pairs.size(), options.threads,
      [&](std::size_t k) {
        std::optional<double> t;
        if (options.thresholds) t = limits[k];
        return ctx.max_potential_difference(pairs[k].first, pairs[k].second, t);
      },
      errors);
  std::optional<Violation> worst;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    ++cert.checks.potential;
    if (errors[k]) {
      cert.notes.push_back(describe(errors[k]));
      continue;
    }
    const AdversarialResult& r = pair_results[k];
    cert.checks.flow_solves += r.evaluations;
    note_regime(cert, r);
    const std::size_t comp = topo.component_of[pairs[k].first];
    if (potential_gap_violated(topo, comp, r.value - limits[k])) {
      Violation v;
      v.kind = ViolationKind::potential;
      v.component = comp;
      v.u = pairs[k].first;
      v.v = pairs[k].second;
      v.value = r.value;
      v.bound = limits[k];
      v.magnitude = r.value - limits[k];
      v.witness = r.witness;
      keep_worst(worst, v);
    }
  }
  if (worst) return finish(std::move(*worst));

  // Flow bounds, visited by arc id then lower before upper.
  struct FlowTask {
    ArcIndex arc;
    bool upper;
  };
  std::vector<FlowTask> tasks;
  std::vector<ArcIndex> arcs = topo.active_arcs;
  std::sort(arcs.begin(), arcs.end(),
            [&](ArcIndex a, ArcIndex b) { return instance.arc(a).id < instance.arc(b).id; });
  for (ArcIndex a : arcs) {
    if (instance.arc(a).has_flow_min()) tasks.push_back({a, false});
    if (instance.arc(a).has_flow_max()) tasks.push_back({a, true});
  }
  auto flow_results = run_indexed<AdversarialResult>(
      tasks.size(), options.threads,
      [&](std::size_t k) {
        const Arc& arc = instance.arc(tasks[k].arc);
        std::optional<double> t;
        if (tasks[k].upper) {
          if (options.thresholds) t = arc.flow_max;
          return ctx.max_arc_flow(tasks[k].arc, t);
        }
        if (options.thresholds) t = arc.flow_min;
        return ctx.min_arc_flow(tasks[k].arc, t);
      },
      errors);
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const Arc& arc = instance.arc(tasks[k].arc);
    if (tasks[k].upper) {
      ++cert.checks.flow_hi;
    } else {
      ++cert.checks.flow_lo;
    }
    if (errors[k]) {
      cert.notes.push_back(describe(errors[k]));
      continue;
    }
    const AdversarialResult& r = flow_results[k];
    cert.checks.flow_solves += r.evaluations;
    note_regime(cert, r);
    Violation v;
    v.arc = tasks[k].arc;
    v.component = topo.component_of[arc.from];
    v.value = r.value;
    v.witness = r.witness;
    if (tasks[k].upper && r.value > arc.flow_max + violation_tolerance(arc.flow_max)) {
      v.kind = ViolationKind::flow_hi;
      v.bound = arc.flow_max;
      v.magnitude = r.value - arc.flow_max;
      keep_worst(worst, v);
    } else if (!tasks[k].upper && r.value < arc.flow_min - violation_tolerance(arc.flow_min)) {
      v.kind = ViolationKind::flow_lo;
      v.bound = arc.flow_min;
      v.magnitude = arc.flow_min - r.value;
      keep_worst(worst, v);
    }
  }
  if (worst) return finish(std::move(*worst));

  cert.verdict = cert.notes.empty() ? Verdict::robust_feasible : Verdict::inconclusive;
  return cert;
}

const char* to_string(SearchRegime regime) {
  return regime == SearchRegime::exact_vertex ? "exact_vertex" : "heuristic_local";
}

const char* to_string(PairMode mode) { return mode == PairMode::all_pairs ? "all_pairs" : "source_sink"; }

const char* to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::robust_feasible:
      return "robust_feasible";
    case Verdict::violated:
      return "violated";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "?";
}

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::imbalance:
      return "imbalance";
    case ViolationKind::potential:
      return "potential";
    case ViolationKind::flow_lo:
      return "flow_lo";
    case ViolationKind::flow_hi:
      return "flow_hi";
  }
  return "?";
}

}  // namespace robnet
