#include "robnet/flow.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <string>

#include "robnet/error.hpp"
#include "robnet/random.hpp"

namespace robnet {

namespace {

constexpr std::size_t kPolishSteps = 30;

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

FlowNetwork::FlowNetwork(const Topology& topology) : topology_(topology) {
  const Instance& inst = *topology_.instance;
  const std::size_t nn = inst.node_count();

  // Contract zero-drop arcs.
  std::vector<std::size_t> parent(nn);
  std::iota(parent.begin(), parent.end(), 0);
  for (ArcIndex a : topology_.active_arcs) {
    const Arc& arc = inst.arc(a);
    if (arc.law.lambda != 0.0) continue;
    std::size_t x = find_root(parent, arc.from);
    std::size_t y = find_root(parent, arc.to);
    if (x != y) parent[std::max(x, y)] = std::min(x, y);
  }
  cluster_of_.assign(nn, SIZE_MAX);
  std::vector<std::size_t> label(nn, SIZE_MAX);
  std::vector<std::vector<NodeIndex>> members;
  for (NodeIndex i = 0; i < nn; ++i) {
    std::size_t r = find_root(parent, i);
    if (label[r] == SIZE_MAX) {
      label[r] = members.size();
      members.emplace_back();
      cluster_component_.push_back(topology_.component_of[i]);
    }
    cluster_of_[i] = label[r];
    members[label[r]].push_back(i);
  }
  cluster_total_ = members.size();

  // Cluster adjacency over positive-lambda arcs between distinct clusters.
  std::vector<std::vector<ArcIndex>> adj(cluster_total_);
  for (ArcIndex a : topology_.active_arcs) {
    const Arc& arc = inst.arc(a);
    if (arc.law.lambda == 0.0) continue;
    const std::size_t cu = cluster_of_[arc.from];
    const std::size_t cv = cluster_of_[arc.to];
    if (cu == cv) continue;
    adj[cu].push_back(a);
    adj[cv].push_back(a);
  }

  const std::size_t nc = topology_.components.size();
  tree_order_.assign(nc, {});
  root_cluster_.assign(nc, 0);
  std::vector<char> seen(cluster_total_, 0);
  std::vector<char> in_tree(inst.arc_count(), 0);
  std::vector<ArcIndex> up_arc(cluster_total_, SIZE_MAX);
  std::vector<std::size_t> up(cluster_total_, SIZE_MAX);
  std::vector<std::size_t> depth(cluster_total_, 0);
  for (std::size_t c = 0; c < nc; ++c) {
    const std::size_t root = cluster_of_[topology_.components[c].front()];
    root_cluster_[c] = root;
    std::deque<std::size_t> queue{root};
    seen[root] = 1;
    while (!queue.empty()) {
      const std::size_t k = queue.front();
      queue.pop_front();
      for (ArcIndex a : adj[k]) {
        const Arc& arc = inst.arc(a);
        const std::size_t other = cluster_of_[arc.from] == k ? cluster_of_[arc.to] : cluster_of_[arc.from];
        if (seen[other]) continue;
        seen[other] = 1;
        in_tree[a] = 1;
        up_arc[other] = a;
        up[other] = k;
        depth[other] = depth[k] + 1;
        tree_order_[c].push_back({a, other, k});
        queue.push_back(other);
      }
    }
  }

  // Fundamental cycles: chord from -> to, then the tree path back.
  arc_cycles_.assign(inst.arc_count(), {});
  for (ArcIndex a : topology_.active_arcs) {
    const Arc& arc = inst.arc(a);
    if (arc.law.lambda == 0.0 || in_tree[a]) continue;
    std::size_t ca = cluster_of_[arc.from];
    std::size_t cb = cluster_of_[arc.to];
    if (ca == cb) continue;
    Cycle cyc;
    cyc.arcs.emplace_back(a, 1.0);
    std::vector<std::pair<ArcIndex, double>> down;  // from LCA down to ca, reversed later
    while (ca != cb) {
      if (depth[cb] >= depth[ca]) {
        const Arc& t = inst.arc(up_arc[cb]);
        // Moving child cb -> parent.
        cyc.arcs.emplace_back(up_arc[cb], cluster_of_[t.from] == cb ? 1.0 : -1.0);
        cb = up[cb];
      } else {
        const Arc& t = inst.arc(up_arc[ca]);
        // Later traversed parent -> child ca.
        down.emplace_back(up_arc[ca], cluster_of_[t.to] == ca ? 1.0 : -1.0);
        ca = up[ca];
      }
    }
    for (auto it = down.rbegin(); it != down.rend(); ++it) cyc.arcs.push_back(*it);
    const std::size_t j = cycles_.size();
    for (const auto& [arc_index, sigma] : cyc.arcs) arc_cycles_[arc_index].emplace_back(j, sigma);
    chords_.push_back(a);
    cycles_.push_back(std::move(cyc));
  }

  // Spanning trees of the zero-drop arcs inside each cluster.
  zero_trees_.clear();
  std::vector<std::vector<ArcIndex>> zadj(nn);
  for (ArcIndex a : topology_.active_arcs) {
    const Arc& arc = inst.arc(a);
    if (arc.law.lambda != 0.0) continue;
    zadj[arc.from].push_back(a);
    zadj[arc.to].push_back(a);
  }
  std::vector<char> zseen(nn, 0);
  for (const auto& m : members) {
    if (m.size() < 2) continue;
    ZeroTree zt;
    zt.root = m.front();
    zt.nodes = m;
    std::deque<NodeIndex> queue{zt.root};
    zseen[zt.root] = 1;
    while (!queue.empty()) {
      const NodeIndex u = queue.front();
      queue.pop_front();
      for (ArcIndex a : zadj[u]) {
        const Arc& arc = inst.arc(a);
        const NodeIndex w = arc.from == u ? arc.to : arc.from;
        if (zseen[w]) continue;
        zseen[w] = 1;
        zt.order.emplace_back(a, w);
        queue.push_back(w);
      }
    }
    zero_trees_.push_back(std::move(zt));
  }
}

double FlowNetwork::component_load(const Scenario& scenario, std::size_t c) const {
  double s = 0.0;
  for (NodeIndex i : topology_.components[c]) s += scenario[i];
  return s;
}

void FlowNetwork::tree_flows(const std::vector<double>& cluster_load, std::vector<double>& flow) const {
  const Instance& inst = *topology_.instance;
  std::vector<double> subtree = cluster_load;
  for (const auto& order : tree_order_) {
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const Arc& arc = inst.arc(it->arc);
      const double need = subtree[it->child];
      flow[it->arc] = cluster_of_[arc.to] == it->child ? need : -need;
      subtree[it->parent] += need;
    }
  }
}

void FlowNetwork::zero_arc_flows(const Scenario& scenario, std::vector<double>& flow) const {
  const Instance& inst = *topology_.instance;
  if (zero_trees_.empty()) return;
  // Net requirement of each node after the positive-lambda arcs.
  std::vector<double> need(inst.node_count(), 0.0);
  for (NodeIndex i = 0; i < inst.node_count(); ++i) need[i] = scenario[i];
  for (ArcIndex a : topology_.active_arcs) {
    const Arc& arc = inst.arc(a);
    if (arc.law.lambda == 0.0) continue;
    need[arc.to] -= flow[a];
    need[arc.from] += flow[a];
  }
  for (const ZeroTree& zt : zero_trees_) {
    for (auto it = zt.order.rbegin(); it != zt.order.rend(); ++it) {
      const auto& [a, child] = *it;
      const Arc& arc = inst.arc(a);
      const double s = need[child];
      flow[a] = arc.to == child ? s : -s;
      const NodeIndex parent = arc.to == child ? arc.from : arc.to;
      need[parent] += s;
    }
  }
}

FlowState FlowNetwork::solve(const Scenario& scenario, const FlowOptions& options) const {
  const Instance& inst = *topology_.instance;
  if (scenario.size() != inst.node_count()) {
    throw StructuralError("scenario has " + std::to_string(scenario.size()) + " entries, expected " +
                          std::to_string(inst.node_count()));
  }
  const double btol = balance_tolerance(scenario);
  for (std::size_t c = 0; c < topology_.components.size(); ++c) {
    const double net = component_load(scenario, c);
    if (std::abs(net) > btol) {
      throw ImbalanceError("component " + std::to_string(c) + " (containing node \"" +
                               inst.node(topology_.components[c].front()).id + "\") has net load " +
                               std::to_string(net),
                           c, net);
    }
  }

  std::vector<double> cluster_load(cluster_total_, 0.0);
  for (NodeIndex i = 0; i < inst.node_count(); ++i) cluster_load[cluster_of_[i]] += scenario[i];

  FlowState st;
  std::vector<double> base(inst.arc_count(), 0.0);
  tree_flows(cluster_load, base);

  const std::size_t k = cycles_.size();
  Eigen::VectorXd chord = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
  std::vector<double> flow = base;

  auto apply = [&](const Eigen::VectorXd& c, std::vector<double>& q) {
    q = base;
    for (std::size_t j = 0; j < k; ++j) {
      for (const auto& [a, s] : cycles_[j].arcs) q[a] += s * c[static_cast<Eigen::Index>(j)];
    }
  };
  auto residual = [&](const std::vector<double>& q, Eigen::VectorXd& r, std::vector<double>* scale) {
    r.setZero(static_cast<Eigen::Index>(k));
    if (scale) scale->assign(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      for (const auto& [a, s] : cycles_[j].arcs) {
        const double phi = inst.arc(a).law.drop(q[a]);
        r[static_cast<Eigen::Index>(j)] += s * phi;
        if (scale) (*scale)[j] += std::abs(phi);
      }
    }
  };
  auto energy = [&](const std::vector<double>& q) {
    double e = 0.0;
    for (ArcIndex a : topology_.active_arcs) {
      if (!arc_cycles_[a].empty()) e += inst.arc(a).law.energy(q[a]);
    }
    return e;
  };

  if (k > 0) {
    const auto ki = static_cast<Eigen::Index>(k);
    if (options.seed) {
      Rng rng(*options.seed);
      double spread = 1.0;
      for (double d : scenario.load) spread += std::abs(d);
      for (Eigen::Index j = 0; j < ki; ++j) chord[j] = rng.uniform(-spread, spread);
    } else {
      // Start from the flow of the linearized network.
      Eigen::MatrixXd j0 = Eigen::MatrixXd::Zero(ki, ki);
      Eigen::VectorXd r0 = Eigen::VectorXd::Zero(ki);
      for (ArcIndex a : topology_.active_arcs) {
        const double lam = inst.arc(a).law.lambda;
        for (const auto& [p, sp] : arc_cycles_[a]) {
          r0[static_cast<Eigen::Index>(p)] += sp * lam * base[a];
          for (const auto& [q, sq] : arc_cycles_[a]) {
            j0(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) += sp * sq * lam;
          }
        }
      }
      chord = j0.ldlt().solve(-r0);
    }

    Eigen::VectorXd r, r_trial;
    std::vector<double> scale;
    std::vector<double> trial_flow;
    bool converged = false;
    std::size_t polish = 0;
    for (std::size_t it = 0; it <= options.max_iterations; ++it) {
      apply(chord, flow);
      residual(flow, r, &scale);
      converged = true;
      for (std::size_t j = 0; j < k; ++j) {
        if (std::abs(r[static_cast<Eigen::Index>(j)]) > options.tolerance * std::max(1.0, scale[j])) {
          converged = false;
          break;
        }
      }
      st.iterations = it;
      if (it == options.max_iterations) break;
      if (converged && polish++ == kPolishSteps) break;

      Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(ki, ki);
      for (ArcIndex a : topology_.active_arcs) {
        if (arc_cycles_[a].empty()) continue;
        const PotentialLaw& law = inst.arc(a).law;
        double d = law.slope(flow[a]);
        if (!std::isfinite(d)) d = 1e10 * law.lambda;
        d = std::max(d, 1e-10 * law.lambda);
        for (const auto& [p, sp] : arc_cycles_[a]) {
          for (const auto& [q, sq] : arc_cycles_[a]) {
            jac(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) += sp * sq * d;
          }
        }
      }
      const Eigen::VectorXd step = jac.ldlt().solve(-r);
      const double rnorm = r.norm();
      if (converged) {
        // Extra full steps pin near-zero flows, where the drop is flat.
        apply(chord + step, trial_flow);
        residual(trial_flow, r_trial, nullptr);
        if (!(r_trial.norm() < rnorm) || step.lpNorm<Eigen::Infinity>() <= 1e-14) break;
        chord += step;
        continue;
      }
      double t = 1.0;
      bool accepted = false;
      for (int h = 0; h < 60; ++h, t *= 0.5) {
        apply(chord + t * step, trial_flow);
        residual(trial_flow, r_trial, nullptr);
        if (r_trial.norm() <= (1.0 - 1e-4 * t) * rnorm) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        const double e0 = energy(flow);
        t = 1.0;
        for (int h = 0; h < 60; ++h, t *= 0.5) {
          apply(chord + t * step, trial_flow);
          if (energy(trial_flow) < e0) {
            accepted = true;
            break;
          }
        }
      }
      if (!accepted) break;
      chord += t * step;
    }
    if (!converged) {
      double worst = 0.0;
      for (Eigen::Index j = 0; j < ki; ++j) worst = std::max(worst, std::abs(r[j]));
      throw NumericalError("flow solver did not converge, residual " + std::to_string(worst), worst);
    }
    double worst = 0.0;
    for (Eigen::Index j = 0; j < ki; ++j) worst = std::max(worst, std::abs(r[j]));
    st.residual = worst;
  }

  zero_arc_flows(scenario, flow);
  for (ArcIndex a = 0; a < inst.arc_count(); ++a) {
    if (!topology_.is_active(a)) flow[a] = 0.0;
  }
  st.flow = std::move(flow);

  // Potentials from the cluster trees.
  std::vector<double> cluster_pi(cluster_total_, 0.0);
  for (const auto& order : tree_order_) {
    for (const TreeArc& t : order) {
      const Arc& arc = inst.arc(t.arc);
      const double drop = arc.law.drop(st.flow[t.arc]);
      cluster_pi[t.child] = cluster_of_[arc.from] == t.parent ? cluster_pi[t.parent] - drop : cluster_pi[t.parent] + drop;
    }
  }
  st.potential.assign(inst.node_count(), 0.0);
  for (NodeIndex i = 0; i < inst.node_count(); ++i) st.potential[i] = cluster_pi[cluster_of_[i]];

  const std::size_t nc = topology_.components.size();
  st.pinned.resize(nc);
  st.shift_range.resize(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    st.pinned[c] = topology_.components[c].front();
    double lo = -kInfinity;
    double hi = kInfinity;
    for (NodeIndex i : topology_.components[c]) {
      const Node& n = inst.node(i);
      lo = std::max(lo, n.potential_min - st.potential[i]);
      hi = std::min(hi, n.potential_max - st.potential[i]);
    }
    st.shift_range[c] = {lo, hi};
  }
  return st;
}

FlowState solve_flow(const Topology& topology, const Scenario& scenario, const FlowOptions& options) {
  return FlowNetwork(topology).solve(scenario, options);
}

bool potential_gap_violated(const Topology& topology, std::size_t component, double gap) {
  double scale = 1.0;
  for (NodeIndex i : topology.components[component]) {
    const Node& n = topology.instance->node(i);
    if (std::isfinite(n.potential_min)) scale = std::max(scale, std::abs(n.potential_min));
    if (std::isfinite(n.potential_max)) scale = std::max(scale, std::abs(n.potential_max));
  }
  return gap > 1e-7 * scale;
}

FeasibilityReport check_operational_feasibility(const FlowNetwork& network, const Scenario& scenario) {
  const Topology& topo = network.topology();
  const Instance& inst = *topo.instance;
  FeasibilityReport rep;
  const double btol = balance_tolerance(scenario);
  for (std::size_t c = 0; c < topo.components.size(); ++c) {
    const double net = network.component_load(scenario, c);
    if (std::abs(net) > btol) rep.imbalances.emplace_back(c, net);
  }
  if (!rep.imbalances.empty()) {
    rep.feasible = false;
    return rep;
  }
  FlowState st = network.solve(scenario);
  for (ArcIndex a : topo.active_arcs) {
    const Arc& arc = inst.arc(a);
    const double q = st.flow[a];
    if (arc.has_flow_min() && q < arc.flow_min - violation_tolerance(arc.flow_min)) {
      rep.flow_violations.push_back({a, arc.flow_min - q, false});
    }
    if (arc.has_flow_max() && q > arc.flow_max + violation_tolerance(arc.flow_max)) {
      rep.flow_violations.push_back({a, q - arc.flow_max, true});
    }
  }
  rep.potential_gap.resize(topo.components.size());
  bool gap_ok = true;
  for (std::size_t c = 0; c < topo.components.size(); ++c) {
    rep.potential_gap[c] = st.potential_gap(c);
    if (potential_gap_violated(topo, c, rep.potential_gap[c])) gap_ok = false;
  }
  rep.feasible = gap_ok && rep.flow_violations.empty();
  rep.state = std::move(st);
  return rep;
}

FeasibilityReport check_operational_feasibility(const Instance& instance, const ExpansionDecision& decision,
                                                const Scenario& scenario) {
  return check_operational_feasibility(FlowNetwork(expand(instance, decision)), scenario);
}

}  // namespace robnet
