#pragma once

// Unique potential-based flow of a fixed topology and balanced scenario.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "robnet/model.hpp"
#include "robnet/scenario.hpp"

namespace robnet {

struct FlowOptions {
  double tolerance = 1e-10;  // on cycle sums, relative to max(1, cycle term magnitude)
  std::size_t max_iterations = 200;
  // Random initial chord flows instead of the linearized start.
  std::optional<std::uint64_t> seed;
};

struct FlowState {
  std::vector<double> flow;       // per arc; inactive arcs 0
  std::vector<double> potential;  // per node; lowest node index of each component at 0
  std::vector<NodeIndex> pinned;  // per component
  // Per component, admissible shifts eta with pi_min <= potential + eta <= pi_max.
  std::vector<std::pair<double, double>> shift_range;
  std::size_t iterations = 0;
  double residual = 0.0;  // max absolute cycle sum at exit

  double potential_gap(std::size_t component) const {
    const auto& [lo, hi] = shift_range[component];
    return lo > hi ? lo - hi : 0.0;
  }
};

// Cycle structure of a topology, reusable across scenarios.
class FlowNetwork {
 public:
  explicit FlowNetwork(const Topology& topology);

  const Topology& topology() const { return topology_; }
  std::size_t chord_count() const { return chords_.size(); }

  // Throws ImbalanceError on an unbalanced component and NumericalError when
  // Newton does not converge.
  FlowState solve(const Scenario& scenario, const FlowOptions& options = {}) const;

  // Net load of component c.
  double component_load(const Scenario& scenario, std::size_t c) const;

 private:
  struct TreeArc {
    ArcIndex arc;
    std::size_t child;   // child cluster
    std::size_t parent;  // parent cluster
  };
  struct Cycle {
    std::vector<std::pair<ArcIndex, double>> arcs;  // (arc, orientation +-1)
  };

  void tree_flows(const std::vector<double>& cluster_load, std::vector<double>& flow) const;
  void zero_arc_flows(const Scenario& scenario, std::vector<double>& flow) const;

  Topology topology_;
  std::vector<std::size_t> cluster_of_;          // node -> cluster
  std::vector<std::size_t> cluster_component_;   // cluster -> component
  std::vector<std::vector<TreeArc>> tree_order_;  // per component, BFS order
  std::vector<std::size_t> root_cluster_;        // per component
  std::vector<ArcIndex> chords_;
  std::vector<Cycle> cycles_;
  std::vector<std::vector<std::pair<std::size_t, double>>> arc_cycles_;  // arc -> (cycle, orientation)
  std::size_t cluster_total_ = 0;
  // Lambda > 0 arcs within a cluster carry zero flow; Lambda = 0 arcs are
  // resolved per cluster on a spanning tree.
  struct ZeroTree {
    std::vector<std::pair<ArcIndex, NodeIndex>> order;  // (parent arc, child node), BFS order
    NodeIndex root;
    std::vector<NodeIndex> nodes;
  };
  std::vector<ZeroTree> zero_trees_;  // per cluster with more than one node
};

FlowState solve_flow(const Topology& topology, const Scenario& scenario, const FlowOptions& options = {});

struct FlowViolation {
  ArcIndex arc = 0;
  double amount = 0.0;  // positive distance outside [flow_min, flow_max]
  bool upper = false;
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<FlowViolation> flow_violations;
  std::vector<double> potential_gap;                       // per component
  std::vector<std::pair<std::size_t, double>> imbalances;  // (component, net load)
  std::optional<FlowState> state;                          // absent on imbalance
};

// Never throws on operational failures; those become report entries.
FeasibilityReport check_operational_feasibility(const FlowNetwork& network, const Scenario& scenario);
FeasibilityReport check_operational_feasibility(const Instance& instance, const ExpansionDecision& decision,
                                                const Scenario& scenario);

// Shared feasibility rule for a potential gap of component c.
bool potential_gap_violated(const Topology& topology, std::size_t component, double gap);

}  // namespace robnet
