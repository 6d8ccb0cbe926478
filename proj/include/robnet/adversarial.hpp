#pragma once

// Worst-case oracles over an uncertainty set for a fixed expansion decision
// and the robustness certificate built from them.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "robnet/flow.hpp"
#include "robnet/model.hpp"
#include "robnet/scenario.hpp"
#include "robnet/uncertainty.hpp"

namespace robnet {

enum class SearchRegime { exact_vertex, heuristic_local };

struct AdversarialResult {
  double value = 0.0;
  Scenario witness;
  SearchRegime regime = SearchRegime::exact_vertex;
  bool threshold_hit = false;
  std::size_t evaluations = 0;  // flow solves spent
};

struct SearchOptions {
  std::size_t vertex_cap = 20000;
  std::size_t starts = 50;
  std::size_t evaluations_per_start = 200;
  std::uint64_t seed = 0;
};

using VertexList = std::shared_ptr<const std::vector<Scenario>>;

// Vertex list of U, shareable across decisions. Throws BudgetError above cap.
VertexList shared_vertices(const UncertaintySet& uset, std::size_t cap);

class AdversarialContext {
 public:
  // `vertices` may be null; they are then enumerated on first use.
  AdversarialContext(const Instance& instance, const ExpansionDecision& decision, const UncertaintySet& uset,
                     SearchOptions options = {}, VertexList vertices = nullptr);

  const Instance& instance() const { return *instance_; }
  const UncertaintySet& uncertainty() const { return *uset_; }
  const Topology& topology() const { return network_.topology(); }
  const FlowNetwork& network() const { return network_; }
  const SearchOptions& options() const { return options_; }

  // Exact by two LPs.
  AdversarialResult component_imbalance(std::size_t component) const;

  // The remaining oracles need every component balanced over U. Call
  // prepare() once before using them from several threads.
  void prepare();
  std::size_t vertex_count() const { return vertex_states_.size(); }
  AdversarialResult max_potential_difference(NodeIndex u, NodeIndex v, std::optional<double> threshold = {}) const;
  AdversarialResult min_arc_flow(ArcIndex arc, std::optional<double> threshold = {}) const;
  AdversarialResult max_arc_flow(ArcIndex arc, std::optional<double> threshold = {}) const;

 private:
  using Objective = std::function<double(const FlowState&)>;
  using Exceeds = std::function<bool(double)>;

  AdversarialResult search(const Objective& objective, const Exceeds& exceeds, std::uint64_t stream) const;
  void require_prepared() const;

  const Instance* instance_;
  const UncertaintySet* uset_;
  SearchOptions options_;
  FlowNetwork network_;
  VertexList vertices_;
  std::vector<FlowState> vertex_states_;
  std::vector<std::vector<double>> vertex_coords_;
  double step0_ = 0.0;  // widest coordinate range over the vertices
  bool prepared_ = false;
};

AdversarialResult component_imbalance(const Instance& instance, const ExpansionDecision& decision,
                                      const UncertaintySet& uset, std::size_t component);
AdversarialResult max_potential_difference(const Instance& instance, const ExpansionDecision& decision,
                                           const UncertaintySet& uset, NodeIndex u, NodeIndex v,
                                           std::optional<double> threshold = {}, const SearchOptions& options = {});
AdversarialResult min_arc_flow(const Instance& instance, const ExpansionDecision& decision,
                               const UncertaintySet& uset, ArcIndex arc, std::optional<double> threshold = {},
                               const SearchOptions& options = {});
AdversarialResult max_arc_flow(const Instance& instance, const ExpansionDecision& decision,
                               const UncertaintySet& uset, ArcIndex arc, std::optional<double> threshold = {},
                               const SearchOptions& options = {});

enum class PairMode { all_pairs, source_sink };

struct PairSelection {
  std::vector<std::pair<NodeIndex, NodeIndex>> pairs;  // ordered by (u, v)
  PairMode mode = PairMode::all_pairs;                 // mode actually used
  std::optional<std::string> fallback;                 // why source_sink was refused
};

PairSelection candidate_pairs(const Instance& instance, const Topology& topology, PairMode mode);
PairSelection candidate_pairs(const Instance& instance, const ExpansionDecision& decision, PairMode mode);

enum class Verdict { robust_feasible, violated, inconclusive };
enum class ViolationKind { imbalance, potential, flow_lo, flow_hi };

struct Violation {
  ViolationKind kind = ViolationKind::potential;
  std::size_t component = 0;
  NodeIndex u = 0;  // potential pairs
  NodeIndex v = 0;
  ArcIndex arc = 0;  // flow bounds
  double value = 0.0;
  double bound = 0.0;
  double magnitude = 0.0;  // value beyond the bound
  Scenario witness;
};

struct ChecksRun {
  std::size_t imbalance = 0;
  std::size_t potential = 0;
  std::size_t flow_lo = 0;
  std::size_t flow_hi = 0;
  std::size_t flow_solves = 0;
};

struct RobustnessCertificate {
  Verdict verdict = Verdict::robust_feasible;
  std::optional<Violation> violation;
  ChecksRun checks;
  SearchRegime regime = SearchRegime::exact_vertex;  // heuristic_local if any oracle was
  PairMode pair_mode = PairMode::all_pairs;
  std::optional<std::string> pair_fallback;
  std::vector<std::string> notes;  // errors behind an inconclusive verdict
};

struct CertifyOptions {
  PairMode pair_mode = PairMode::source_sink;
  bool thresholds = false;  // stop each oracle at its first violating evaluation
  SearchOptions search;
  std::size_t threads = 1;
};

RobustnessCertificate certify_robust_feasibility(const Instance& instance, const ExpansionDecision& decision,
                                                 const UncertaintySet& uset, const CertifyOptions& options = {},
                                                 VertexList vertices = nullptr);

const char* to_string(SearchRegime regime);
const char* to_string(PairMode mode);
const char* to_string(Verdict verdict);
const char* to_string(ViolationKind kind);

}  // namespace robnet
