// robnet: generate, solve, check and probe robust expansion instances.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "robnet/academic.hpp"
#include "robnet/adversarial.hpp"
#include "robnet/design.hpp"
#include "robnet/error.hpp"
#include "robnet/instance_io.hpp"
#include "robnet/report.hpp"

namespace fs = std::filesystem;
using namespace robnet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitInconclusive = 3;
constexpr int kExitViolated = 4;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Loaded {
  Instance instance;
  Json doc;
  UncertaintyConfig config;
  UncertaintySet uset;
  std::string digest;
};

Loaded load_inputs(const std::string& instance_path, const std::string& uncertainty_path) {
  Loaded in;
  const std::string text = read_text_file(instance_path);
  in.doc = parse_json(text);
  in.instance = instance_from_json(in.doc);
  std::string digest_input = text;
  if (!uncertainty_path.empty()) {
    const std::string utext = read_text_file(uncertainty_path);
    in.config = uncertainty_config_from_json(parse_json(utext));
    digest_input += utext;
  } else if (auto embedded = embedded_uncertainty(in.doc)) {
    in.config = *embedded;
  } else {
    throw UsageError("no uncertainty: pass --uncertainty or embed an \"uncertainty\" block in the instance");
  }
  in.uset = build_uncertainty(in.config, in.instance);
  in.digest = fnv1a_hex(digest_input);
  return in;
}

struct SearchFlags {
  std::string pairs = "auto";
  std::size_t vertex_cap = 20000;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::size_t starts = 50;
  std::size_t evaluations = 200;
  bool thresholds = false;
};

void add_search_flags(CLI::App* cmd, SearchFlags& f) {
  cmd->add_option("--pairs", f.pairs, "Pair selection: auto (source-sink when valid) or all")
      ->check(CLI::IsMember({"auto", "all"}));
  cmd->add_option("--vertex-cap", f.vertex_cap, "Maximum number of enumerated vertices of U");
  cmd->add_option("--seed", f.seed, "Seed of the local search starts");
  cmd->add_option("--threads", f.threads, "Worker threads for the oracles")->check(CLI::PositiveNumber);
  cmd->add_option("--starts", f.starts, "Local search starts per oracle");
  cmd->add_option("--evaluations", f.evaluations, "Flow evaluations per start");
  cmd->add_flag("--thresholds", f.thresholds, "Stop each oracle at its first violating scenario");
}

CertifyOptions certify_options(const SearchFlags& f) {
  CertifyOptions o;
  o.pair_mode = f.pairs == "all" ? PairMode::all_pairs : PairMode::source_sink;
  o.thresholds = f.thresholds;
  o.threads = f.threads;
  o.search.vertex_cap = f.vertex_cap;
  o.search.seed = f.seed;
  o.search.starts = f.starts;
  o.search.evaluations_per_start = f.evaluations;
  return o;
}

std::vector<Scenario> initial_scenarios(const Loaded& in, const std::string& initial) {
  std::string mode = initial;
  if (mode.empty()) {
    mode = "base";
    if (in.doc.contains("initial") && in.doc["initial"].is_string()) mode = in.doc["initial"].get<std::string>();
  }
  if (mode == "zero") return {Scenario::zero(in.instance)};
  if (mode == "base") return {base_scenario(in.config, in.instance)};
  // Anything else names a JSON file holding one scenario object or an array of them.
  const Json doc = parse_json(read_text_file(mode));
  std::vector<Scenario> out;
  if (doc.is_array()) {
    for (const Json& s : doc) out.push_back(scenario_from_json(in.instance, s));
  } else {
    out.push_back(scenario_from_json(in.instance, doc));
  }
  if (out.empty()) throw UsageError("initial scenario file is empty");
  return out;
}

std::string command_echo(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += ' ';
    out += argv[i];
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust expansion of potential-based networks"};
  app.require_subcommand(1);

  // generate
  std::size_t gen_n = 3;
  std::string gen_variant = "original";
  std::string gen_out;
  auto* gen = app.add_subcommand("generate", "Write the star example with its uncertainty set");
  gen->add_option("-n,--sinks", gen_n, "Number of sinks (>= 2)")->required();
  gen->add_option("--variant", gen_variant, "original or adapted")->check(CLI::IsMember({"original", "adapted"}));
  gen->add_option("-o,--out", gen_out, "Output path (stdout if omitted)");

  // solve
  std::string instance_path, uncertainty_path, out_dir = ".", relax = "reduced", initial;
  std::size_t segments = 9, max_iterations = 1000;
  SearchFlags solve_flags;
  auto* solve = app.add_subcommand("solve", "Solve the robust expansion problem");
  solve->add_option("instance", instance_path, "Instance JSON")->required();
  solve->add_option("-u,--uncertainty", uncertainty_path, "Uncertainty JSON (else embedded in the instance)");
  solve->add_option("--out-dir", out_dir, "Directory for report.json and iterations.csv");
  solve->add_option("--relax", relax, "Lower bounds: none, reduced, convex or both")
      ->check(CLI::IsMember({"none", "reduced", "convex", "both"}));
  solve->add_option("--segments", segments, "Tangents per arc in the convex relaxation")
      ->check(CLI::PositiveNumber);
  solve->add_option("--initial", initial, "Initial scenarios: base, zero or a scenario JSON file");
  solve->add_option("--max-iterations", max_iterations, "Iteration limit");
  add_search_flags(solve, solve_flags);

  // check
  std::string decision_path, certificate_out;
  SearchFlags check_flags;
  auto* check = app.add_subcommand("check", "Certify robust feasibility of a fixed expansion");
  check->add_option("instance", instance_path, "Instance JSON")->required();
  check->add_option("-u,--uncertainty", uncertainty_path, "Uncertainty JSON (else embedded in the instance)");
  check->add_option("-d,--decision", decision_path, "JSON array of built arc ids")->required();
  check->add_option("-o,--out", certificate_out, "Certificate path (stdout if omitted)");
  add_search_flags(check, check_flags);

  // adversarial
  std::vector<std::string> pair;
  std::string arc_id, component_node;
  bool minimize = false;
  std::optional<double> threshold;
  SearchFlags adv_flags;
  auto* adv = app.add_subcommand("adversarial", "Solve one worst-case problem");
  adv->add_option("instance", instance_path, "Instance JSON")->required();
  adv->add_option("-u,--uncertainty", uncertainty_path, "Uncertainty JSON (else embedded in the instance)");
  adv->add_option("-d,--decision", decision_path, "JSON array of built arc ids (none built if omitted)");
  auto* opt_pair = adv->add_option("--pair", pair, "Maximum potential difference between two node ids")
                       ->expected(2);
  auto* opt_arc = adv->add_option("--arc", arc_id, "Maximum flow on an arc (minimum with --min)");
  auto* opt_comp = adv->add_option("--component", component_node, "Imbalance of the component containing a node");
  adv->add_flag("--min", minimize, "With --arc: minimize the flow");
  adv->add_option("--threshold", threshold, "Stop at the first value beyond this bound");
  opt_pair->excludes(opt_arc)->excludes(opt_comp);
  opt_arc->excludes(opt_comp);
  add_search_flags(adv, adv_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) {
      const auto variant = *parse_academic_variant(gen_variant);
      const AcademicExample ex = make_academic_example(gen_n, variant);
      Json doc = instance_to_json(ex.instance);
      doc["uncertainty"] = uncertainty_config_to_json(ex.uncertainty);
      doc["initial"] = "zero";
      const std::string text = doc.dump(2) + "\n";
      if (gen_out.empty()) {
        std::cout << text;
      } else {
        write_text_file(gen_out, text);
      }
      return kExitOk;
    }

    if (*solve) {
      const Loaded in = load_inputs(instance_path, uncertainty_path);
      DesignOptions opts;
      opts.initial_scenarios = initial_scenarios(in, initial);
      opts.relax = *parse_relax_mode(relax);
      opts.segments = segments;
      opts.max_iterations = max_iterations;
      opts.certify = certify_options(solve_flags);
      const DesignSolution sol = solve_robust_design(in.instance, in.uset, opts, [](const IterationRecord& r) {
        std::cerr << "iteration " << r.iteration << ": objective " << r.master_objective << " ("
                  << r.accepted_by << "), " << to_string(r.verdict) << "\n";
      });

      Json report;
      report["command"] = command_echo(argc, argv);
      report["instance_digest"] = in.digest;
      report["seed"] = solve_flags.seed;
      report["options"] = Json{{"pairs", solve_flags.pairs},
                               {"relax", relax},
                               {"segments", segments},
                               {"vertex_cap", solve_flags.vertex_cap},
                               {"threads", solve_flags.threads},
                               {"starts", solve_flags.starts},
                               {"evaluations", solve_flags.evaluations},
                               {"thresholds", solve_flags.thresholds},
                               {"initial", initial.empty() ? "default" : initial}};
      report["solution"] = design_solution_to_json(in.instance, sol);
      fs::create_directories(out_dir);
      write_text_file((fs::path(out_dir) / "report.json").string(), report.dump(2) + "\n");
      write_text_file((fs::path(out_dir) / "iterations.csv").string(), iterations_csv(in.instance, sol));
      std::cout << to_string(sol.status) << " objective " << sol.objective << " scenarios "
                << sol.scenario_set.size() << "\n";
      if (!sol.message.empty()) std::cerr << sol.message << "\n";
      switch (sol.status) {
        case DesignStatus::optimal:
          return kExitOk;
        case DesignStatus::infeasible:
          return kExitInfeasible;
        case DesignStatus::inconclusive:
          return kExitInconclusive;
      }
    }

    if (*check) {
      const Loaded in = load_inputs(instance_path, uncertainty_path);
      const ExpansionDecision x = load_decision(in.instance, decision_path);
      const RobustnessCertificate cert =
          certify_robust_feasibility(in.instance, x, in.uset, certify_options(check_flags));
      Json out = certificate_to_json(in.instance, cert);
      out["instance_digest"] = in.digest;
      out["built"] = x.built_ids(in.instance);
      const std::string text = out.dump(2) + "\n";
      if (certificate_out.empty()) {
        std::cout << text;
      } else {
        write_text_file(certificate_out, text);
      }
      switch (cert.verdict) {
        case Verdict::robust_feasible:
          return kExitOk;
        case Verdict::violated:
          return kExitViolated;
        case Verdict::inconclusive:
          return kExitInconclusive;
      }
    }

    if (*adv) {
      const Loaded in = load_inputs(instance_path, uncertainty_path);
      const ExpansionDecision x = decision_path.empty() ? ExpansionDecision::none(in.instance)
                                                        : load_decision(in.instance, decision_path);
      const CertifyOptions co = certify_options(adv_flags);
      AdversarialContext ctx(in.instance, x, in.uset, co.search);
      Json out;
      AdversarialResult r;
      if (!pair.empty()) {
        if (pair[0] == pair[1]) throw UsageError("--pair needs two distinct nodes");
        const NodeIndex u = in.instance.node_index(pair[0]);
        const NodeIndex v = in.instance.node_index(pair[1]);
        ctx.prepare();
        r = ctx.max_potential_difference(u, v, threshold);
        out["target"] = Json{{"pair", pair}};
      } else if (!arc_id.empty()) {
        const ArcIndex a = in.instance.arc_index(arc_id);
        if (!ctx.topology().is_active(a)) throw UsageError("arc \"" + arc_id + "\" is not active");
        ctx.prepare();
        r = minimize ? ctx.min_arc_flow(a, threshold) : ctx.max_arc_flow(a, threshold);
        out["target"] = Json{{"arc", arc_id}, {"sense", minimize ? "min" : "max"}};
      } else if (!component_node.empty()) {
        const NodeIndex u = in.instance.node_index(component_node);
        r = ctx.component_imbalance(ctx.topology().component_of[u]);
        out["target"] = Json{{"component_of", component_node}};
      } else {
        throw UsageError("give one of --pair, --arc or --component");
      }
      const Json body = adversarial_result_to_json(in.instance, r);
      for (auto it = body.begin(); it != body.end(); ++it) out[it.key()] = it.value();
      std::cout << out.dump(2) << "\n";
      return kExitOk;
    }
  } catch (const BudgetError& e) {
    std::cerr << "robnet: " << e.what() << "\n";
    return kExitInconclusive;
  } catch (const NumericalError& e) {
    std::cerr << "robnet: " << e.what() << "\n";
    return kExitInconclusive;
  } catch (const std::exception& e) {
    std::cerr << "robnet: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
