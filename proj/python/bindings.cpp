// JSON-in, JSON-out bindings; the Python package wraps them with json.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "robnet/academic.hpp"
#include "robnet/adversarial.hpp"
#include "robnet/design.hpp"
#include "robnet/error.hpp"
#include "robnet/flow.hpp"
#include "robnet/instance_io.hpp"
#include "robnet/report.hpp"
#include "robnet/uncertainty.hpp"

namespace py = pybind11;
using namespace robnet;

namespace {

struct Inputs {
  Json doc;
  Instance instance;
  UncertaintyConfig config;
  UncertaintySet uset;
};

Inputs load(const std::string& instance_json, const std::string& uncertainty_json) {
  Inputs in;
  in.doc = parse_json(instance_json);
  in.instance = instance_from_json(in.doc);
  if (!uncertainty_json.empty()) {
    in.config = uncertainty_config_from_json(parse_json(uncertainty_json));
  } else if (auto embedded = embedded_uncertainty(in.doc)) {
    in.config = *embedded;
  } else {
    throw ValidationError("no uncertainty given and none embedded in the instance");
  }
  in.uset = build_uncertainty(in.config, in.instance);
  return in;
}

CertifyOptions certify_options(const std::string& pairs, std::size_t threads) {
  CertifyOptions o;
  if (pairs == "all") {
    o.pair_mode = PairMode::all_pairs;
  } else if (pairs != "auto") {
    throw py::value_error("pairs must be 'auto' or 'all'");
  }
  o.threads = threads;
  return o;
}

std::string generate(std::size_t n, const std::string& variant) {
  const auto v = parse_academic_variant(variant);
  if (!v) throw py::value_error("variant must be 'original' or 'adapted'");
  const AcademicExample ex = make_academic_example(n, *v);
  Json doc = instance_to_json(ex.instance);
  doc["uncertainty"] = uncertainty_config_to_json(ex.uncertainty);
  doc["initial"] = "zero";
  return doc.dump();
}

std::string solve(const std::string& instance_json, const std::string& uncertainty_json, const std::string& relax,
                  const std::string& initial, const std::string& pairs, std::size_t max_iterations,
                  std::size_t threads) {
  const Inputs in = load(instance_json, uncertainty_json);
  DesignOptions opts;
  const auto mode = parse_relax_mode(relax);
  if (!mode) throw py::value_error("relax must be one of none, reduced, convex, both");
  opts.relax = *mode;
  opts.max_iterations = max_iterations;
  opts.certify = certify_options(pairs, threads);
  std::string how = initial;
  if (how.empty()) {
    how = in.doc.contains("initial") && in.doc["initial"].is_string() ? in.doc["initial"].get<std::string>() : "base";
  }
  if (how == "base") {
    opts.initial_scenarios = {base_scenario(in.config, in.instance)};
  } else if (how == "zero") {
    opts.initial_scenarios = {Scenario::zero(in.instance)};
  } else {
    const Json doc = parse_json(how);
    if (doc.is_array()) {
      for (const Json& s : doc) opts.initial_scenarios.push_back(scenario_from_json(in.instance, s));
    } else {
      opts.initial_scenarios.push_back(scenario_from_json(in.instance, doc));
    }
  }
  py::gil_scoped_release release;
  const DesignSolution sol = solve_robust_design(in.instance, in.uset, opts);
  Json out = design_solution_to_json(in.instance, sol);
  out["csv"] = iterations_csv(in.instance, sol);
  return out.dump();
}

std::string check(const std::string& instance_json, const std::string& decision_json,
                  const std::string& uncertainty_json, const std::string& pairs, std::size_t threads) {
  const Inputs in = load(instance_json, uncertainty_json);
  const ExpansionDecision x = decision_from_json(in.instance, parse_json(decision_json));
  py::gil_scoped_release release;
  const RobustnessCertificate cert = certify_robust_feasibility(in.instance, x, in.uset, certify_options(pairs, threads));
  return certificate_to_json(in.instance, cert).dump();
}

std::string operate(const std::string& instance_json, const std::string& decision_json,
                    const std::string& scenario_json) {
  const Instance instance = instance_from_json(parse_json(instance_json));
  const ExpansionDecision x = decision_from_json(instance, parse_json(decision_json));
  const Scenario d = scenario_from_json(instance, parse_json(scenario_json));
  const FeasibilityReport rep = check_operational_feasibility(instance, x, d);
  Json out;
  out["feasible"] = rep.feasible;
  out["potential_gap"] = Json::array();
  for (double g : rep.potential_gap) out["potential_gap"].push_back(number_or_null(g));
  out["flow_violations"] = Json::array();
  for (const FlowViolation& v : rep.flow_violations) {
    out["flow_violations"].push_back(
        {{"arc", instance.arc(v.arc).id}, {"amount", v.amount}, {"bound", v.upper ? "upper" : "lower"}});
  }
  out["imbalances"] = Json::array();
  for (const auto& [c, net] : rep.imbalances) out["imbalances"].push_back({{"component", c}, {"net_load", net}});
  if (rep.state) {
    Json flows = Json::object();
    for (std::size_t a = 0; a < instance.arc_count(); ++a) {
      if (x.built(a) || !instance.arc(a).is_candidate()) flows[instance.arc(a).id] = rep.state->flow[a];
    }
    out["flows"] = std::move(flows);
  }
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_robnet, m) {
  m.doc() = "Robust expansion of potential-based networks";

  static py::exception<Error> base(m, "RobnetError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      base(e.what());
    }
  });

  m.def("generate", &generate, py::arg("n"), py::arg("variant") = "original");
  m.def("solve", &solve, py::arg("instance"), py::arg("uncertainty") = "", py::arg("relax") = "reduced",
        py::arg("initial") = "", py::arg("pairs") = "auto", py::arg("max_iterations") = 1000,
        py::arg("threads") = 1);
  m.def("check", &check, py::arg("instance"), py::arg("decision"), py::arg("uncertainty") = "",
        py::arg("pairs") = "auto", py::arg("threads") = 1);
  m.def("operate", &operate, py::arg("instance"), py::arg("decision"), py::arg("scenario"));
}
