#include "robnet/report.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>

namespace robnet {

namespace {

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string csv_optional(const std::optional<double>& v) { return v ? csv_number(*v) : std::string(); }

Json optional_number(const std::optional<double>& v) {
  if (!v) return nullptr;
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  return *v;
}

std::string joined_ids(const Instance& instance, const ExpansionDecision& decision) {
  std::string out;
  for (const std::string& id : decision.built_ids(instance)) {
    if (!out.empty()) out += ' ';
    out += id;
  }
  return out;
}

Json checks_to_json(const ChecksRun& c) {
  return Json{{"imbalance", c.imbalance},
              {"potential", c.potential},
              {"flow_lo", c.flow_lo},
              {"flow_hi", c.flow_hi},
              {"flow_solves", c.flow_solves}};
}

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json adversarial_result_to_json(const Instance& instance, const AdversarialResult& result) {
  return Json{{"value", result.value},
              {"witness", scenario_to_json(instance, result.witness)},
              {"regime", to_string(result.regime)},
              {"threshold_hit", result.threshold_hit},
              {"evaluations", result.evaluations}};
}

Json violation_to_json(const Instance& instance, const Violation& v) {
  Json j{{"kind", to_string(v.kind)}};
  switch (v.kind) {
    case ViolationKind::imbalance:
      j["component"] = v.component;
      break;
    case ViolationKind::potential:
      j["pair"] = Json::array({instance.node(v.u).id, instance.node(v.v).id});
      break;
    case ViolationKind::flow_lo:
    case ViolationKind::flow_hi:
      j["arc"] = instance.arc(v.arc).id;
      break;
  }
  j["value"] = v.value;
  if (v.kind != ViolationKind::imbalance) j["bound"] = v.bound;
  j["magnitude"] = v.magnitude;
  j["witness"] = scenario_to_json(instance, v.witness);
  return j;
}

Json certificate_to_json(const Instance& instance, const RobustnessCertificate& cert) {
  Json j{{"verdict", to_string(cert.verdict)}};
  j["violation"] = cert.violation ? violation_to_json(instance, *cert.violation) : Json(nullptr);
  j["checks_run"] = checks_to_json(cert.checks);
  j["regime"] = to_string(cert.regime);
  j["pair_mode"] = to_string(cert.pair_mode);
  j["pair_fallback"] = cert.pair_fallback ? Json(*cert.pair_fallback) : Json(nullptr);
  j["notes"] = cert.notes;
  return j;
}

Json iteration_to_json(const Instance& instance, const IterationRecord& r) {
  return Json{{"iteration", r.iteration},
              {"kappa", r.kappa},
              {"reduced_bound", optional_number(r.reduced_bound)},
              {"convex_bound", optional_number(r.convex_bound)},
              {"accepted_by", r.accepted_by},
              {"master_objective", r.master_objective},
              {"built", r.decision.built_ids(instance)},
              {"verdict", to_string(r.verdict)},
              {"added", r.added ? Json(to_string(*r.added)) : Json(nullptr)},
              {"scenarios", r.scenario_count},
              {"checks_run", checks_to_json(r.checks)},
              {"master_subsets", r.master_subsets},
              {"wall_ms", r.wall_ms}};
}

Json design_solution_to_json(const Instance& instance, const DesignSolution& s) {
  Json j{{"status", to_string(s.status)}};
  j["objective"] = s.objective;
  j["built"] = s.decision.built_ids(instance);
  j["message"] = s.message;
  Json scenarios = Json::array();
  for (std::size_t k = 0; k < s.scenario_set.size(); ++k) {
    scenarios.push_back(Json{{"origin", to_string(s.scenario_set.origins[k])},
                             {"load", scenario_to_json(instance, s.scenario_set.scenarios[k])}});
  }
  j["scenarios"] = std::move(scenarios);
  Json its = Json::array();
  for (const IterationRecord& r : s.iterations) its.push_back(iteration_to_json(instance, r));
  j["iterations"] = std::move(its);
  j["certificate"] = certificate_to_json(instance, s.certificate);
  return j;
}

std::string iterations_csv(const Instance& instance, const DesignSolution& solution) {
  std::ostringstream out;
  out << "iteration,kappa,reduced_bound,convex_bound,accepted_by,master_objective,built,verdict,added,"
         "scenarios,imbalance_checks,potential_checks,flow_lo_checks,flow_hi_checks,flow_solves,"
         "master_subsets,wall_ms\n";
  for (const IterationRecord& r : solution.iterations) {
    out << r.iteration << ',' << csv_number(r.kappa) << ',' << csv_optional(r.reduced_bound) << ','
        << csv_optional(r.convex_bound) << ',' << r.accepted_by << ',' << csv_number(r.master_objective) << ','
        << joined_ids(instance, r.decision) << ',' << to_string(r.verdict) << ','
        << (r.added ? to_string(*r.added) : "") << ',' << r.scenario_count << ',' << r.checks.imbalance << ','
        << r.checks.potential << ',' << r.checks.flow_lo << ',' << r.checks.flow_hi << ','
        << r.checks.flow_solves << ',' << r.master_subsets << ',' << csv_number(r.wall_ms) << '\n';
  }
  return out.str();
}

}  // namespace robnet
