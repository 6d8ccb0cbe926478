#include <doctest.h>

#include <sstream>

#include "robnet/academic.hpp"
#include "robnet/report.hpp"

using namespace robnet;

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("iteration csv mirrors the records") {
  const AcademicExample ex = make_academic_example(3, AcademicVariant::original);
  const UncertaintySet u = build_uncertainty(ex.uncertainty, ex.instance);
  const DesignSolution sol = solve_robust_design(ex.instance, u);
  const std::string csv = iterations_csv(ex.instance, sol);
  std::istringstream in(csv);
  std::string header, line;
  std::getline(in, header);
  CHECK(header ==
        "iteration,kappa,reduced_bound,convex_bound,accepted_by,master_objective,built,verdict,added,scenarios,"
        "imbalance_checks,potential_checks,flow_lo_checks,flow_hi_checks,flow_solves,master_subsets,wall_ms");
  std::size_t rows = 0, adding = 0;
  while (std::getline(in, line)) {
    ++rows;
    if (line.find(",potential,") != std::string::npos) ++adding;
  }
  CHECK(rows == sol.iterations.size());
  CHECK(rows == sol.scenario_set.size());  // one appended scenario per row plus the final row
  CHECK(adding == 3);

  const Json j = design_solution_to_json(ex.instance, sol);
  CHECK(j["status"] == "optimal");
  CHECK(j["iterations"].size() == sol.iterations.size());
  CHECK(j["scenarios"][0]["origin"] == "initial");
  CHECK(j["certificate"]["verdict"] == "robust_feasible");
  CHECK(j["certificate"]["violation"].is_null());
}
