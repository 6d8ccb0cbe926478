#pragma once

// JSON and CSV renderings of oracle results, certificates and design runs.

#include <string>
#include <string_view>

#include "robnet/adversarial.hpp"
#include "robnet/design.hpp"
#include "robnet/instance_io.hpp"

namespace robnet {

// 64-bit FNV-1a as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

Json adversarial_result_to_json(const Instance& instance, const AdversarialResult& result);
Json violation_to_json(const Instance& instance, const Violation& violation);
Json certificate_to_json(const Instance& instance, const RobustnessCertificate& certificate);
Json iteration_to_json(const Instance& instance, const IterationRecord& record);
Json design_solution_to_json(const Instance& instance, const DesignSolution& solution);

// Header plus one row per iteration; see README for the columns.
std::string iterations_csv(const Instance& instance, const DesignSolution& solution);

}  // namespace robnet
