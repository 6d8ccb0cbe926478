#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "robnet/model.hpp"

namespace robnet {

// Balanced load vector over all nodes: injections negative, withdrawals
// positive, inner nodes zero.
struct Scenario {
  std::vector<double> load;

  Scenario() = default;
  explicit Scenario(std::size_t node_count) : load(node_count, 0.0) {}
  explicit Scenario(std::vector<double> values) : load(std::move(values)) {}

  static Scenario zero(const Instance& instance) { return Scenario(instance.node_count()); }

  double operator[](NodeIndex i) const { return load[i]; }
  double& operator[](NodeIndex i) { return load[i]; }
  std::size_t size() const { return load.size(); }

  double total() const {
    double s = 0.0;
    for (double d : load) s += d;
    return s;
  }
  double max_abs() const {
    double m = 0.0;
    for (double d : load) m = std::max(m, std::abs(d));
    return m;
  }
  bool approx_equal(const Scenario& other, double tol = 1e-9) const {
    if (other.size() != size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
      if (std::abs(load[i] - other.load[i]) > tol) return false;
    }
    return true;
  }
};

// Balancedness tolerance: |sum| <= 1e-9 * max(1, max |d_u|).
inline double balance_tolerance(const Scenario& d) { return 1e-9 * std::max(1.0, d.max_abs()); }

// Violation tolerance shared by the feasibility check and the adversarial
// certificate, so that a reported violation is always reproducible.
inline double violation_tolerance(double scale) { return 1e-7 * std::max(1.0, std::abs(scale)); }

}  // namespace robnet
