#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "wddqn/core/error.hpp"

namespace wddqn::replay {

/// Rising insertion-priority schedule w_i = exp(rho_c * u^i), clamped at w_max.
struct PrioritySchedule {
  double rho_c = 0.2;
  double u = 1.1;
  double w_max = 10.0;

  void validate() const {
    if (!(u > 1.0)) throw ConfigError("schedule rate u must be > 1");
    if (!(rho_c > 0.0)) throw ConfigError("schedule rho_c must be > 0");
    if (!(w_max >= 1.0)) throw ConfigError("schedule w_max must be >= 1");
  }
};

/// Weights for positions 0..n-1 of a trajectory. The exponent is compared in
/// log space, so u^i never overflows.
inline std::vector<double> schedule_weights(std::size_t n, const PrioritySchedule& sched) {
  sched.validate();
  const double log_cap = std::log(std::log(sched.w_max));  // -inf when w_max == 1
  const double log_rho = std::log(sched.rho_c);
  const double log_u = std::log(sched.u);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double log_exponent = log_rho + static_cast<double>(i) * log_u;
    w[i] = log_exponent >= log_cap ? sched.w_max
                                    : std::min(sched.w_max, std::exp(std::exp(log_exponent)));
  }
  return w;
}

}  // namespace wddqn::replay
