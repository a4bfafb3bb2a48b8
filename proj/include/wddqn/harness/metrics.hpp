#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "wddqn/core/error.hpp"

namespace wddqn::harness {

/// Minimum steps over steps actually taken; 0 when the goal was not reached.
inline double efficiency_ratio(int min_steps, int actual_steps, bool reached) {
  if (actual_steps < 1) throw ContractViolation("efficiency_ratio needs actual_steps >= 1");
  if (!reached) return 0.0;
  return static_cast<double>(min_steps) / static_cast<double>(actual_steps);
}

struct WindowStats {
  std::size_t first = 0;  // index of the window's first episode
  std::size_t size = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Consecutive non-overlapping windows; the last may be partial.
inline std::vector<WindowStats> rolling_metrics(std::span<const double> values, std::size_t window = 50) {
  if (window < 1) throw ContractViolation("window must be >= 1");
  std::vector<WindowStats> out;
  for (std::size_t start = 0; start < values.size(); start += window) {
    const std::size_t end = std::min(values.size(), start + window);
    WindowStats w;
    w.first = start;
    w.size = end - start;
    w.min = values[start];
    w.max = values[start];
    double sum = 0.0;
    for (std::size_t i = start; i < end; ++i) {
      sum += values[i];
      w.min = std::min(w.min, values[i]);
      w.max = std::max(w.max, values[i]);
    }
    w.mean = sum / static_cast<double>(w.size);
    out.push_back(w);
  }
  return out;
}

/// Mean of the last `n` values (all of them if fewer).
inline double tail_mean(std::span<const double> values, std::size_t n) {
  if (values.empty()) return 0.0;
  const std::size_t k = std::min(n, values.size());
  double s = 0.0;
  for (std::size_t i = values.size() - k; i < values.size(); ++i) s += values[i];
  return s / static_cast<double>(k);
}

}  // namespace wddqn::harness
