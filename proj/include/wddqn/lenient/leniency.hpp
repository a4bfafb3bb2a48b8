#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <unordered_map>
#include <vector>

#include "wddqn/core/error.hpp"

namespace wddqn::lenient {

/// Which side of the uniform draw lets a negative update through.
enum class GateRule {
  Optimistic,     // apply iff delta > 0 or x >= l  (negative updates w.p. 1 - l)
  LiteralReward,  // apply iff delta > 0 or x < l
};

struct LeniencyParams {
  double K = 2.0;
  double kappa = 0.95;
  double eta = 0.6;
  double max_temperature = 1.0;  // 0 switches leniency off entirely
  GateRule gate = GateRule::Optimistic;

  void validate() const {
    if (!(K > 0.0)) throw ConfigError("leniency K must be > 0");
    if (!(kappa >= 0.0 && kappa <= 1.0)) throw ConfigError("leniency kappa must lie in [0,1]");
    if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("leniency eta must lie in [0,1]");
    if (!(max_temperature >= 0.0)) throw ConfigError("max_temperature must be >= 0");
  }
};

/// l = 1 - exp(-K T).
inline double leniency(double temperature, double K) {
  if (temperature < 0.0) throw ContractViolation("temperature must be >= 0");
  return -std::expm1(-K * temperature);
}

/// Whether a TD update with error `delta` is applied, given leniency `l` and a
/// uniform draw `x` in [0, 1).
inline bool lenient_q_gate(double delta, double l, double x,
                           GateRule rule = GateRule::Optimistic) {
  if (delta > 0.0) return true;
  return rule == GateRule::Optimistic ? x >= l : x < l;
}

/// Per-(state, action) temperatures. Unseen pairs read max_temperature.
class TemperatureTable {
 public:
  explicit TemperatureTable(int num_actions = 4, double max_temperature = 1.0)
      : num_actions_(num_actions), max_temperature_(max_temperature) {
    if (num_actions < 1) throw ConfigError("temperature table needs >= 1 action");
  }

  int num_actions() const { return num_actions_; }
  double max_temperature() const { return max_temperature_; }
  std::size_t states() const { return table_.size(); }

  double temperature(std::uint64_t state_key, int action) const {
    const auto it = table_.find(state_key);
    return it == table_.end() ? max_temperature_ : it->second[static_cast<std::size_t>(action)];
  }

  /// Mean temperature over the actions of a state.
  double mean_temperature(std::uint64_t state_key) const {
    const auto it = table_.find(state_key);
    if (it == table_.end()) return max_temperature_;
    double s = 0.0;
    for (double t : it->second) s += t;
    return s / num_actions_;
  }

  double leniency_of(std::uint64_t state_key, int action, double K) const {
    return leniency(temperature(state_key, action), K);
  }

  void set(std::uint64_t state_key, int action, double t) { row(state_key)[static_cast<std::size_t>(action)] = t; }

  /// kappa * T on a terminal successor, else kappa * ((1 - eta) T + eta * mean T(s')).
  double decay(std::uint64_t state_key, int action, std::uint64_t next_key, bool terminal,
               const LeniencyParams& params) {
    const double t = temperature(state_key, action);
    const double folded = terminal ? t : (1.0 - params.eta) * t + params.eta * mean_temperature(next_key);
    // Folding in a warmer successor must not raise the temperature.
    const double next = std::min(t, params.kappa * folded);
    set(state_key, action, next);
    return next;
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const auto& [key, temps] : table_)
      for (int a = 0; a < num_actions_; ++a) fn(key, a, temps[static_cast<std::size_t>(a)]);
  }

 private:
  std::vector<double>& row(std::uint64_t key) {
    auto it = table_.find(key);
    if (it == table_.end())
      it = table_.emplace(key, std::vector<double>(static_cast<std::size_t>(num_actions_), max_temperature_)).first;
    return it->second;
  }

  int num_actions_;
  double max_temperature_;
  std::unordered_map<std::uint64_t, std::vector<double>> table_;
};

/// Running mean of the immediate rewards seen for each (state, action).
class RewardStats {
 public:
  struct Entry {
    std::uint64_t count = 0;
    double mean = 0.0;
  };

  explicit RewardStats(int num_actions = 4) : num_actions_(num_actions) {}

  double record(std::uint64_t state_key, int action, double r) {
    if (!std::isfinite(r)) throw ContractViolation("reward must be finite");
    Entry& e = table_[key(state_key, action)];
    ++e.count;
    e.mean += (r - e.mean) / static_cast<double>(e.count);
    return e.mean;
  }

  void restore(std::uint64_t state_key, int action, std::uint64_t count, double mean) {
    table_[key(state_key, action)] = {count, mean};
  }

  bool contains(std::uint64_t state_key, int action) const {
    return table_.contains(key(state_key, action));
  }

  const Entry& entry(std::uint64_t state_key, int action) const {
    const auto it = table_.find(key(state_key, action));
    if (it == table_.end()) throw Error("no reward statistics for this state-action pair");
    return it->second;
  }

  double mean(std::uint64_t state_key, int action) const { return entry(state_key, action).mean; }
  std::size_t size() const { return table_.size(); }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const auto& [k, e] : table_)
      fn(k / static_cast<std::uint64_t>(num_actions_), static_cast<int>(k % static_cast<std::uint64_t>(num_actions_)), e);
  }

 private:
  std::uint64_t key(std::uint64_t state_key, int action) const {
    return state_key * static_cast<std::uint64_t>(num_actions_) + static_cast<std::uint64_t>(action);
  }

  int num_actions_;
  std::unordered_map<std::uint64_t, Entry> table_;
};

}  // namespace wddqn::lenient
