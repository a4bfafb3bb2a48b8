#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "wddqn/core/error.hpp"
#include "wddqn/replay/transition.hpp"

namespace wddqn::agents {

struct AgentConfig {
  double gamma = 0.99;
  double c = 0.1;
  double epsilon_start = 1.0;
  double epsilon_end = 0.01;
  long epsilon_anneal_steps = 10000;
  int batch_size = 32;
  double lr = 1e-4;
  long target_sync_interval = 500;  // DQN-family baselines only
  std::vector<int> q_hidden{128, 128};
  std::vector<int> lrn_hidden{64, 64};
  std::size_t replay_capacity = 8192;
  double tabular_alpha = 0.1;

  void validate() const {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0,1]");
    if (!(c > 0.0)) throw ConfigError("c must be > 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(lr >= 0.0)) throw ConfigError("lr must be >= 0");
    if (epsilon_anneal_steps < 0) throw ConfigError("epsilon anneal steps must be >= 0");
    if (target_sync_interval < 1) throw ConfigError("target_sync_interval must be >= 1");
    if (replay_capacity < static_cast<std::size_t>(batch_size))
      throw ConfigError("replay capacity must hold at least one batch");
  }
};

/// Linear anneal from start to end over the first `anneal_steps` steps.
inline double epsilon_at(long step, const AgentConfig& cfg) {
  if (cfg.epsilon_anneal_steps == 0 || step >= cfg.epsilon_anneal_steps) return cfg.epsilon_end;
  const double frac = static_cast<double>(step) / static_cast<double>(cfg.epsilon_anneal_steps);
  return cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac;
}

struct LearnMetrics {
  bool trained = false;
  int network = -1;  // 0 = U (or online), 1 = V
  double loss = std::numeric_limits<double>::quiet_NaN();
  double loss_lrn = std::numeric_limits<double>::quiet_NaN();
  double mean_beta = std::numeric_limits<double>::quiet_NaN();
};

/// Uniform act / observe / learn surface driven by the harness.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual int select_action(std::span<const float> state, std::uint64_t state_key, double epsilon) = 0;
  virtual void observe(const Transition& t) = 0;
  virtual LearnMetrics learn() = 0;
  virtual void end_episode() = 0;

  virtual std::string kind() const = 0;
  virtual void save_checkpoint(const std::filesystem::path& dir) const = 0;
  virtual void load_checkpoint(const std::filesystem::path& dir) = 0;
};

}  // namespace wddqn::agents
