#pragma once

#include <span>
#include <string>
#include <vector>

#include "wddqn/agents/agent.hpp"
#include "wddqn/agents/checkpoint_io.hpp"
#include "wddqn/agents/estimators.hpp"
#include "wddqn/agents/tabular.hpp"
#include "wddqn/core/random.hpp"
#include "wddqn/lenient/leniency.hpp"
#include "wddqn/nn/dense_net.hpp"
#include "wddqn/nn/train.hpp"
#include "wddqn/replay/sum_tree_memory.hpp"
#include "wddqn/replay/transition.hpp"

namespace wddqn::agents {

enum class DqnVariant {
  Dqn,      // r + gamma max_a Q_target(s', a)
  Ddqn,     // r + gamma Q_target(s', argmax_a Q_online(s', a))
  Lenient,  // DQN target; negative-TD items pass the leniency gate or drop out
};

/// Online network plus a periodically synced target copy, uniform replay.
class DqnAgent final : public Agent {
 public:
  using Net = nn::DenseNet<float>;

  DqnAgent(DqnVariant variant, int input_size, int num_actions, AgentConfig config,
           lenient::LeniencyParams leniency, std::uint64_t seed)
      : variant_(variant),
        config_(std::move(config)),
        leniency_(leniency),
        rng_(make_rng(seed)),
        memory_(config_.replay_capacity),
        temperatures_(num_actions, leniency.max_temperature) {
    config_.validate();
    leniency_.validate();
    std::vector<int> sizes{input_size};
    sizes.insert(sizes.end(), config_.q_hidden.begin(), config_.q_hidden.end());
    sizes.push_back(num_actions);
    online_ = nn::net_init<float>(sizes, rng_);
    target_ = online_;
    adam_ = nn::AdamState<float>(online_, config_.lr);
  }

  std::string kind() const override {
    switch (variant_) {
      case DqnVariant::Dqn: return "dqn";
      case DqnVariant::Ddqn: return "ddqn";
      case DqnVariant::Lenient: return "lenient";
    }
    return "dqn";
  }

  int select_action(std::span<const float> state, std::uint64_t, double epsilon) override {
    const int n = online_.output_size();
    if (uniform01(rng_) < epsilon) return static_cast<int>(uniform_index(rng_, static_cast<std::uint64_t>(n)));
    const auto q = online_.forward(state);
    return estimators::argmax_random_tie<float>(std::span<const float>(q.data(), static_cast<std::size_t>(n)), rng_);
  }

  void observe(const Transition& t) override {
    memory_.push(t, 1.0);
    if (variant_ == DqnVariant::Lenient) episode_keys_.push_back({t.state_key, t.action, 0.0, t.next_state_key, t.terminal});
    if (++steps_ % config_.target_sync_interval == 0) nn::copy_params(online_, target_);
  }

  void end_episode() override {
    for (const auto& k : episode_keys_)
      temperatures_.decay(k.state, k.action, k.next_state, k.terminal, leniency_);
    episode_keys_.clear();
  }

  LearnMetrics learn() override {
    LearnMetrics metrics;
    const auto batch_size = static_cast<std::size_t>(config_.batch_size);
    if (memory_.size() < batch_size) return metrics;
    const auto sample = memory_.sample(batch_size, rng_);
    const int dim = online_.input_size();
    nn::Batch<float> batch;
    nn::Matrix<float> next_states(static_cast<Eigen::Index>(batch_size), dim);
    batch.inputs.resize(static_cast<Eigen::Index>(batch_size), dim);
    batch.action_indices.resize(batch_size);
    std::vector<const Transition*> items(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) {
      const Transition& t = memory_.at(sample.handles[i]);
      items[i] = &t;
      const auto r = static_cast<Eigen::Index>(i);
      batch.inputs.row(r) = Eigen::Map<const nn::RowVector<float>>(t.state.data(), dim);
      next_states.row(r) = Eigen::Map<const nn::RowVector<float>>(t.next_state.data(), dim);
      batch.action_indices[i] = t.action;
    }

    const auto target_next = target_.forward(next_states);
    nn::Matrix<float> online_next;
    if (variant_ == DqnVariant::Ddqn) online_next = online_.forward(next_states);
    batch.targets.resize(batch_size);
    const auto cols = static_cast<std::size_t>(target_next.cols());
    for (std::size_t i = 0; i < batch_size; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const std::span<const float> trow(target_next.row(r).data(), cols);
      double y = 0.0;
      if (variant_ == DqnVariant::Ddqn) {
        const std::span<const float> orow(online_next.row(r).data(), cols);
        y = estimators::ddqn_target<float>(items[i]->reward, items[i]->terminal, orow, trow, config_.gamma);
      } else {
        y = estimators::dqn_target<float>(items[i]->reward, items[i]->terminal, trow, config_.gamma);
      }
      batch.targets[i] = static_cast<float>(y);
    }

    if (variant_ == DqnVariant::Lenient) {
      const auto current = online_.forward(batch.inputs);
      batch.weights.assign(batch_size, 0.0f);
      for (std::size_t i = 0; i < batch_size; ++i) {
        const double delta = static_cast<double>(batch.targets[i]) -
                             static_cast<double>(current(static_cast<Eigen::Index>(i), batch.action_indices[i]));
        const double l = temperatures_.leniency_of(items[i]->state_key, items[i]->action, leniency_.K);
        if (lenient::lenient_q_gate(delta, l, uniform01(rng_), leniency_.gate)) batch.weights[i] = 1.0f;
      }
    }

    metrics.trained = true;
    metrics.network = 0;
    metrics.loss = nn::train_batch(online_, batch, adam_);
    return metrics;
  }

  void save_checkpoint(const std::filesystem::path& dir) const override {
    std::filesystem::create_directories(dir);
    io::save_net(online_, dir / "q_online.bin");
    io::save_net(target_, dir / "q_target.bin");
    if (variant_ == DqnVariant::Lenient) io::save_temperatures(temperatures_, dir / "temperatures.csv");
  }

  void load_checkpoint(const std::filesystem::path& dir) override {
    nn::copy_params(io::load_net<float>(dir / "q_online.bin"), online_);
    nn::copy_params(io::load_net<float>(dir / "q_target.bin"), target_);
    if (variant_ == DqnVariant::Lenient) io::load_temperatures(temperatures_, dir / "temperatures.csv");
  }

  const Net& online() const { return online_; }
  const Net& target() const { return target_; }
  const lenient::TemperatureTable& temperatures() const { return temperatures_; }

 private:
  DqnVariant variant_;
  AgentConfig config_;
  lenient::LeniencyParams leniency_;
  Rng rng_;
  Net online_;
  Net target_;
  nn::AdamState<float> adam_;
  replay::SumTreeMemory<Transition> memory_;
  lenient::TemperatureTable temperatures_;
  std::vector<TabularTransition> episode_keys_;
  long steps_ = 0;
};

}  // namespace wddqn::agents
