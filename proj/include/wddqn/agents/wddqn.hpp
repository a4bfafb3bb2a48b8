#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wddqn/agents/agent.hpp"
#include "wddqn/agents/checkpoint_io.hpp"
#include "wddqn/agents/estimators.hpp"
#include "wddqn/core/random.hpp"
#include "wddqn/lenient/leniency.hpp"
#include "wddqn/lenient/reward_net.hpp"
#include "wddqn/nn/dense_net.hpp"
#include "wddqn/nn/train.hpp"
#include "wddqn/replay/schedule.hpp"
#include "wddqn/replay/sum_tree_memory.hpp"
#include "wddqn/replay/transition.hpp"

namespace wddqn::agents {

struct WddqnOptions {
  bool use_lrn = true;  // false: targets use the raw reward
  bool use_srs = true;  // false: every new transition enters at p_max
  std::optional<double> forced_beta;
};

/// Per-item view of one learning step, exposed for inspection and tests.
struct WddqnStepTrace {
  bool trained_u = true;
  std::vector<replay::Handle> handles;
  std::vector<float> rewards_used;  // R^N(s,a) or raw r
  std::vector<float> targets;
  std::vector<float> predictions;  // trained net, before the update
  std::vector<double> betas;
};

/// Twin Q-networks that select and evaluate for each other through the
/// weighted double estimator, a lenient reward network replacing the raw
/// reward in targets, and trajectory-scheduled prioritized replay.
class WddqnAgent final : public Agent {
 public:
  using Net = nn::DenseNet<float>;

  WddqnAgent(int input_size, int num_actions, AgentConfig config, lenient::LeniencyParams leniency,
             replay::PrioritySchedule schedule, WddqnOptions options, std::uint64_t seed)
      : config_(std::move(config)),
        leniency_(leniency),
        schedule_(schedule),
        options_(options),
        rng_(make_rng(seed)),
        memory_(config_.replay_capacity),
        temperatures_(num_actions, leniency.max_temperature),
        stats_(num_actions) {
    config_.validate();
    leniency_.validate();
    schedule_.validate();
    std::vector<int> sizes{input_size};
    sizes.insert(sizes.end(), config_.q_hidden.begin(), config_.q_hidden.end());
    sizes.push_back(num_actions);
    q_u_ = nn::net_init<float>(sizes, rng_);
    q_v_ = nn::net_init<float>(sizes, rng_);
    adam_u_ = nn::AdamState<float>(q_u_, config_.lr);
    adam_v_ = nn::AdamState<float>(q_v_, config_.lr);
    lrn_ = lenient::LenientRewardNet(input_size, config_.lrn_hidden, num_actions, config_.lr, rng_);
  }

  std::string kind() const override {
    if (options_.use_lrn && options_.use_srs) return "wddqn";
    if (options_.use_lrn) return "wddqn-lrn-only";
    if (options_.use_srs) return "wddqn-srs-only";
    return "wddqn-no-lrn-srs";
  }

  /// epsilon-greedy on (Q^U + Q^V) / 2, ties broken uniformly.
  int select_action(std::span<const float> state, std::uint64_t, double epsilon) override {
    const int n = q_u_.output_size();
    if (uniform01(rng_) < epsilon) return static_cast<int>(uniform_index(rng_, static_cast<std::uint64_t>(n)));
    const auto u = q_u_.forward(state);
    const auto v = q_v_.forward(state);
    std::vector<float> mean(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) mean[static_cast<std::size_t>(a)] = (u(a) + v(a)) / 2.0f;
    return estimators::argmax_random_tie<float>(mean, rng_);
  }

  void observe(const Transition& t) override {
    episode_.push(t);
    stats_.record(t.state_key, t.action, t.reward);
  }

  /// Push the episode into global memory and decay the visited pairs'
  /// temperatures in trajectory order.
  void end_episode() override {
    if (episode_.empty()) return;
    const auto& items = episode_.items();
    if (options_.use_srs)
      memory_.push_trajectory(std::span<const Transition>(items), schedule_);
    else
      memory_.push_trajectory_uniform(std::span<const Transition>(items));
    for (const auto& t : items)
      temperatures_.decay(t.state_key, t.action, t.next_state_key, t.terminal, leniency_);
    episode_.clear();
  }

  LearnMetrics learn() override { return learn_step(nullptr); }

  /// One update of Q^U or Q^V (fair coin) and of the reward network on the
  /// same prioritized mini-batch. No-op while the memory holds < batch_size.
  LearnMetrics learn_step(WddqnStepTrace* trace) {
    LearnMetrics metrics;
    const auto batch_size = static_cast<std::size_t>(config_.batch_size);
    if (memory_.size() < batch_size) return metrics;

    const auto sample = memory_.sample(batch_size, rng_);
    const int dim = q_u_.input_size();
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

    const bool train_u = coin_flip(rng_);
    Net& chooser = train_u ? q_u_ : q_v_;
    const Net& evaluator = train_u ? q_v_ : q_u_;
    auto& adam = train_u ? adam_u_ : adam_v_;

    std::vector<float> lrn_current;
    std::vector<float> rewards(batch_size);
    if (options_.use_lrn) {
      lrn_current = lrn_.predict(batch.inputs, batch.action_indices);
      rewards = lrn_current;
    } else {
      for (std::size_t i = 0; i < batch_size; ++i) rewards[i] = static_cast<float>(items[i]->reward);
    }

    const auto chooser_next = chooser.forward(next_states);
    const auto evaluator_next = evaluator.forward(next_states);
    batch.targets.resize(batch_size);
    std::vector<double> betas(batch_size, 0.0);
    double beta_sum = 0.0;
    std::size_t beta_count = 0;
    const double* forced = options_.forced_beta ? &*options_.forced_beta : nullptr;
    for (std::size_t i = 0; i < batch_size; ++i) {
      if (items[i]->terminal) {
        batch.targets[i] = rewards[i];
        continue;
      }
      const auto r = static_cast<Eigen::Index>(i);
      const std::span<const float> crow(chooser_next.row(r).data(), static_cast<std::size_t>(chooser_next.cols()));
      const std::span<const float> erow(evaluator_next.row(r).data(), static_cast<std::size_t>(evaluator_next.cols()));
      const auto w = estimators::weighted_bootstrap<float>(crow, erow, config_.c, forced);
      betas[i] = w.beta;
      beta_sum += w.beta;
      ++beta_count;
      batch.targets[i] = static_cast<float>(static_cast<double>(rewards[i]) + config_.gamma * w.value);
    }

    auto result = nn::train_batch_detailed(chooser, batch, adam);
    for (std::size_t i = 0; i < batch_size; ++i)
      if (memory_.valid(sample.handles[i]))
        memory_.update_priority(sample.handles[i],
                                static_cast<double>(batch.targets[i]) - static_cast<double>(result.predictions[i]));

    metrics.trained = true;
    metrics.network = train_u ? 0 : 1;
    metrics.loss = result.loss;
    metrics.mean_beta = beta_count ? beta_sum / static_cast<double>(beta_count) : 0.0;

    if (trace) {
      trace->trained_u = train_u;
      trace->handles = sample.handles;
      trace->rewards_used = rewards;
      trace->targets = batch.targets;
      trace->predictions = result.predictions;
      trace->betas = betas;
    }

    if (options_.use_lrn) {
      std::vector<lenient::RewardQuery> queries(batch_size);
      for (std::size_t i = 0; i < batch_size; ++i)
        queries[i] = {items[i]->state_key, items[i]->state, items[i]->action};
      nn::Batch<float> lrn_batch;
      lrn_batch.inputs = std::move(batch.inputs);
      lrn_batch.action_indices = std::move(batch.action_indices);
      metrics.loss_lrn = lrn_.update(lrn_batch, queries, stats_, temperatures_, leniency_, rng_, lrn_current).loss;
    }
    return metrics;
  }

  void save_checkpoint(const std::filesystem::path& dir) const override {
    std::filesystem::create_directories(dir);
    io::save_net(q_u_, dir / "q_u.bin");
    io::save_net(q_v_, dir / "q_v.bin");
    io::save_net(lrn_.net(), dir / "lrn.bin");
    io::save_temperatures(temperatures_, dir / "temperatures.csv");
    io::save_reward_stats(stats_, dir / "reward_stats.csv");
  }

  void load_checkpoint(const std::filesystem::path& dir) override {
    auto u = io::load_net<float>(dir / "q_u.bin");
    auto v = io::load_net<float>(dir / "q_v.bin");
    auto r = io::load_net<float>(dir / "lrn.bin");
    nn::copy_params(u, q_u_);
    nn::copy_params(v, q_v_);
    nn::copy_params(r, lrn_.net());
    io::load_temperatures(temperatures_, dir / "temperatures.csv");
    io::load_reward_stats(stats_, dir / "reward_stats.csv");
  }

  const Net& q_u() const { return q_u_; }
  const Net& q_v() const { return q_v_; }
  Net& q_u() { return q_u_; }
  Net& q_v() { return q_v_; }
  const lenient::LenientRewardNet& lrn() const { return lrn_; }
  const replay::SumTreeMemory<Transition>& memory() const { return memory_; }
  const EpisodicMemory& episodic() const { return episode_; }
  const lenient::TemperatureTable& temperatures() const { return temperatures_; }
  const lenient::RewardStats& reward_stats() const { return stats_; }
  const AgentConfig& config() const { return config_; }

 private:
  AgentConfig config_;
  lenient::LeniencyParams leniency_;
  replay::PrioritySchedule schedule_;
  WddqnOptions options_;
  Rng rng_;
  Net q_u_;
  Net q_v_;
  nn::AdamState<float> adam_u_;
  nn::AdamState<float> adam_v_;
  lenient::LenientRewardNet lrn_;
  replay::SumTreeMemory<Transition> memory_;
  EpisodicMemory episode_;
  lenient::TemperatureTable temperatures_;
  lenient::RewardStats stats_;
};

}  // namespace wddqn::agents
