#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wddqn/core/random.hpp"
#include "wddqn/lenient/leniency.hpp"
#include "wddqn/nn/dense_net.hpp"
#include "wddqn/nn/train.hpp"

namespace wddqn::lenient {

struct RewardQuery {
  std::uint64_t state_key = 0;
  std::span<const float> state;
  int action = 0;
};

struct LrnUpdateStats {
  float loss = 0.0f;
  std::size_t included = 0;
};

/// Learned estimate R(s, .) of the expected immediate reward, trained
/// optimistically toward the per-pair reward means.
class LenientRewardNet {
 public:
  using Net = nn::DenseNet<float>;

  LenientRewardNet() = default;
  LenientRewardNet(int input_size, const std::vector<int>& hidden, int num_actions, double lr, Rng& rng) {
    std::vector<int> sizes{input_size};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(num_actions);
    net_ = nn::net_init<float>(sizes, rng);
    adam_ = nn::AdamState<float>(net_, lr);
  }

  const Net& net() const { return net_; }
  Net& net() { return net_; }
  int num_actions() const { return net_.output_size(); }

  float predict(std::span<const float> state, int action) const { return net_.forward(state)(action); }

  /// Predicted reward for each row's chosen action.
  std::vector<float> predict(const nn::Matrix<float>& states, std::span<const int> actions) const {
    const auto out = net_.forward(states);
    std::vector<float> r(actions.size());
    for (std::size_t i = 0; i < actions.size(); ++i) r[i] = out(static_cast<Eigen::Index>(i), actions[i]);
    return r;
  }

  /// delta = rbar(s,a) - R(s,a); items whose gate passes regress toward rbar,
  /// the rest are left out of the loss. Temperatures are read, not decayed.
  LrnUpdateStats update(std::span<const RewardQuery> items, const RewardStats& stats,
                        const TemperatureTable& table, const LeniencyParams& params, Rng& rng) {
    nn::Batch<float> batch;
    batch.inputs.resize(static_cast<Eigen::Index>(items.size()), net_.input_size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      for (int c = 0; c < net_.input_size(); ++c)
        batch.inputs(static_cast<Eigen::Index>(i), c) = items[i].state[static_cast<std::size_t>(c)];
      batch.action_indices.push_back(items[i].action);
    }
    return update(batch, items, stats, table, params, rng);
  }

  /// Same as above with the input rows already stacked in `batch.inputs` and
  /// `batch.action_indices`; targets and weights are filled here. `current`
  /// may carry this net's predictions for the batch if already computed.
  LrnUpdateStats update(nn::Batch<float>& batch, std::span<const RewardQuery> items, const RewardStats& stats,
                        const TemperatureTable& table, const LeniencyParams& params, Rng& rng,
                        std::span<const float> current = {}) {
    std::vector<float> computed;
    if (current.empty()) {
      computed = predict(batch.inputs, batch.action_indices);
      current = computed;
    }
    batch.targets.assign(items.size(), 0.0f);
    batch.weights.assign(items.size(), 0.0f);
    LrnUpdateStats out;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const double mean = stats.mean(items[i].state_key, items[i].action);
      const double delta = mean - static_cast<double>(current[i]);
      const double l = table.leniency_of(items[i].state_key, items[i].action, params.K);
      const double x = uniform01(rng);
      batch.targets[i] = static_cast<float>(static_cast<double>(current[i]) + delta);
      if (lenient_q_gate(delta, l, x, params.gate)) {
        batch.weights[i] = 1.0f;
        ++out.included;
      }
    }
    out.loss = nn::train_batch(net_, batch, adam_);
    return out;
  }

 private:
  Net net_;
  nn::AdamState<float> adam_;
};

}  // namespace wddqn::lenient
