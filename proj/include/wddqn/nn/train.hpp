#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "wddqn/core/error.hpp"
#include "wddqn/nn/dense_net.hpp"

namespace wddqn::nn {

/// A regression mini-batch over selected action outputs. `weights` is optional;
/// an item with weight 0 is excluded from the loss entirely.
template <typename Scalar>
struct Batch {
  Matrix<Scalar> inputs;
  std::vector<int> action_indices;
  std::vector<Scalar> targets;
  std::vector<Scalar> weights;

  std::size_t size() const { return action_indices.size(); }
};

/// Gradient (or Adam moment) buffers shaped like a net's parameters.
template <typename Scalar>
struct ParamBuffers {
  std::vector<Matrix<Scalar>> weights;
  std::vector<RowVector<Scalar>> biases;

  static ParamBuffers zeros_like(const DenseNet<Scalar>& net) {
    ParamBuffers b;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      b.weights.push_back(Matrix<Scalar>::Zero(net.layer(l).weights.rows(),
                                               net.layer(l).weights.cols()));
      b.biases.push_back(RowVector<Scalar>::Zero(net.layer(l).bias.size()));
    }
    return b;
  }
};

template <typename Scalar>
struct AdamState {
  long step_count = 0;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  ParamBuffers<Scalar> m;
  ParamBuffers<Scalar> v;

  AdamState() = default;
  explicit AdamState(const DenseNet<Scalar>& net, double learning_rate = 1e-4)
      : lr(learning_rate),
        m(ParamBuffers<Scalar>::zeros_like(net)),
        v(ParamBuffers<Scalar>::zeros_like(net)) {}
};

template <typename Scalar>
struct LossAndGradient {
  Scalar loss = 0;
  std::vector<Scalar> predictions;  // pre-update Q(s, a_selected), one per item
  std::size_t included = 0;
  ParamBuffers<Scalar> gradient;
};

/// Mean squared error over the selected outputs and its exact gradient.
template <typename Scalar>
LossAndGradient<Scalar> loss_and_gradient(const DenseNet<Scalar>& net, const Batch<Scalar>& batch) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  if (batch.inputs.rows() != n || batch.targets.size() != batch.size() ||
      (!batch.weights.empty() && batch.weights.size() != batch.size()))
    throw ContractViolation("batch fields have inconsistent lengths");
  if (batch.inputs.cols() != net.input_size())
    throw ContractViolation("batch input dimension does not match the net");
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!std::isfinite(static_cast<double>(batch.targets[i])))
      throw NumericError("non-finite regression target");
    if (batch.action_indices[i] < 0 || batch.action_indices[i] >= net.output_size())
      throw ContractViolation("action index outside the output layer");
  }

  const std::size_t depth = net.num_layers();
  std::vector<Matrix<Scalar>> activations;  // input to each layer
  std::vector<Matrix<Scalar>> pre;          // pre-activation of each layer
  activations.reserve(depth);
  pre.reserve(depth);
  activations.push_back(batch.inputs);
  for (std::size_t l = 0; l < depth; ++l) {
    Matrix<Scalar> z = activations.back() * net.layer(l).weights;
    z.rowwise() += net.layer(l).bias;
    pre.push_back(z);
    if (l + 1 < depth) activations.push_back(z.cwiseMax(Scalar(0)));
  }
  const Matrix<Scalar>& out = pre.back();

  LossAndGradient<Scalar> result;
  result.predictions.resize(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    result.predictions[i] = out(static_cast<Eigen::Index>(i), batch.action_indices[i]);
    if (batch.weights.empty() || batch.weights[i] > Scalar(0)) ++result.included;
  }
  result.gradient = ParamBuffers<Scalar>::zeros_like(net);
  if (result.included == 0) return result;

  const auto denom = static_cast<Scalar>(result.included);
  Matrix<Scalar> delta = Matrix<Scalar>::Zero(out.rows(), out.cols());
  Scalar loss = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Scalar w = batch.weights.empty() ? Scalar(1) : batch.weights[i];
    if (w <= Scalar(0)) continue;
    const Scalar err = batch.targets[i] - result.predictions[i];
    loss += w * err * err;
    delta(static_cast<Eigen::Index>(i), batch.action_indices[i]) = Scalar(-2) * w * err / denom;
  }
  result.loss = loss / denom;

  for (std::size_t l = depth; l-- > 0;) {
    result.gradient.weights[l].noalias() = activations[l].transpose() * delta;
    result.gradient.biases[l] = delta.colwise().sum();
    if (l > 0) {
      Matrix<Scalar> back = delta * net.layer(l).weights.transpose();
      delta = back.cwiseProduct((pre[l - 1].array() > Scalar(0)).matrix().template cast<Scalar>());
    }
  }
  return result;
}

template <typename Scalar>
void adam_step(DenseNet<Scalar>& net, const ParamBuffers<Scalar>& grad, AdamState<Scalar>& adam) {
  if (adam.m.weights.size() != net.num_layers()) adam = AdamState<Scalar>(net, adam.lr);
  ++adam.step_count;
  const double t = static_cast<double>(adam.step_count);
  const auto b1 = static_cast<Scalar>(adam.beta1);
  const auto b2 = static_cast<Scalar>(adam.beta2);
  const auto c1 = static_cast<Scalar>(1.0 - std::pow(adam.beta1, t));
  const auto c2 = static_cast<Scalar>(1.0 - std::pow(adam.beta2, t));
  const auto lr = static_cast<Scalar>(adam.lr);
  const auto eps = static_cast<Scalar>(adam.epsilon);

  const auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    update(net.layer(l).weights, grad.weights[l], adam.m.weights[l], adam.v.weights[l]);
    update(net.layer(l).bias, grad.biases[l], adam.m.biases[l], adam.v.biases[l]);
  }
  if (!net.all_finite()) throw NumericError("non-finite parameters after an Adam step");
}

template <typename Scalar>
struct TrainResult {
  Scalar loss = 0;
  std::vector<Scalar> predictions;
};

/// One Adam step on the batch; reports the pre-update loss and predictions.
/// A batch whose items are all excluded leaves the net and optimiser untouched.
template <typename Scalar>
TrainResult<Scalar> train_batch_detailed(DenseNet<Scalar>& net, const Batch<Scalar>& batch,
                                         AdamState<Scalar>& adam) {
  auto lg = loss_and_gradient(net, batch);
  if (lg.included > 0) adam_step(net, lg.gradient, adam);
  return {lg.loss, std::move(lg.predictions)};
}

template <typename Scalar>
Scalar train_batch(DenseNet<Scalar>& net, const Batch<Scalar>& batch, AdamState<Scalar>& adam) {
  return train_batch_detailed(net, batch, adam).loss;
}

/// Compare the backprop gradient of (target - Q(input, action))^2 with central
/// differences of step h. Returns max |analytic - numeric| / max(|analytic|,
/// |numeric|, 1e-6) over every parameter. Parameters whose +-h probes flip a
/// ReLU on or off are skipped, since the loss is not differentiable across
/// the kink and the difference quotient is meaningless there.
template <typename Scalar>
double finite_diff_check(const DenseNet<Scalar>& net, std::span<const Scalar> input,
                         int action_index, Scalar target, double h) {
  if (!(h > 0.0)) throw ContractViolation("finite_diff_check needs h > 0");
  Batch<Scalar> batch;
  batch.inputs = Eigen::Map<const Matrix<Scalar>>(input.data(), 1,
                                                  static_cast<Eigen::Index>(input.size()));
  batch.action_indices = {action_index};
  batch.targets = {target};
  const auto analytic = loss_and_gradient(net, batch).gradient;

  DenseNet<Scalar> probe = net;
  const auto loss_at = [&](std::vector<bool>& active) {
    active.clear();
    Matrix<Scalar> x = batch.inputs;
    for (std::size_t l = 0; l < probe.num_layers(); ++l) {
      Matrix<Scalar> z = x * probe.layer(l).weights;
      z += probe.layer(l).bias;
      if (l + 1 < probe.num_layers()) {
        for (Eigen::Index j = 0; j < z.size(); ++j) active.push_back(z.data()[j] > Scalar(0));
        z = z.cwiseMax(Scalar(0));
      }
      x = std::move(z);
    }
    const auto err = static_cast<double>(target - x(0, action_index));
    return err * err;
  };
  std::vector<bool> base, up_pattern, down_pattern;
  loss_at(base);
  double worst = 0.0;
  const auto check = [&](Scalar& param, Scalar grad) {
    const Scalar saved = param;
    param = saved + static_cast<Scalar>(h);
    const double up = loss_at(up_pattern);
    param = saved - static_cast<Scalar>(h);
    const double down = loss_at(down_pattern);
    param = saved;
    if (up_pattern != base || down_pattern != base) return;
    const double numeric = (up - down) / (2.0 * h);
    const double a = static_cast<double>(grad);
    const double scale = std::max({std::abs(a), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(a - numeric) / scale);
  };
  for (std::size_t l = 0; l < probe.num_layers(); ++l) {
    auto& w = probe.layer(l).weights;
    for (Eigen::Index i = 0; i < w.size(); ++i) check(w.data()[i], analytic.weights[l].data()[i]);
    auto& b = probe.layer(l).bias;
    for (Eigen::Index i = 0; i < b.size(); ++i) check(b.data()[i], analytic.biases[l].data()[i]);
  }
  return worst;
}

}  // namespace wddqn::nn
