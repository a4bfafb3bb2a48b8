#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wddqn/core/error.hpp"
#include "wddqn/core/random.hpp"

namespace wddqn::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// Weights are stored (fan_in x fan_out) so a batch of row inputs maps as X W + b.
template <typename Scalar>
struct DenseLayer {
  Matrix<Scalar> weights;
  RowVector<Scalar> bias;
};

/// Fully-connected net: rectifier on hidden layers, identity on the output.
template <typename Scalar = double>
class DenseNet {
 public:
  using scalar_type = Scalar;

  DenseNet() = default;

  /// Zero-initialised parameters; see `net_init` for the randomised version.
  explicit DenseNet(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) throw ConfigError("a dense net needs at least 2 layer sizes");
    for (int s : sizes_)
      if (s < 1) throw ConfigError("layer sizes must be >= 1");
    layers_.reserve(sizes_.size() - 1);
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l)
      layers_.push_back({Matrix<Scalar>::Zero(sizes_[l], sizes_[l + 1]),
                         RowVector<Scalar>::Zero(sizes_[l + 1])});
  }

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  std::size_t num_layers() const { return layers_.size(); }

  DenseLayer<Scalar>& layer(std::size_t i) { return layers_[i]; }
  const DenseLayer<Scalar>& layer(std::size_t i) const { return layers_[i]; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    return n;
  }

  bool all_finite() const {
    for (const auto& l : layers_)
      if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
    return true;
  }

  /// Rows of `inputs` are samples; returns one output row per sample.
  Matrix<Scalar> forward(const Matrix<Scalar>& inputs) const {
    check_input(inputs.cols());
    Matrix<Scalar> h = inputs;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Matrix<Scalar> z = h * layers_[l].weights;
      z.rowwise() += layers_[l].bias;
      if (l + 1 < layers_.size()) z = z.cwiseMax(Scalar(0));
      h = std::move(z);
    }
    return h;
  }

  RowVector<Scalar> forward(std::span<const Scalar> input) const {
    check_input(static_cast<Eigen::Index>(input.size()));
    Matrix<Scalar> x = Eigen::Map<const Matrix<Scalar>>(input.data(), 1,
                                                        static_cast<Eigen::Index>(input.size()));
    return forward(x).row(0);
  }

  friend bool operator==(const DenseNet& a, const DenseNet& b) {
    if (a.sizes_ != b.sizes_) return false;
    for (std::size_t l = 0; l < a.layers_.size(); ++l)
      if (a.layers_[l].weights != b.layers_[l].weights || a.layers_[l].bias != b.layers_[l].bias)
        return false;
    return true;
  }

 private:
  void check_input(Eigen::Index cols) const {
    if (sizes_.empty()) throw ContractViolation("forward on an empty net");
    if (cols != sizes_.front())
      throw ContractViolation("input has " + std::to_string(cols) + " columns, net expects " +
                              std::to_string(sizes_.front()));
  }

  std::vector<int> sizes_;
  std::vector<DenseLayer<Scalar>> layers_;
};

/// He initialisation: N(0, 2 / fan_in) weights, zero biases.
template <typename Scalar = double>
DenseNet<Scalar> net_init(const std::vector<int>& layer_sizes, Rng& rng) {
  DenseNet<Scalar> net(layer_sizes);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    auto& w = net.layer(l).weights;
    const double scale = std::sqrt(2.0 / static_cast<double>(w.rows()));
    for (Eigen::Index i = 0; i < w.size(); ++i)
      w.data()[i] = static_cast<Scalar>(scale * standard_normal(rng));
  }
  return net;
}

/// Overwrite `destination` with `source`'s parameters; shapes must agree.
template <typename Scalar>
void copy_params(const DenseNet<Scalar>& source, DenseNet<Scalar>& destination) {
  if (&source == &destination) return;
  if (source.layer_sizes() != destination.layer_sizes())
    throw ContractViolation("copy_params: layer sizes differ");
  for (std::size_t l = 0; l < source.num_layers(); ++l) {
    destination.layer(l).weights = source.layer(l).weights;
    destination.layer(l).bias = source.layer(l).bias;
  }
}

/// Build a (rows x dim) input matrix from a list of feature vectors.
template <typename Scalar, typename Rows>
Matrix<Scalar> stack_rows(const Rows& rows, int dim) {
  Matrix<Scalar> m(static_cast<Eigen::Index>(std::size(rows)), dim);
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    if (static_cast<int>(std::size(row)) != dim)
      throw ContractViolation("stack_rows: feature vector has the wrong dimension");
    for (int c = 0; c < dim; ++c) m(r, c) = static_cast<Scalar>(row[static_cast<std::size_t>(c)]);
    ++r;
  }
  return m;
}

}  // namespace wddqn::nn
