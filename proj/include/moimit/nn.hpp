// Copyright 2026 The moimit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <numeric>
#include <random>

#include "moimit/common.hpp"

namespace moimit::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Fully connected network with tanh after every hidden layer and,
/// optionally, after the output layer.
///
/// All weights and biases live in one flat vector so optimizers and
/// finite-difference checks can treat the network as a point in R^n.
/// Layer l occupies [W_l (out x in, column-major), b_l (out)].
template <typename Scalar>
class Mlp {
 public:
  using MatrixT = Matrix<Scalar>;
  using VectorT = Vector<Scalar>;
  using MatrixMap = Eigen::Map<MatrixT>;
  using ConstMatrixMap = Eigen::Map<const MatrixT>;
  using VectorMap = Eigen::Map<VectorT>;
  using ConstVectorMap = Eigen::Map<const VectorT>;

  /// Activations recorded by forward() for use in backward().
  struct Tape {
    std::vector<MatrixT> activations;  // [input, layer 1 output, ...]
  };

  Mlp() = default;
  Mlp(std::vector<int> widths, bool tanh_output) : widths_(std::move(widths)), tanh_output_(tanh_output) {
    if (widths_.size() < 2) throw InvalidArgument("Mlp: need at least input and output widths");
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
      if (widths_[l] < 1 || widths_[l + 1] < 1) throw InvalidArgument("Mlp: widths must be positive");
      offsets_.push_back(total);
      total += static_cast<std::size_t>(widths_[l + 1]) * (widths_[l] + 1);
    }
    params_ = VectorT::Zero(static_cast<Eigen::Index>(total));
  }

  /// U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  template <typename Rng>
  void init_uniform(Rng& rng) {
    for (std::size_t l = 0; l < num_layers(); ++l) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(widths_[l]));
      std::uniform_real_distribution<double> dist(-bound, bound);
      auto W = weight(l);
      auto b = bias(l);
      for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = static_cast<Scalar>(dist(rng));
      for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = static_cast<Scalar>(dist(rng));
    }
  }

  std::size_t num_layers() const { return offsets_.size(); }
  int input_width() const { return widths_.front(); }
  int output_width() const { return widths_.back(); }
  const std::vector<int>& widths() const { return widths_; }
  bool tanh_output() const { return tanh_output_; }
  std::size_t parameter_count() const { return static_cast<std::size_t>(params_.size()); }

  VectorT& parameters() { return params_; }
  const VectorT& parameters() const { return params_; }

  MatrixMap weight(std::size_t l) { return MatrixMap(params_.data() + offsets_[l], widths_[l + 1], widths_[l]); }
  ConstMatrixMap weight(std::size_t l) const {
    return ConstMatrixMap(params_.data() + offsets_[l], widths_[l + 1], widths_[l]);
  }
  VectorMap bias(std::size_t l) {
    return VectorMap(params_.data() + offsets_[l] + widths_[l + 1] * widths_[l], widths_[l + 1]);
  }
  ConstVectorMap bias(std::size_t l) const {
    return ConstVectorMap(params_.data() + offsets_[l] + widths_[l + 1] * widths_[l], widths_[l + 1]);
  }

  /// Batched forward pass; columns of `input` are samples.
  MatrixT forward(const MatrixT& input, Tape* tape = nullptr) const {
    if (input.rows() != input_width()) throw InvalidArgument("Mlp: input width mismatch");
    MatrixT a = input;
    if (tape) {
      tape->activations.clear();
      tape->activations.push_back(a);
    }
    for (std::size_t l = 0; l < num_layers(); ++l) {
      MatrixT z = weight(l) * a;
      z.colwise() += bias(l);
      if (l + 1 < num_layers() || tanh_output_) z = z.array().tanh();
      a = std::move(z);
      if (tape) tape->activations.push_back(a);
    }
    return a;
  }

  /// Gradient of a scalar loss with respect to all parameters, given the
  /// loss gradient with respect to the network output.
  VectorT backward(const Tape& tape, const MatrixT& output_grad) const {
    VectorT grad = VectorT::Zero(params_.size());
    MatrixT delta = output_grad;
    for (std::size_t l = num_layers(); l-- > 0;) {
      const MatrixT& out = tape.activations[l + 1];
      if (l + 1 < num_layers() || tanh_output_) {
        delta = (delta.array() * (Scalar(1) - out.array().square())).matrix();
      }
      const MatrixT& in = tape.activations[l];
      MatrixMap(grad.data() + offsets_[l], widths_[l + 1], widths_[l]).noalias() = delta * in.transpose();
      VectorMap(grad.data() + offsets_[l] + widths_[l + 1] * widths_[l], widths_[l + 1]) = delta.rowwise().sum();
      if (l > 0) delta = weight(l).transpose() * delta;
    }
    return grad;
  }

 private:
  std::vector<int> widths_;
  bool tanh_output_ = false;
  std::vector<std::size_t> offsets_;
  VectorT params_;
};

/// Gradient-ascent optimizers over a flat parameter vector.
struct OptimizerConfig {
  enum class Kind { kAdam, kSgdMomentum };
  Kind kind = Kind::kAdam;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Scalar>
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(std::size_t size, double learning_rate, OptimizerConfig cfg)
      : cfg_(cfg), lr_(learning_rate), m_(Vector<Scalar>::Zero(size)), v_(Vector<Scalar>::Zero(size)) {}

  /// Moves `params` uphill along `grad`.
  void ascend(Vector<Scalar>& params, const Vector<Scalar>& grad) {
    ++t_;
    if (cfg_.kind == OptimizerConfig::Kind::kSgdMomentum) {
      m_ = static_cast<Scalar>(cfg_.momentum) * m_ + grad;
      params += static_cast<Scalar>(lr_) * m_;
      return;
    }
    const auto b1 = static_cast<Scalar>(cfg_.beta1);
    const auto b2 = static_cast<Scalar>(cfg_.beta2);
    m_ = b1 * m_ + (Scalar(1) - b1) * grad;
    v_ = b2 * v_ + (Scalar(1) - b2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    const auto step = static_cast<Scalar>(lr_ * std::sqrt(c2) / c1);
    params.array() += step * m_.array() / (v_.array().sqrt() + static_cast<Scalar>(cfg_.epsilon * std::sqrt(c2)));
  }

 private:
  OptimizerConfig cfg_;
  double lr_ = 0.0;
  long t_ = 0;
  Vector<Scalar> m_, v_;
};

}  // namespace moimit::nn
