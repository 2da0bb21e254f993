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

#include "moimit/nn.hpp"

#include <random>

#include <gtest/gtest.h>

namespace moimit::nn {
namespace {

TEST(Mlp, LayoutAndCounts) {
  Mlp<double> net({21, 256, 256, 6}, true);
  EXPECT_EQ(net.parameter_count(), 21u * 256 + 256 + 256u * 256 + 256 + 256u * 6 + 6);
  EXPECT_EQ(net.num_layers(), 3u);
  EXPECT_EQ(net.weight(1).rows(), 256);
  EXPECT_EQ(net.weight(2).cols(), 256);
  EXPECT_THROW(Mlp<double>({4}, false), InvalidArgument);
  EXPECT_THROW(Mlp<double>({4, 0, 1}, false), InvalidArgument);
}

TEST(Mlp, HandComputedForward) {
  Mlp<double> net({2, 2, 1}, false);
  net.weight(0) << 0.5, -1.0, 0.25, 2.0;
  net.bias(0) << 0.1, -0.2;
  net.weight(1) << 1.5, -0.5;
  net.bias(1) << 0.3;
  Matrix<double> x(2, 1);
  x << 0.4, -0.3;
  const double h0 = std::tanh(0.5 * 0.4 - 1.0 * -0.3 + 0.1);
  const double h1 = std::tanh(0.25 * 0.4 + 2.0 * -0.3 - 0.2);
  EXPECT_NEAR(net.forward(x)(0, 0), 1.5 * h0 - 0.5 * h1 + 0.3, 1e-15);
}

TEST(Mlp, ZeroNetworkOutputsZero) {
  Mlp<double> net({5, 4, 3}, true);
  EXPECT_TRUE(net.forward(Matrix<double>::Random(5, 7)).isZero());
}

TEST(Mlp, InitBounds) {
  Mlp<double> net({16, 4, 2}, false);
  std::mt19937_64 rng(1);
  net.init_uniform(rng);
  EXPECT_LE(net.weight(0).cwiseAbs().maxCoeff(), 0.25);
  EXPECT_LE(net.bias(0).cwiseAbs().maxCoeff(), 0.25);
  EXPECT_LE(net.weight(1).cwiseAbs().maxCoeff(), 0.5);
  EXPECT_GT(net.weight(1).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Mlp, BackwardMatchesFiniteDifferences) {
  for (bool tanh_out : {false, true}) {
    Mlp<double> net({3, 5, 4, 2}, tanh_out);
    std::mt19937_64 rng(3);
    net.init_uniform(rng);
    const Matrix<double> x = Matrix<double>::Random(3, 6);
    const Matrix<double> g = Matrix<double>::Random(2, 6);
    auto loss = [&](const Mlp<double>& m) { return (m.forward(x).array() * g.array()).sum(); };
    Mlp<double>::Tape tape;
    net.forward(x, &tape);
    const Vector<double> grad = net.backward(tape, g);
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < grad.size(); ++i) {
      Mlp<double> p = net, m = net;
      p.parameters()[i] += h;
      m.parameters()[i] -= h;
      EXPECT_NEAR(grad[i], (loss(p) - loss(m)) / (2 * h), 1e-8) << i;
    }
  }
}

TEST(Optimizer, SgdMomentumStep) {
  OptimizerConfig cfg;
  cfg.kind = OptimizerConfig::Kind::kSgdMomentum;
  Optimizer<double> opt(2, 0.1, cfg);
  Vector<double> p = Vector<double>::Zero(2);
  Vector<double> g(2);
  g << 1.0, -2.0;
  opt.ascend(p, g);
  EXPECT_NEAR(p[0], 0.1, 1e-15);
  opt.ascend(p, g);
  // velocity = 0.9 * g + g
  EXPECT_NEAR(p[0], 0.1 + 0.1 * 1.9, 1e-15);
  EXPECT_NEAR(p[1], -0.2 - 0.2 * 1.9, 1e-15);
}

TEST(Optimizer, AdamFirstStepIsLearningRateTimesSign) {
  Optimizer<double> opt(3, 1e-3, OptimizerConfig{});
  Vector<double> p = Vector<double>::Zero(3);
  Vector<double> g(3);
  g << 4.0, -0.01, 250.0;
  opt.ascend(p, g);
  EXPECT_NEAR(p[0], 1e-3, 1e-10);
  EXPECT_NEAR(p[1], -1e-3, 1e-8);
  EXPECT_NEAR(p[2], 1e-3, 1e-10);
}

TEST(Optimizer, AscendsConcaveQuadratic) {
  for (auto kind : {OptimizerConfig::Kind::kAdam, OptimizerConfig::Kind::kSgdMomentum}) {
    OptimizerConfig cfg;
    cfg.kind = kind;
    Optimizer<double> opt(2, 0.05, cfg);
    Vector<double> p = Vector<double>::Zero(2);
    Vector<double> target(2);
    target << 1.0, -0.5;
    for (int i = 0; i < 2000; ++i) {
      const Vector<double> g = target - p;
      opt.ascend(p, g);
    }
    EXPECT_LT((p - target).norm(), 1e-3);
  }
}

}  // namespace
}  // namespace moimit::nn
