// Copyright 2026-present the lira project
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


#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lira/model.hpp"
#include "gradient_check.hpp"

namespace lira {
namespace {

using testing::DModel;

struct Batch {
  nn::Matrix<double> q, d, y;
};

Batch random_batch(std::size_t dim, std::size_t b, std::size_t n,
                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::bernoulli_distribution coin(0.3);
  Batch batch{nn::Matrix<double>(dim, n), nn::Matrix<double>(b, n),
              nn::Matrix<double>(b, n)};
  for (Eigen::Index i = 0; i < batch.q.size(); ++i) batch.q.data()[i] = g(rng);
  for (Eigen::Index i = 0; i < batch.d.size(); ++i) {
    batch.d.data()[i] = std::abs(g(rng)) * 4.0;
  }
  for (Eigen::Index i = 0; i < batch.y.size(); ++i) {
    batch.y.data()[i] = coin(rng) ? 1.0 : 0.0;
  }
  return batch;
}

// Analytic gradients against central differences of the loss, step 1e-4 in
// double precision, over parameters sampled from every sub-network.
TEST(Model, GradientMatchesCentralDifferences) {
  ModelShape shape;
  shape.dim = 8;
  shape.num_partitions = 6;
  DModel model = ProbingModel::init(shape, 17).cast<double>();
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g(0.0, 0.1);
  for (auto* mlp : {&model.params().query, &model.params().dist,
                    &model.params().head}) {
    for (auto& layer : mlp->layers) {
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = g(rng);
    }
  }
  const Batch batch = random_batch(8, 6, 16, 5);

  const auto r = testing::check_gradients(model, batch.q, batch.d, batch.y, 40,
                                          1e-4, 99);
  ASSERT_EQ(r.saturated, 0u);
  EXPECT_EQ(r.checked, 120u);
  EXPECT_LE(r.worst, 1e-3);
}

// A parameter whose perturbation flips a ReLU is redrawn, not scored.
TEST(Model, GradientCheckSkipsKinks) {
  ModelShape shape;
  shape.dim = 2;
  shape.num_partitions = 2;
  shape.query_widths = {1};
  shape.dist_widths = {1};
  shape.head_widths = {1};
  DModel model = ProbingModel::init(shape, 1).cast<double>();
  nn::Matrix<double> q(2, 1), d(2, 1), y(2, 1);
  q << 1.0, 0.0;
  d << 0.0, 0.0;
  y << 1.0, 0.0;
  // Query-net pre-activation sits exactly on the kink.
  auto& first = model.params().query.layers[0];
  first.weight.setZero();
  first.weight(0, 0) = 1.0;
  first.bias.setConstant(-1.0);
  const auto pattern = testing::kink_pattern(model, q, d);
  first.bias(0) = -1.0 + 1e-3;
  EXPECT_NE(testing::kink_pattern(model, q, d), pattern);
}

TEST(Model, ForwardShapeAndRange) {
  ModelShape shape;
  shape.dim = 5;
  shape.num_partitions = 7;
  const auto model = ProbingModel::init(shape, 3);
  const std::vector<float> q = {1, 2, 3, 4, 5};
  const std::vector<float> d = {9, 8, 7, 6, 5, 4, 3};
  const auto p = model.forward(q, d);
  ASSERT_EQ(p.size(), 7u);
  for (float v : p) {
    EXPECT_GT(v, 0.0f);
    EXPECT_LT(v, 1.0f);
  }
  EXPECT_THROW(model.forward(d, d), InvalidArgument);
  const std::vector<float> bad = {1, 2, NAN, 4, 5};
  EXPECT_THROW(model.forward(bad, d), InvalidArgument);
}

TEST(Model, SigmoidStaysInsideOpenInterval) {
  nn::Matrix<float> z(3, 1);
  z << -1000.0f, 0.0f, 1000.0f;
  const auto p = ProbingModel::sigmoid(z);
  EXPECT_GT(p(0, 0), 0.0f);
  EXPECT_EQ(p(1, 0), 0.5f);
  EXPECT_LT(p(2, 0), 1.0f);
}

TEST(Model, BceHandWorked) {
  const std::uint8_t y[] = {1, 0};
  const float p[] = {0.8f, 0.25f};
  const double want = -std::log(0.8f) - std::log(1 - 0.25);
  EXPECT_NEAR(bce_loss<float>(y, p), want, 1e-7);
  // Clamped at 1e-7: a confident wrong answer costs -log(1e-7).
  const float wrong[] = {0.0f, 1.0f};
  EXPECT_NEAR(bce_loss<float>(y, wrong), -2 * std::log(1e-7), 1e-6);
}

TEST(Model, BatchLossMatchesPerExampleBce) {
  ModelShape shape;
  shape.dim = 4;
  shape.num_partitions = 5;
  const auto model = ProbingModel::init(shape, 8).cast<double>();
  const Batch batch = random_batch(4, 5, 9, 2);
  const double loss = model.loss_and_gradients(batch.q, batch.d, batch.y, nullptr);
  const auto probs = model.forward_batch(batch.q, batch.d);
  double sum = 0.0;
  for (Eigen::Index c = 0; c < probs.cols(); ++c) {
    std::vector<std::uint8_t> y(5);
    std::vector<double> p(5);
    for (int r = 0; r < 5; ++r) {
      y[r] = batch.y(r, c) > 0.5;
      p[r] = probs(r, c);
    }
    sum += bce_loss<double>(y, p);
  }
  EXPECT_NEAR(loss, sum / 9.0, 1e-12);
}

TEST(Model, InitIsSeeded) {
  ModelShape shape;
  shape.dim = 3;
  shape.num_partitions = 4;
  auto a = ProbingModel::init(shape, 1);
  auto b = ProbingModel::init(shape, 1);
  auto c = ProbingModel::init(shape, 2);
  EXPECT_TRUE(a.params().head.layers[0].weight == b.params().head.layers[0].weight);
  EXPECT_FALSE(a.params().head.layers[0].weight == c.params().head.layers[0].weight);
  EXPECT_EQ(a.params().num_parameters(),
            (3 * 128 + 128) + (128 * 64 + 64) + (4 * 64 + 64) + (64 * 64 + 64) +
                (128 * 128 + 128) + (128 * 4 + 4));
}

TEST(Model, PredictedNprobeCountsAtOrAboveSigma) {
  const float p[] = {0.5f, 0.49f, 0.9f, 0.5f};
  EXPECT_EQ(predicted_nprobe<float>(p, 0.5), 3u);
  EXPECT_EQ(predicted_nprobe<float>(p, 0.95), 0u);
}

}  // namespace
}  // namespace lira
