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


// Central-difference gradient check for the probing model. A perturbation
// that flips a ReLU or moves an output across the BCE clamp measures a kink,
// not a derivative; such parameters are redrawn and counted.

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "lira/model.hpp"

namespace lira::testing {

using DModel = BasicProbingModel<double>;

struct GradCheckResult {
  std::size_t checked = 0;
  std::size_t redrawn = 0;
  double worst = 0.0;  // max |numeric - analytic| / max(|numeric|, |analytic|, 1e-6)
  // Outputs inside the BCE clamp at the unperturbed point. The analytic
  // gradient is that of the unclamped loss, so the check is only meaningful
  // when this is zero.
  std::size_t saturated = 0;
};

// Signs of every ReLU input plus the clamp state of every output.
inline std::vector<std::uint8_t> kink_pattern(const DModel& model,
                                              const nn::Matrix<double>& q,
                                              const nn::Matrix<double>& d) {
  std::vector<std::uint8_t> out;
  auto record = [&](const nn::Mlp<double>& mlp, const nn::MlpTrace<double>& trace) {
    for (std::size_t l = 0; l < trace.pre.size(); ++l) {
      if (!nn::relu_after(mlp, l)) continue;
      for (Eigen::Index i = 0; i < trace.pre[l].size(); ++i) {
        out.push_back(trace.pre[l].data()[i] > 0.0);
      }
    }
  };
  nn::MlpTrace<double> tq, td, th;
  const auto xq = nn::forward(model.params().query, model.query_norm().apply(q), &tq);
  const auto xd = nn::forward(model.params().dist, model.dist_norm().apply(d), &td);
  nn::Matrix<double> joined(xq.rows() + xd.rows(), xq.cols());
  joined << xq, xd;
  const auto logits = nn::forward(model.params().head, joined, &th);
  record(model.params().query, tq);
  record(model.params().dist, td);
  record(model.params().head, th);
  const auto p = DModel::sigmoid(logits);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double v = p.data()[i];
    out.push_back(v < kProbClamp ? 0 : v > 1.0 - kProbClamp ? 2 : 1);
  }
  return out;
}

// Draws `per_subnet` parameters from each of the three sub-networks.
inline GradCheckResult check_gradients(DModel& model, const nn::Matrix<double>& q,
                                       const nn::Matrix<double>& d,
                                       const nn::Matrix<double>& y,
                                       std::size_t per_subnet, double h,
                                       std::uint64_t seed) {
  auto grads = model.params().zeros_like();
  model.loss_and_gradients(q, d, y, &grads);
  std::mt19937_64 rng(seed);
  GradCheckResult result;
  const auto p = model.forward_batch(q, d);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double v = p.data()[i];
    result.saturated += (v < kProbClamp || v > 1.0 - kProbClamp) ? 1 : 0;
  }
  auto check = [&](nn::Mlp<double>& params, nn::Mlp<double>& grad) {
    std::vector<std::pair<double*, double*>> slots;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
      auto& p = params.layers[l];
      auto& g = grad.layers[l];
      for (Eigen::Index i = 0; i < p.weight.size(); ++i) {
        slots.emplace_back(p.weight.data() + i, g.weight.data() + i);
      }
      for (Eigen::Index i = 0; i < p.bias.size(); ++i) {
        slots.emplace_back(p.bias.data() + i, g.bias.data() + i);
      }
    }
    std::uniform_int_distribution<std::size_t> pick(0, slots.size() - 1);
    for (std::size_t done = 0; done < per_subnet;) {
      auto [p, gp] = slots[pick(rng)];
      const double saved = *p;
      *p = saved + h;
      const double up = model.loss_and_gradients(q, d, y, nullptr);
      const auto up_pattern = kink_pattern(model, q, d);
      *p = saved - h;
      const double down = model.loss_and_gradients(q, d, y, nullptr);
      const auto down_pattern = kink_pattern(model, q, d);
      *p = saved;
      if (up_pattern != down_pattern) {
        if (++result.redrawn > 100 * per_subnet) return;  // checked stays short
        continue;
      }
      const double numeric = (up - down) / (2 * h);
      const double denom = std::max({std::abs(numeric), std::abs(*gp), 1e-6});
      result.worst = std::max(result.worst, std::abs(numeric - *gp) / denom);
      ++result.checked;
      ++done;
    }
  };
  check(model.params().query, grads.query);
  check(model.params().dist, grads.dist);
  check(model.params().head, grads.head);
  return result;
}

}  // namespace lira::testing
