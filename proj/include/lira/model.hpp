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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lira/common.hpp"
#include "lira/mlp.hpp"

namespace lira {

/// Layer widths of the three sub-networks. The head's output width is
/// always `num_partitions` and is not listed in `head_widths`.
struct ModelShape {
  std::size_t dim = 0;
  std::size_t num_partitions = 0;
  std::vector<std::size_t> query_widths{128, 64};
  std::vector<std::size_t> dist_widths{64, 64};
  std::vector<std::size_t> head_widths{128};
  float sigma_train = 0.5f;

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

/// Per-feature standardization fitted on training inputs.
template <typename S>
struct InputNorm {
  nn::Vector<S> mean;
  nn::Vector<S> stddev;

  nn::Matrix<S> apply(const nn::Matrix<S>& x) const {
    return (x.colwise() - mean).array().colwise() / stddev.array();
  }

  template <typename T>
  InputNorm<T> cast() const {
    return {mean.template cast<T>(), stddev.template cast<T>()};
  }
};

template <typename S>
struct ProbingParams {
  nn::Mlp<S> query;  // d -> query features
  nn::Mlp<S> dist;   // B -> centroid-distance features
  nn::Mlp<S> head;   // concat -> B logits

  ProbingParams zeros_like() const {
    return {query.zeros_like(), dist.zeros_like(), head.zeros_like()};
  }

  template <typename F>
  void for_each_tensor(F&& f) {
    nn::for_each_tensor(query, f);
    nn::for_each_tensor(dist, f);
    nn::for_each_tensor(head, f);
  }

  std::size_t num_parameters() {
    std::size_t n = 0;
    for_each_tensor([&](S*, std::size_t size) { n += size; });
    return n;
  }
};

/// f(q, I) -> per-partition probability that the partition holds one of
/// q's kNN. The query vector and its centroid-distance vector are embedded
/// by separate MLPs, concatenated, and mapped to B sigmoid outputs.
template <typename S>
class BasicProbingModel {
 public:
  BasicProbingModel() = default;

  /// Random He-normal weights, identity normalization.
  static BasicProbingModel init(const ModelShape& shape, std::uint64_t seed) {
    LIRA_REQUIRE(shape.dim >= 1 && shape.num_partitions >= 1,
                 "model needs positive d and B");
    LIRA_REQUIRE(!shape.query_widths.empty() && !shape.dist_widths.empty(),
                 "feature networks need at least one layer");
    BasicProbingModel m;
    m.shape_ = shape;
    std::mt19937_64 rng(seed);
    m.params_.query = nn::make_mlp<S>(shape.dim, shape.query_widths, true, rng);
    m.params_.dist =
        nn::make_mlp<S>(shape.num_partitions, shape.dist_widths, true, rng);
    auto head = shape.head_widths;
    head.push_back(shape.num_partitions);
    m.params_.head = nn::make_mlp<S>(
        shape.query_widths.back() + shape.dist_widths.back(), head, false, rng);
    m.query_norm_ = {nn::Vector<S>::Zero(shape.dim),
                     nn::Vector<S>::Ones(shape.dim)};
    m.dist_norm_ = {nn::Vector<S>::Zero(shape.num_partitions),
                    nn::Vector<S>::Ones(shape.num_partitions)};
    return m;
  }

  BasicProbingModel(ModelShape shape, InputNorm<S> query_norm,
                    InputNorm<S> dist_norm, ProbingParams<S> params)
      : shape_(std::move(shape)),
        query_norm_(std::move(query_norm)),
        dist_norm_(std::move(dist_norm)),
        params_(std::move(params)) {}

  const ModelShape& shape() const { return shape_; }
  std::size_t dim() const { return shape_.dim; }
  std::size_t num_partitions() const { return shape_.num_partitions; }

  const InputNorm<S>& query_norm() const { return query_norm_; }
  const InputNorm<S>& dist_norm() const { return dist_norm_; }
  void set_normalization(InputNorm<S> query_norm, InputNorm<S> dist_norm) {
    query_norm_ = std::move(query_norm);
    dist_norm_ = std::move(dist_norm);
  }

  ProbingParams<S>& params() { return params_; }
  const ProbingParams<S>& params() const { return params_; }

  /// Sets every weight and bias of the head's output layer to zero, so the
  /// model outputs 0.5 everywhere.
  void zero_output_layer() {
    auto& last = params_.head.layers.back();
    last.weight.setZero();
    last.bias.setZero();
  }

  /// Logits (B x n) for a batch of queries (d x n) and centroid distances
  /// (B x n).
  nn::Matrix<S> logits(const nn::Matrix<S>& queries,
                       const nn::Matrix<S>& dists) const {
    return logits_traced(queries, dists, nullptr);
  }

  nn::Matrix<S> forward_batch(const nn::Matrix<S>& queries,
                              const nn::Matrix<S>& dists) const {
    return sigmoid(logits(queries, dists));
  }

  /// Probabilities for a single query. Throws on dimension mismatch or
  /// non-finite input.
  std::vector<S> forward(std::span<const float> query,
                         std::span<const float> dists) const {
    LIRA_REQUIRE(query.size() == shape_.dim, "query dimension mismatch");
    LIRA_REQUIRE(dists.size() == shape_.num_partitions,
                 "centroid-distance vector has the wrong length");
    nn::Matrix<S> q(shape_.dim, 1), d(shape_.num_partitions, 1);
    for (std::size_t i = 0; i < query.size(); ++i) {
      LIRA_REQUIRE(std::isfinite(query[i]), "non-finite query component");
      q(i, 0) = static_cast<S>(query[i]);
    }
    for (std::size_t i = 0; i < dists.size(); ++i) {
      LIRA_REQUIRE(std::isfinite(dists[i]), "non-finite centroid distance");
      d(i, 0) = static_cast<S>(dists[i]);
    }
    nn::Matrix<S> p = forward_batch(q, d);
    return std::vector<S>(p.data(), p.data() + p.size());
  }

  /// Mean binary cross-entropy of the batch. When `grads` is given, adds
  /// d(mean loss)/d(parameter) into it.
  ///
  /// The loss clamps probabilities to [eps, 1 - eps]; the gradient is that
  /// of the unclamped loss, (p - y) at the logits, which is exact wherever
  /// no clamp is active and keeps saturated wrong outputs trainable.
  double loss_and_gradients(const nn::Matrix<S>& queries,
                            const nn::Matrix<S>& dists,
                            const nn::Matrix<S>& labels,
                            ProbingParams<S>* grads) const;

  template <typename T>
  BasicProbingModel<T> cast() const {
    return BasicProbingModel<T>(
        shape_, query_norm_.template cast<T>(), dist_norm_.template cast<T>(),
        {params_.query.template cast<T>(), params_.dist.template cast<T>(),
         params_.head.template cast<T>()});
  }

  /// Logistic function held inside the open interval (0, 1) even where it
  /// would round to 0 or 1 in S.
  static nn::Matrix<S> sigmoid(const nn::Matrix<S>& z) {
    return z.unaryExpr([](S v) {
      const S p = S(1) / (S(1) + std::exp(-v));
      return std::clamp(p, std::numeric_limits<S>::min(),
                        std::nextafter(S(1), S(0)));
    });
  }

 private:
  struct Trace {
    nn::MlpTrace<S> query, dist, head;
  };

  nn::Matrix<S> logits_traced(const nn::Matrix<S>& queries,
                              const nn::Matrix<S>& dists, Trace* trace) const {
    const nn::Matrix<S> xq = nn::forward(
        params_.query, query_norm_.apply(queries), trace ? &trace->query : nullptr);
    const nn::Matrix<S> xi = nn::forward(
        params_.dist, dist_norm_.apply(dists), trace ? &trace->dist : nullptr);
    nn::Matrix<S> joined(xq.rows() + xi.rows(), xq.cols());
    joined << xq, xi;
    return nn::forward(params_.head, joined, trace ? &trace->head : nullptr);
  }

  ModelShape shape_;
  InputNorm<S> query_norm_;
  InputNorm<S> dist_norm_;
  ProbingParams<S> params_;
};

inline constexpr double kProbClamp = 1e-7;

/// -Σ_b [y_b log p_b + (1 - y_b) log(1 - p_b)] with p clamped to
/// [1e-7, 1 - 1e-7].
template <typename S>
double bce_loss(std::span<const std::uint8_t> label, std::span<const S> probs) {
  LIRA_REQUIRE(label.size() == probs.size(), "label/probability length mismatch");
  double loss = 0.0;
  for (std::size_t b = 0; b < label.size(); ++b) {
    const double p = std::clamp(static_cast<double>(probs[b]), kProbClamp,
                                1.0 - kProbClamp);
    loss -= label[b] ? std::log(p) : std::log1p(-p);
  }
  return loss;
}

template <typename S>
double BasicProbingModel<S>::loss_and_gradients(const nn::Matrix<S>& queries,
                                                const nn::Matrix<S>& dists,
                                                const nn::Matrix<S>& labels,
                                                ProbingParams<S>* grads) const {
  LIRA_REQUIRE(queries.cols() > 0, "empty batch");
  LIRA_REQUIRE(queries.cols() == dists.cols() && queries.cols() == labels.cols(),
               "batch columns disagree");
  Trace trace;
  const nn::Matrix<S> z = logits_traced(queries, dists, grads ? &trace : nullptr);
  const nn::Matrix<S> p = sigmoid(z);
  const auto n = static_cast<double>(z.cols());

  double loss = 0.0;
  for (Eigen::Index c = 0; c < p.cols(); ++c) {
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      const double pc = std::clamp(static_cast<double>(p(r, c)), kProbClamp,
                                   1.0 - kProbClamp);
      loss -= labels(r, c) > S(0.5) ? std::log(pc) : std::log1p(-pc);
    }
  }
  loss /= n;

  if (grads) {
    nn::Matrix<S> g = (p - labels) / static_cast<S>(n);
    g = nn::backward(params_.head, trace.head, std::move(g), grads->head);
    const Eigen::Index hq = params_.query.out_features();
    nn::backward(params_.query, trace.query, nn::Matrix<S>(g.topRows(hq)),
                 grads->query);
    nn::backward(params_.dist, trace.dist,
                 nn::Matrix<S>(g.bottomRows(g.rows() - hq)), grads->dist);
  }
  return loss;
}

using ProbingModel = BasicProbingModel<float>;

/// |{b : probs_b >= sigma}|.
template <typename S>
std::size_t predicted_nprobe(std::span<const S> probs, double sigma) {
  std::size_t n = 0;
  const S threshold = static_cast<S>(sigma);
  for (S p : probs) n += p >= threshold ? 1 : 0;
  return n;
}

}  // namespace lira
