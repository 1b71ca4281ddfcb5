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


#include "lira/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lira/oracle.hpp"

namespace lira {

TrainingSet TrainingSet::select(std::span<const std::size_t> rows) const {
  TrainingSet out;
  out.dim = dim;
  out.num_partitions = num_partitions;
  out.k = k;
  const std::size_t b = num_partitions;
  for (std::size_t r : rows) {
    LIRA_REQUIRE(r < size(), "row out of range");
    out.ids.push_back(ids[r]);
    out.queries.insert(out.queries.end(), queries.begin() + r * dim,
                       queries.begin() + (r + 1) * dim);
    out.centroid_dists.insert(out.centroid_dists.end(),
                              centroid_dists.begin() + r * b,
                              centroid_dists.begin() + (r + 1) * b);
    out.labels.insert(out.labels.end(), labels.begin() + r * b,
                      labels.begin() + (r + 1) * b);
    out.counts.insert(out.counts.end(), counts.begin() + r * b,
                      counts.begin() + (r + 1) * b);
  }
  return out;
}

TrainingSet build_training_set(const Dataset& dataset,
                               std::span<const PointId> train_ids,
                               const PartitionLayout& layout, std::size_t k) {
  LIRA_REQUIRE(k >= 1 && k < train_ids.size(),
               "k must be smaller than the number of training points");
  const auto knn = subset_self_knn(dataset, train_ids, k);
  return build_training_set_from_knn(dataset, train_ids, layout, knn);
}

TrainingSet build_training_set_from_knn(const Dataset& dataset,
                                        std::span<const PointId> train_ids,
                                        const PartitionLayout& layout,
                                        std::span<const KnnResult> knn) {
  LIRA_REQUIRE(layout.kind() == LayoutKind::kHard,
               "labels are computed against the hard layout");
  LIRA_REQUIRE(layout.dim() == dataset.dim(), "layout dimension mismatch");
  LIRA_REQUIRE(knn.size() == train_ids.size(), "one neighbor list per point");
  LIRA_REQUIRE(!train_ids.empty(), "empty training subset");

  TrainingSet ts;
  ts.dim = dataset.dim();
  ts.num_partitions = layout.num_partitions();
  ts.k = knn.front().size();
  const std::size_t n = train_ids.size();
  const std::size_t b = ts.num_partitions;
  ts.ids.assign(train_ids.begin(), train_ids.end());
  ts.queries.resize(n * ts.dim);
  ts.centroid_dists.resize(n * b);
  ts.labels.resize(n * b);
  ts.counts.resize(n * b);
  for (std::size_t i = 0; i < n; ++i) {
    LIRA_REQUIRE(train_ids[i] < dataset.size(), "training id out of range");
    LIRA_REQUIRE(knn[i].size() == ts.k, "neighbor lists differ in length");
    auto q = dataset.row(train_ids[i]);
    std::copy(q.begin(), q.end(), ts.queries.begin() + i * ts.dim);
    auto cd = centroid_distances(q, layout.centroids(), layout.dim());
    std::copy(cd.begin(), cd.end(), ts.centroid_dists.begin() + i * b);
    auto dist = knn_count_distribution(layout, knn[i].ids);
    auto label = probing_label(dist);
    std::copy(dist.counts.begin(), dist.counts.end(), ts.counts.begin() + i * b);
    std::copy(label.mask.begin(), label.mask.end(), ts.labels.begin() + i * b);
  }
  return ts;
}

namespace {

InputNorm<float> fit_columns(std::span<const float> data, std::size_t width,
                             std::size_t rows) {
  std::vector<double> mean(width, 0.0), sq(width, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < width; ++c) mean[c] += data[r * width + c];
  }
  for (double& m : mean) m /= static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const double diff = data[r * width + c] - mean[c];
      sq[c] += diff * diff;
    }
  }
  InputNorm<float> norm{nn::Vector<float>(width), nn::Vector<float>(width)};
  for (std::size_t c = 0; c < width; ++c) {
    const double sd = std::sqrt(sq[c] / static_cast<double>(rows));
    norm.mean(c) = static_cast<float>(mean[c]);
    norm.stddev(c) = sd > 1e-12 ? static_cast<float>(sd) : 1.0f;
  }
  return norm;
}

// Copies rows [begin, end) of `order` into column-major batch matrices.
struct Batch {
  nn::Matrix<float> queries, dists, labels;
};

Batch load_batch(const TrainingSet& ts, std::span<const std::size_t> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Batch batch{nn::Matrix<float>(ts.dim, n),
              nn::Matrix<float>(ts.num_partitions, n),
              nn::Matrix<float>(ts.num_partitions, n)};
  for (Eigen::Index c = 0; c < n; ++c) {
    const std::size_t r = rows[c];
    auto q = ts.query(r);
    auto d = ts.dists(r);
    auto l = ts.label(r);
    for (std::size_t j = 0; j < ts.dim; ++j) batch.queries(j, c) = q[j];
    for (std::size_t j = 0; j < ts.num_partitions; ++j) {
      batch.dists(j, c) = d[j];
      batch.labels(j, c) = l[j];
    }
  }
  return batch;
}

class Adam {
 public:
  Adam(ProbingParams<float>& params, const TrainConfig& cfg)
      : cfg_(cfg), m_(params.zeros_like()), v_(params.zeros_like()) {}

  void step(ProbingParams<float>& params, ProbingParams<float>& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    const auto lr = static_cast<float>(cfg_.learning_rate);
    const auto b1 = static_cast<float>(cfg_.beta1);
    const auto b2 = static_cast<float>(cfg_.beta2);
    const auto eps = static_cast<float>(cfg_.adam_eps);
    std::vector<float*> ps, gs, ms, vs;
    std::vector<std::size_t> sizes;
    params.for_each_tensor([&](float* p, std::size_t n) {
      ps.push_back(p);
      sizes.push_back(n);
    });
    grads.for_each_tensor([&](float* g, std::size_t) { gs.push_back(g); });
    m_.for_each_tensor([&](float* m, std::size_t) { ms.push_back(m); });
    v_.for_each_tensor([&](float* v, std::size_t) { vs.push_back(v); });
    const auto inv_c1 = static_cast<float>(1.0 / c1);
    const auto inv_c2 = static_cast<float>(1.0 / c2);
    for (std::size_t t = 0; t < ps.size(); ++t) {
      float* p = ps[t];
      const float* g = gs[t];
      float* m = ms[t];
      float* v = vs[t];
      for (std::size_t i = 0; i < sizes[t]; ++i) {
        m[i] = b1 * m[i] + (1.0f - b1) * g[i];
        v[i] = b2 * v[i] + (1.0f - b2) * g[i] * g[i];
        const float mhat = m[i] * inv_c1;
        const float vhat = v[i] * inv_c2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
      }
    }
  }

 private:
  TrainConfig cfg_;
  ProbingParams<float> m_, v_;
  std::uint64_t t_ = 0;
};

void zero(ProbingParams<float>& g) {
  g.for_each_tensor([](float* p, std::size_t n) { std::fill_n(p, n, 0.0f); });
}

}  // namespace

void fit_normalization(ProbingModel& model, const TrainingSet& ts) {
  LIRA_REQUIRE(ts.size() > 0, "empty training set");
  LIRA_REQUIRE(ts.dim == model.dim() &&
                   ts.num_partitions == model.num_partitions(),
               "training set does not match the model shape");
  model.set_normalization(fit_columns(ts.queries, ts.dim, ts.size()),
                          fit_columns(ts.centroid_dists, ts.num_partitions,
                                      ts.size()));
}

ProbeMetrics evaluate_probing(const ProbingModel& model, const TrainingSet& ts,
                              double sigma) {
  LIRA_REQUIRE(ts.size() > 0, "empty evaluation set");
  const auto threshold = static_cast<float>(sigma);
  ProbeMetrics m;
  const std::size_t b = ts.num_partitions;
  constexpr std::size_t kChunk = 2048;
  std::vector<std::size_t> rows;
  for (std::size_t start = 0; start < ts.size(); start += kChunk) {
    const std::size_t end = std::min(ts.size(), start + kChunk);
    rows.resize(end - start);
    std::iota(rows.begin(), rows.end(), start);
    Batch batch = load_batch(ts, rows);
    const nn::Matrix<float> probs =
        model.forward_batch(batch.queries, batch.dists);
    for (Eigen::Index c = 0; c < probs.cols(); ++c) {
      const std::size_t r = rows[c];
      const float* p = probs.data() + c * b;
      auto label = ts.label(r);
      auto count = ts.count(r);
      m.loss += bce_loss<float>(label, {p, b});

      std::size_t probed = 0, hits = 0, positives = 0;
      std::uint64_t covered = 0, total = 0;
      for (std::size_t j = 0; j < b; ++j) {
        positives += label[j];
        total += count[j];
        if (p[j] >= threshold) {
          ++probed;
          hits += label[j];
          covered += count[j];
        }
      }
      if (probed == 0) {
        const std::size_t top =
            static_cast<std::size_t>(std::max_element(p, p + b) - p);
        probed = 1;
        hits = label[top];
        covered = count[top];
      }
      m.mean_nprobe += static_cast<double>(probed);
      m.hit_rate += static_cast<double>(hits) / static_cast<double>(probed);
      if (positives > 0) {
        m.label_recall +=
            static_cast<double>(hits) / static_cast<double>(positives);
      }
      if (total > 0) {
        m.recall += static_cast<double>(covered) / static_cast<double>(total);
      }
    }
  }
  const auto n = static_cast<double>(ts.size());
  m.loss /= n;
  m.recall /= n;
  m.label_recall /= n;
  m.mean_nprobe /= n;
  m.hit_rate /= n;
  return m;
}

TrainResult train(ProbingModel& model, const TrainingSet& ts,
                  const TrainConfig& config) {
  LIRA_REQUIRE(ts.size() > 0, "empty training set");
  LIRA_REQUIRE(config.batch_size >= 1, "batch size must be positive");
  LIRA_REQUIRE(config.learning_rate > 0.0, "learning rate must be positive");
  LIRA_REQUIRE(config.sigma > 0.0 && config.sigma < 1.0,
               "sigma must lie in (0, 1)");
  LIRA_REQUIRE(ts.dim == model.dim() &&
                   ts.num_partitions == model.num_partitions(),
               "training set does not match the model shape");
  if (config.fit_normalization) fit_normalization(model, ts);

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(ts.size());
  std::iota(order.begin(), order.end(), 0);

  TrainingSet monitor;
  if (config.log_every > 0) {
    std::vector<std::size_t> pick = order;
    std::mt19937_64 monitor_rng(config.seed ^ 0x5bd1e995ULL);
    std::shuffle(pick.begin(), pick.end(), monitor_rng);
    pick.resize(std::min(config.monitor_size, pick.size()));
    std::sort(pick.begin(), pick.end());
    monitor = ts.select(pick);
  }

  TrainResult result;
  auto log_row = [&](std::size_t epoch) {
    if (config.log_every == 0) return;
    TrainLogRow row{result.batches / config.log_every, result.batches, epoch,
                    evaluate_probing(model, monitor, config.sigma)};
    if (!std::isfinite(row.metrics.loss)) {
      throw TrainingDiverged("loss became non-finite after batch " +
                             std::to_string(result.batches));
    }
    result.log.push_back(row);
  };

  Adam adam(model.params(), config);
  ProbingParams<float> grads = model.params().zeros_like();
  log_row(0);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      Batch batch = load_batch(
          ts, std::span<const std::size_t>(order).subspan(start, end - start));
      zero(grads);
      const double loss = model.loss_and_gradients(batch.queries, batch.dists,
                                                   batch.labels, &grads);
      if (!std::isfinite(loss)) {
        throw TrainingDiverged("batch loss is non-finite at epoch " +
                               std::to_string(epoch) + ", batch " +
                               std::to_string(result.batches));
      }
      adam.step(model.params(), grads);
      ++result.batches;
      if (config.log_every > 0 && result.batches % config.log_every == 0) {
        log_row(epoch + (end == order.size() ? 1 : 0));
      }
    }
  }
  if (config.log_every > 0 && result.batches % config.log_every != 0) {
    log_row(config.epochs);
  }
  return result;
}

}  // namespace lira
