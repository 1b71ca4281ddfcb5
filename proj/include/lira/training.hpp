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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lira/dataset.hpp"
#include "lira/model.hpp"
#include "lira/partition.hpp"

namespace lira {

/// Model inputs and targets for a set of training points. Row i describes
/// dataset point ids[i] used as a query against the other training points.
struct TrainingSet {
  std::size_t dim = 0;
  std::size_t num_partitions = 0;
  std::size_t k = 0;
  std::vector<PointId> ids;
  std::vector<float> queries;         // n x d
  std::vector<float> centroid_dists;  // n x B
  std::vector<std::uint8_t> labels;   // n x B probing labels
  std::vector<std::uint32_t> counts;  // n x B kNN count distributions

  std::size_t size() const { return ids.size(); }
  std::span<const float> query(std::size_t i) const {
    return {queries.data() + i * dim, dim};
  }
  std::span<const float> dists(std::size_t i) const {
    return {centroid_dists.data() + i * num_partitions, num_partitions};
  }
  std::span<const std::uint8_t> label(std::size_t i) const {
    return {labels.data() + i * num_partitions, num_partitions};
  }
  std::span<const std::uint32_t> count(std::size_t i) const {
    return {counts.data() + i * num_partitions, num_partitions};
  }

  /// Rows `rows` of this set, in order.
  TrainingSet select(std::span<const std::size_t> rows) const;
};

/// Labels every training point with the kNN partitions of its k nearest
/// neighbors among the other training points. Throws if k >= |train_ids|.
TrainingSet build_training_set(const Dataset& dataset,
                               std::span<const PointId> train_ids,
                               const PartitionLayout& layout, std::size_t k);

/// Same, with the neighbor lists supplied (knn[i] belongs to train_ids[i]).
TrainingSet build_training_set_from_knn(const Dataset& dataset,
                                        std::span<const PointId> train_ids,
                                        const PartitionLayout& layout,
                                        std::span<const KnnResult> knn);

/// Per-feature mean and standard deviation of the training inputs. Features
/// with (near-)zero spread keep a unit divisor.
void fit_normalization(ProbingModel& model, const TrainingSet& ts);

struct TrainConfig {
  std::size_t batch_size = 512;
  std::size_t epochs = 10;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 7;
  double sigma = 0.5;
  /// Log every this many batches; 0 disables logging.
  std::size_t log_every = 10;
  /// Examples sampled (seeded) from the training set for logged metrics.
  std::size_t monitor_size = 1000;
  bool fit_normalization = true;
};

/// Probing quality at threshold sigma over a set of labelled examples.
struct ProbeMetrics {
  double loss = 0.0;         // mean BCE
  double recall = 0.0;       // mean fraction of kNN inside probed partitions
  double label_recall = 0.0; // mean fraction of kNN partitions probed
  double mean_nprobe = 0.0;  // mean probed partitions
  double hit_rate = 0.0;     // mean fraction of probed partitions that hold kNN
};

/// Probed set is {b : p_b >= sigma}, or the argmax partition when empty.
ProbeMetrics evaluate_probing(const ProbingModel& model, const TrainingSet& ts,
                              double sigma);

struct TrainLogRow {
  std::size_t step = 0;   // batches / log_every
  std::size_t batch = 0;  // batches completed
  std::size_t epoch = 0;  // epochs completed
  ProbeMetrics metrics;
};

struct TrainResult {
  std::vector<TrainLogRow> log;
  std::size_t batches = 0;
};

/// Raised when the loss stops being finite.
class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

/// Mini-batch Adam on the mean binary cross-entropy. Single-threaded and
/// deterministic for a fixed config.
TrainResult train(ProbingModel& model, const TrainingSet& ts,
                  const TrainConfig& config);

}  // namespace lira
