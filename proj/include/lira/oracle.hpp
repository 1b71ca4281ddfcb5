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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lira/dataset.hpp"
#include "lira/partition.hpp"
#include "lira/vecs_io.hpp"

namespace lira {

/// Exact k nearest neighbors by full scan, ordered by (distance, id).
/// `exclude` drops one id from consideration (self-match removal).
KnnResult brute_force_knn(const Dataset& dataset, std::span<const float> query,
                          std::size_t k,
                          std::optional<PointId> exclude = std::nullopt);

/// brute_force_knn for every row of `queries`. Memory stays O(q * k).
std::vector<KnnResult> brute_force_knn_batch(const Dataset& dataset,
                                             const Dataset& queries,
                                             std::size_t k);

/// kNN of every point in `ids` among the points in `ids` (itself
/// excluded). Returned ids are global dataset ids.
std::vector<KnnResult> subset_self_knn(const Dataset& dataset,
                                       std::span<const PointId> ids,
                                       std::size_t k);

/// Per-partition count of a query's true kNN over a hard layout.
struct KnnCountDistribution {
  std::vector<std::uint32_t> counts;
  std::size_t k = 0;

  std::size_t num_partitions() const { return counts.size(); }
};

/// Binary mask of partitions holding at least one true kNN.
struct ProbingLabel {
  std::vector<std::uint8_t> mask;
};

KnnCountDistribution knn_count_distribution(const PartitionLayout& layout,
                                            std::span<const PointId> knn_ids);

ProbingLabel probing_label(const KnnCountDistribution& dist);

/// Number of kNN partitions: the fewest partitions covering all kNN.
std::size_t optimal_nprobe(const ProbingLabel& label);

/// 1-based rank, in `centroid_order`, of the worst-ranked kNN partition.
std::size_t distance_rank_nprobe(const KnnCountDistribution& dist,
                                 std::span<const PartitionId> centroid_order);

struct LongTailStats {
  std::uint32_t min_nonzero = 0;
  std::vector<PartitionId> long_tail_partitions;  // ascending ids
};

/// Partitions holding exactly one kNN, and the smallest nonzero count.
/// Throws on an all-zero distribution.
LongTailStats long_tail_stats(const KnnCountDistribution& dist);

/// Ground truth as written to disk: ids (ivecs) plus distances (fvecs).
struct GroundTruth {
  std::vector<KnnResult> results;

  IntMatrix id_matrix() const;
  Dataset distance_matrix() const;
  static GroundTruth from_matrices(const IntMatrix& ids, const Dataset& dists);
};

/// Cache key for ground truth of `queries` against `base` at `k`.
std::uint64_t groundtruth_key(const Dataset& base, const Dataset& queries,
                              std::size_t k);

/// Loads `<dir>/gt_<key>.ivecs` and `.fvecs` when present, otherwise
/// computes them with brute_force_knn_batch and writes both files.
/// `cache_hit` reports which path was taken.
GroundTruth load_or_compute_groundtruth(const Dataset& base,
                                        const Dataset& queries, std::size_t k,
                                        const std::string& dir,
                                        bool* cache_hit = nullptr);

}  // namespace lira
