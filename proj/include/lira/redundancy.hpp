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
#include <vector>

#include "lira/dataset.hpp"
#include "lira/model.hpp"
#include "lira/partition.hpp"

namespace lira {

/// Points to duplicate and where each replica goes.
struct RedundancyPlan {
  std::vector<PointId> picks;
  std::vector<PartitionId> targets;  // one per pick
  double eta = 0.0;                  // percent of N

  friend bool operator==(const RedundancyPlan&, const RedundancyPlan&) = default;
};

/// floor(eta / 100 * n), at least 1. Throws unless eta in (0, 100].
std::size_t redundancy_pick_count(double eta, std::size_t n);

/// Model probabilities for every dataset point queried against the layout
/// centroids, row-major n x B. Batched, so values can differ from
/// ProbingModel::forward in the last float bits.
std::vector<float> predict_all(const ProbingModel& model, const Dataset& dataset,
                               const PartitionLayout& layout);

/// Points ranked by predicted nprobe at the training threshold, then by
/// total probability mass, then by id; returns the top eta percent.
std::vector<PointId> pick_candidates(std::span<const float> probs,
                                     std::size_t num_partitions, double eta,
                                     double sigma = 0.5);
std::vector<PointId> pick_candidates(const ProbingModel& model,
                                     const Dataset& dataset,
                                     const PartitionLayout& layout, double eta);

/// Highest-probability partition unless it is `home`, in which case the
/// second highest. Ties go to the lower index. Requires B >= 2.
PartitionId choose_replica_partition(std::span<const float> probs,
                                     PartitionId home);

/// pick_candidates followed by choose_replica_partition for every pick.
RedundancyPlan plan_redundancy(const ProbingModel& model, const Dataset& dataset,
                               const PartitionLayout& layout, double eta);

/// Appends every pick to its target list. Home lists are untouched.
/// Throws on duplicate picks or a target equal to the pick's home.
PartitionLayout apply_redundancy(const PartitionLayout& hard,
                                 const RedundancyPlan& plan);

// Replica-partition analysis.
//
// A point v is long-tail for a query w when v is among w's kNN and is the
// only kNN of w in v's home partition. The replica partitions of v are the
// partitions holding more than one of w's kNN, accumulated over every such w.

struct ReplicaTruth {
  std::vector<PointId> points;                      // long-tail points
  std::vector<std::vector<PartitionId>> replicas;   // sorted, per point
};

ReplicaTruth replica_partitions(const PartitionLayout& hard,
                                std::span<const KnnResult> knn_lists);

struct CurvePoint {
  std::size_t m = 0;
  double primary = 0.0;  // model rank (or the requested rank source)
  double control = 0.0;  // random ranking or centroid-distance rank
};

/// Mean |top-M by model ∩ replicas| / |replicas| against a seeded random
/// ranking. Points with empty replica sets are skipped.
std::vector<CurvePoint> replica_recall_curve(
    const ProbingModel& model, const Dataset& dataset,
    const PartitionLayout& layout, const ReplicaTruth& truth,
    std::span<const std::size_t> m_values, std::uint64_t seed);

/// Fraction of points whose top-M partitions intersect their replica set,
/// by model output rank (primary) and by centroid distance rank (control).
std::vector<CurvePoint> hit_rate_curve(const ProbingModel& model,
                                       const Dataset& dataset,
                                       const PartitionLayout& layout,
                                       const ReplicaTruth& truth,
                                       std::span<const std::size_t> m_values);

/// Partition ids by descending probability, ties to the lower id.
std::vector<PartitionId> probability_rank(std::span<const float> probs);

}  // namespace lira
