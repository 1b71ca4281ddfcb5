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
#include <string_view>
#include <vector>

#include "lira/dataset.hpp"

namespace lira {

enum class LayoutKind : std::uint32_t { kHard = 0, kFuzzy2 = 1, kRedundant = 2 };

std::string_view layout_kind_name(LayoutKind kind);

/// B centroids plus per-partition member id lists.
///
/// Every point has a home partition (its nearest centroid). A hard layout
/// stores each id only at home; fuzzy2 also stores it in the second-nearest
/// partition; a redundant layout stores picked ids in one extra partition.
/// Centroids never move after construction.
class PartitionLayout {
 public:
  PartitionLayout(LayoutKind kind, std::size_t dim, std::vector<float> centroids,
                  std::vector<std::vector<PointId>> members,
                  std::vector<PartitionId> homes);

  LayoutKind kind() const { return kind_; }
  std::size_t num_partitions() const { return members_.size(); }
  std::size_t dim() const { return dim_; }
  std::size_t num_points() const { return homes_.size(); }

  std::span<const float> centroids() const { return centroids_; }
  std::span<const float> centroid(PartitionId p) const {
    return {centroids_.data() + p * dim_, dim_};
  }
  std::span<const PointId> members(PartitionId p) const { return members_[p]; }
  const std::vector<std::vector<PointId>>& all_members() const {
    return members_;
  }
  PartitionId home(PointId id) const { return homes_[id]; }
  std::span<const PartitionId> homes() const { return homes_; }

  /// Σ |members|, replicas included.
  std::size_t total_entries() const;

  friend bool operator==(const PartitionLayout&,
                         const PartitionLayout&) = default;

 private:
  LayoutKind kind_;
  std::size_t dim_;
  std::vector<float> centroids_;
  std::vector<std::vector<PointId>> members_;
  std::vector<PartitionId> homes_;
};

struct KMeansOptions {
  std::size_t max_iters = 25;
  std::uint64_t seed = 1234;
};

struct KMeansResult {
  std::vector<float> centroids;  // B x d, row-major
  /// Inertia measured after each assignment step, first entry for the
  /// seeding.
  std::vector<double> inertia;
  std::size_t iterations = 0;
  bool converged = false;  // assignment fixpoint reached
};

/// Lloyd's algorithm with k-means++ seeding. Empty clusters are reseeded
/// with the farthest member of the largest cluster. Throws if B > n.
KMeansResult kmeans(const Dataset& dataset, std::size_t num_partitions,
                    const KMeansOptions& options = {});

/// Index of the nearest centroid, ties to the lower index.
PartitionId nearest_centroid(std::span<const float> query,
                             std::span<const float> centroids, std::size_t d);

/// Squared L2 from `query` to every centroid.
std::vector<float> centroid_distances(std::span<const float> query,
                                      std::span<const float> centroids,
                                      std::size_t d);

/// Partition ids sorted by ascending centroid distance, ties to lower id.
std::vector<PartitionId> distance_rank(std::span<const float> centroid_dists);

PartitionLayout assign_hard(const Dataset& dataset,
                            std::vector<float> centroids);

/// Each point goes to its two nearest centroids. Requires B >= 2.
PartitionLayout assign_fuzzy(const Dataset& dataset,
                             std::vector<float> centroids);

}  // namespace lira
