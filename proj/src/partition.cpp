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


#include "lira/partition.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

namespace lira {

std::string_view layout_kind_name(LayoutKind kind) {
  switch (kind) {
    case LayoutKind::kHard:
      return "hard";
    case LayoutKind::kFuzzy2:
      return "fuzzy2";
    case LayoutKind::kRedundant:
      return "redundant";
  }
  return "unknown";
}

PartitionLayout::PartitionLayout(LayoutKind kind, std::size_t dim,
                                 std::vector<float> centroids,
                                 std::vector<std::vector<PointId>> members,
                                 std::vector<PartitionId> homes)
    : kind_(kind),
      dim_(dim),
      centroids_(std::move(centroids)),
      members_(std::move(members)),
      homes_(std::move(homes)) {
  LIRA_REQUIRE(dim_ >= 1, "dimension must be positive");
  LIRA_REQUIRE(!members_.empty(), "layout needs at least one partition");
  LIRA_REQUIRE(centroids_.size() == members_.size() * dim_,
               "centroid block does not match B x d");
  const std::size_t b = members_.size();
  for (PartitionId h : homes_) {
    LIRA_REQUIRE(h < b, "home partition out of range");
  }
  std::vector<std::uint32_t> copies(homes_.size(), 0);
  std::vector<std::uint32_t> at_home(homes_.size(), 0);
  for (PartitionId p = 0; p < b; ++p) {
    for (PointId id : members_[p]) {
      LIRA_REQUIRE(id < homes_.size(), "member id out of range");
      ++copies[id];
      if (homes_[id] == p) ++at_home[id];
    }
  }
  for (PointId id = 0; id < homes_.size(); ++id) {
    LIRA_REQUIRE(at_home[id] == 1, "id " + std::to_string(id) +
                                       " is not stored once in its home");
    const unsigned c = copies[id];
    switch (kind_) {
      case LayoutKind::kHard:
        LIRA_REQUIRE(c == 1, "hard layout stores each id exactly once");
        break;
      case LayoutKind::kFuzzy2:
        LIRA_REQUIRE(c == 2, "fuzzy2 layout stores each id exactly twice");
        break;
      case LayoutKind::kRedundant:
        LIRA_REQUIRE(c == 1 || c == 2,
                     "redundant layout stores each id once or twice");
        break;
    }
  }
}

std::size_t PartitionLayout::total_entries() const {
  std::size_t total = 0;
  for (const auto& m : members_) total += m.size();
  return total;
}

PartitionId nearest_centroid(std::span<const float> query,
                             std::span<const float> centroids, std::size_t d) {
  const std::size_t b = centroids.size() / d;
  PartitionId best = 0;
  float best_dist = std::numeric_limits<float>::infinity();
  for (std::size_t c = 0; c < b; ++c) {
    const float dist = l2_sq_unchecked(query.data(), centroids.data() + c * d, d);
    if (dist < best_dist) {
      best_dist = dist;
      best = static_cast<PartitionId>(c);
    }
  }
  return best;
}

std::vector<float> centroid_distances(std::span<const float> query,
                                      std::span<const float> centroids,
                                      std::size_t d) {
  LIRA_REQUIRE(d >= 1 && query.size() == d,
               "query dimension does not match centroids");
  LIRA_REQUIRE(centroids.size() % d == 0 && !centroids.empty(),
               "centroid block is not a multiple of d");
  const std::size_t b = centroids.size() / d;
  std::vector<float> out(b);
  for (std::size_t c = 0; c < b; ++c) {
    out[c] = l2_sq_unchecked(query.data(), centroids.data() + c * d, d);
  }
  return out;
}

std::vector<PartitionId> distance_rank(std::span<const float> centroid_dists) {
  std::vector<PartitionId> order(centroid_dists.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](PartitionId a, PartitionId b) {
                     return centroid_dists[a] < centroid_dists[b];
                   });
  return order;
}

namespace {

// Per-point nearest centroid and its distance.
void assign_nearest(const Dataset& data, std::span<const float> centroids,
                    std::vector<PartitionId>& labels,
                    std::vector<float>& dists) {
  const std::size_t n = data.size();
  const std::size_t d = data.dim();
  const std::size_t b = centroids.size() / d;
  labels.resize(n);
  dists.resize(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    const float* x = data.row_ptr(static_cast<std::size_t>(i));
    PartitionId best = 0;
    float best_dist = std::numeric_limits<float>::infinity();
    for (std::size_t c = 0; c < b; ++c) {
      const float dist = l2_sq_unchecked(x, centroids.data() + c * d, d);
      if (dist < best_dist) {
        best_dist = dist;
        best = static_cast<PartitionId>(c);
      }
    }
    labels[i] = best;
    dists[i] = best_dist;
  }
}

double sum_inertia(const std::vector<float>& dists) {
  double total = 0.0;
  for (float v : dists) total += v;
  return total;
}

std::vector<float> kmeanspp_seed(const Dataset& data, std::size_t b,
                                 std::mt19937_64& rng) {
  const std::size_t n = data.size();
  const std::size_t d = data.dim();
  std::vector<float> centroids(b * d);
  std::vector<std::uint8_t> chosen(n, 0);
  std::vector<double> closest(n, std::numeric_limits<double>::infinity());

  std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  for (std::size_t c = 0; c < b; ++c) {
    std::size_t pick = first;
    if (c > 0) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += chosen[i] ? 0.0 : closest[i];
      if (total > 0.0) {
        double target =
            std::uniform_real_distribution<double>(0.0, total)(rng);
        pick = n;
        for (std::size_t i = 0; i < n; ++i) {
          if (chosen[i]) continue;
          target -= closest[i];
          if (target < 0.0) {
            pick = i;
            break;
          }
        }
        // Rounding can exhaust the loop; fall back to the last candidate.
        if (pick == n) {
          for (std::size_t i = n; i-- > 0;) {
            if (!chosen[i] && closest[i] > 0.0) {
              pick = i;
              break;
            }
          }
        }
      } else {
        // Every remaining point coincides with a centroid.
        pick = static_cast<std::size_t>(
            std::find(chosen.begin(), chosen.end(), 0) - chosen.begin());
      }
    }
    chosen[pick] = 1;
    std::copy_n(data.row_ptr(pick), d, centroids.begin() + c * d);
    const float* cp = centroids.data() + c * d;
    for (std::size_t i = 0; i < n; ++i) {
      closest[i] = std::min<double>(closest[i],
                                    l2_sq_unchecked(data.row_ptr(i), cp, d));
    }
  }
  return centroids;
}

}  // namespace

KMeansResult kmeans(const Dataset& dataset, std::size_t num_partitions,
                    const KMeansOptions& options) {
  const std::size_t n = dataset.size();
  const std::size_t d = dataset.dim();
  const std::size_t b = num_partitions;
  LIRA_REQUIRE(b >= 1, "need at least one partition");
  LIRA_REQUIRE(b <= n, "B = " + std::to_string(b) + " exceeds n = " +
                           std::to_string(n));

  std::mt19937_64 rng(options.seed);
  KMeansResult result;
  result.centroids = kmeanspp_seed(dataset, b, rng);

  std::vector<PartitionId> labels;
  std::vector<float> dists;
  assign_nearest(dataset, result.centroids, labels, dists);
  result.inertia.push_back(sum_inertia(dists));

  std::vector<double> sums(b * d);
  std::vector<std::size_t> counts(b);
  for (std::size_t iter = 0; iter < options.max_iters; ++iter) {
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const PartitionId c = labels[i];
      ++counts[c];
      const float* x = dataset.row_ptr(i);
      double* s = sums.data() + c * d;
      for (std::size_t j = 0; j < d; ++j) s[j] += x[j];
    }
    for (std::size_t c = 0; c < b; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t j = 0; j < d; ++j) {
        result.centroids[c * d + j] =
            static_cast<float>(sums[c * d + j] / static_cast<double>(counts[c]));
      }
    }
    for (std::size_t c = 0; c < b; ++c) {
      if (counts[c] != 0) continue;
      const std::size_t largest = static_cast<std::size_t>(
          std::max_element(counts.begin(), counts.end()) - counts.begin());
      std::size_t far = n;
      float far_dist = -1.0f;
      const float* lc = result.centroids.data() + largest * d;
      for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != largest) continue;
        const float dist = l2_sq_unchecked(dataset.row_ptr(i), lc, d);
        if (dist > far_dist) {
          far_dist = dist;
          far = i;
        }
      }
      std::copy_n(dataset.row_ptr(far), d, result.centroids.begin() + c * d);
      labels[far] = static_cast<PartitionId>(c);
      --counts[largest];
      counts[c] = 1;
    }

    std::vector<PartitionId> next;
    assign_nearest(dataset, result.centroids, next, dists);
    result.inertia.push_back(sum_inertia(dists));
    result.iterations = iter + 1;
    const bool unchanged = next == labels;
    labels = std::move(next);
    if (unchanged) {
      result.converged = true;
      break;
    }
  }
  return result;
}

PartitionLayout assign_hard(const Dataset& dataset,
                            std::vector<float> centroids) {
  const std::size_t d = dataset.dim();
  LIRA_REQUIRE(!centroids.empty() && centroids.size() % d == 0,
               "centroid block is not a multiple of d");
  const std::size_t b = centroids.size() / d;
  std::vector<PartitionId> homes;
  std::vector<float> dists;
  assign_nearest(dataset, centroids, homes, dists);
  std::vector<std::vector<PointId>> members(b);
  for (PointId id = 0; id < homes.size(); ++id) members[homes[id]].push_back(id);
  return PartitionLayout(LayoutKind::kHard, d, std::move(centroids),
                         std::move(members), std::move(homes));
}

PartitionLayout assign_fuzzy(const Dataset& dataset,
                             std::vector<float> centroids) {
  const std::size_t n = dataset.size();
  const std::size_t d = dataset.dim();
  LIRA_REQUIRE(!centroids.empty() && centroids.size() % d == 0,
               "centroid block is not a multiple of d");
  const std::size_t b = centroids.size() / d;
  LIRA_REQUIRE(b >= 2, "fuzzy assignment needs B >= 2");
  std::vector<PartitionId> first(n), second(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    const float* x = dataset.row_ptr(static_cast<std::size_t>(i));
    float d1 = std::numeric_limits<float>::infinity(), d2 = d1;
    PartitionId c1 = 0, c2 = 0;
    for (std::size_t c = 0; c < b; ++c) {
      const float dist = l2_sq_unchecked(x, centroids.data() + c * d, d);
      if (dist < d1) {
        d2 = d1;
        c2 = c1;
        d1 = dist;
        c1 = static_cast<PartitionId>(c);
      } else if (dist < d2) {
        d2 = dist;
        c2 = static_cast<PartitionId>(c);
      }
    }
    first[i] = c1;
    second[i] = c2;
  }
  std::vector<std::vector<PointId>> members(b);
  for (PointId id = 0; id < n; ++id) members[first[id]].push_back(id);
  for (PointId id = 0; id < n; ++id) members[second[id]].push_back(id);
  return PartitionLayout(LayoutKind::kFuzzy2, d, std::move(centroids),
                         std::move(members), std::move(first));
}

}  // namespace lira
