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


#include "lira/redundancy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace lira {

std::size_t redundancy_pick_count(double eta, std::size_t n) {
  LIRA_REQUIRE(eta > 0.0 && eta <= 100.0,
               "eta must lie in (0, 100], got " + std::to_string(eta));
  const auto count =
      static_cast<std::size_t>(std::floor(eta / 100.0 * static_cast<double>(n)));
  return std::clamp<std::size_t>(count, 1, n);
}

std::vector<float> predict_all(const ProbingModel& model, const Dataset& dataset,
                               const PartitionLayout& layout) {
  LIRA_REQUIRE(model.dim() == dataset.dim(), "model dimension mismatch");
  LIRA_REQUIRE(model.num_partitions() == layout.num_partitions(),
               "model output width differs from B");
  const std::size_t n = dataset.size();
  const std::size_t d = dataset.dim();
  const std::size_t b = layout.num_partitions();
  std::vector<float> out(n * b);
  constexpr std::size_t kChunk = 4096;
  const auto chunks = static_cast<std::int64_t>((n + kChunk - 1) / kChunk);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t chunk = 0; chunk < chunks; ++chunk) {
    const std::size_t start = static_cast<std::size_t>(chunk) * kChunk;
    const std::size_t end = std::min(n, start + kChunk);
    const auto cols = static_cast<Eigen::Index>(end - start);
    nn::Matrix<float> q(d, cols), dist(b, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto row = dataset.row(start + c);
      std::copy(row.begin(), row.end(), q.col(c).data());
      const auto cd = centroid_distances(row, layout.centroids(), d);
      std::copy(cd.begin(), cd.end(), dist.col(c).data());
    }
    const nn::Matrix<float> p = model.forward_batch(q, dist);
    std::copy(p.data(), p.data() + p.size(), out.begin() + start * b);
  }
  return out;
}

std::vector<PointId> pick_candidates(std::span<const float> probs,
                                     std::size_t num_partitions, double eta,
                                     double sigma) {
  LIRA_REQUIRE(num_partitions >= 1 && probs.size() % num_partitions == 0,
               "probability matrix is not n x B");
  const std::size_t n = probs.size() / num_partitions;
  const std::size_t count = redundancy_pick_count(eta, n);
  std::vector<std::size_t> nprobe(n);
  std::vector<double> mass(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = probs.subspan(i * num_partitions, num_partitions);
    nprobe[i] = predicted_nprobe(row, sigma);
    mass[i] = std::accumulate(row.begin(), row.end(), 0.0);
  }
  std::vector<PointId> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  auto better = [&](PointId a, PointId b) {
    if (nprobe[a] != nprobe[b]) return nprobe[a] > nprobe[b];
    if (mass[a] != mass[b]) return mass[a] > mass[b];
    return a < b;
  };
  std::partial_sort(ids.begin(), ids.begin() + count, ids.end(), better);
  ids.resize(count);
  return ids;
}

std::vector<PointId> pick_candidates(const ProbingModel& model,
                                     const Dataset& dataset,
                                     const PartitionLayout& layout,
                                     double eta) {
  redundancy_pick_count(eta, dataset.size());
  const auto probs = predict_all(model, dataset, layout);
  return pick_candidates(probs, layout.num_partitions(), eta,
                         model.shape().sigma_train);
}

std::vector<PartitionId> probability_rank(std::span<const float> probs) {
  std::vector<PartitionId> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](PartitionId a, PartitionId b) {
                     return probs[a] > probs[b];
                   });
  return order;
}

PartitionId choose_replica_partition(std::span<const float> probs,
                                     PartitionId home) {
  LIRA_REQUIRE(probs.size() >= 2, "replica choice needs B >= 2");
  LIRA_REQUIRE(home < probs.size(), "home partition out of range");
  PartitionId first = 0, second = 1;
  if (probs[1] > probs[0]) std::swap(first, second);
  for (PartitionId b = 2; b < probs.size(); ++b) {
    if (probs[b] > probs[first]) {
      second = first;
      first = b;
    } else if (probs[b] > probs[second]) {
      second = b;
    }
  }
  return first != home ? first : second;
}

RedundancyPlan plan_redundancy(const ProbingModel& model, const Dataset& dataset,
                               const PartitionLayout& layout, double eta) {
  LIRA_REQUIRE(layout.kind() == LayoutKind::kHard,
               "redundancy starts from the hard layout");
  LIRA_REQUIRE(layout.num_points() == dataset.size(),
               "layout and dataset disagree in size");
  redundancy_pick_count(eta, dataset.size());
  const std::size_t b = layout.num_partitions();
  const auto probs = predict_all(model, dataset, layout);
  RedundancyPlan plan;
  plan.eta = eta;
  plan.picks = pick_candidates(probs, b, eta, model.shape().sigma_train);
  plan.targets.reserve(plan.picks.size());
  for (PointId id : plan.picks) {
    plan.targets.push_back(choose_replica_partition(
        std::span<const float>(probs).subspan(id * b, b), layout.home(id)));
  }
  return plan;
}

PartitionLayout apply_redundancy(const PartitionLayout& hard,
                                 const RedundancyPlan& plan) {
  LIRA_REQUIRE(hard.kind() == LayoutKind::kHard,
               "redundancy applies to a hard layout");
  LIRA_REQUIRE(plan.picks.size() == plan.targets.size(),
               "plan needs one target per pick");
  std::vector<std::uint8_t> seen(hard.num_points(), 0);
  auto members = hard.all_members();
  for (std::size_t i = 0; i < plan.picks.size(); ++i) {
    const PointId id = plan.picks[i];
    const PartitionId target = plan.targets[i];
    LIRA_REQUIRE(id < hard.num_points(), "pick id out of range");
    LIRA_REQUIRE(target < hard.num_partitions(), "target out of range");
    LIRA_REQUIRE(!seen[id], "point " + std::to_string(id) + " picked twice");
    LIRA_REQUIRE(target != hard.home(id),
                 "replica target equals the home of point " +
                     std::to_string(id));
    seen[id] = 1;
    members[target].push_back(id);
  }
  std::vector<float> centroids(hard.centroids().begin(), hard.centroids().end());
  std::vector<PartitionId> homes(hard.homes().begin(), hard.homes().end());
  return PartitionLayout(LayoutKind::kRedundant, hard.dim(), std::move(centroids),
                         std::move(members), std::move(homes));
}

ReplicaTruth replica_partitions(const PartitionLayout& hard,
                                std::span<const KnnResult> knn_lists) {
  LIRA_REQUIRE(hard.kind() == LayoutKind::kHard,
               "replica partitions are defined over the hard layout");
  const std::size_t b = hard.num_partitions();
  std::map<PointId, std::vector<std::uint8_t>> acc;
  std::vector<std::uint32_t> counts(b);
  for (const auto& knn : knn_lists) {
    std::fill(counts.begin(), counts.end(), 0);
    for (PointId id : knn.ids) ++counts[hard.home(id)];
    for (PointId id : knn.ids) {
      if (counts[hard.home(id)] != 1) continue;
      auto& mask = acc[id];
      mask.resize(b, 0);
      for (PartitionId p = 0; p < b; ++p) {
        if (counts[p] > 1) mask[p] = 1;
      }
    }
  }
  ReplicaTruth truth;
  for (const auto& [id, mask] : acc) {
    truth.points.push_back(id);
    auto& reps = truth.replicas.emplace_back();
    for (PartitionId p = 0; p < b; ++p) {
      if (mask[p]) reps.push_back(p);
    }
  }
  return truth;
}

namespace {

std::vector<float> point_probs(const ProbingModel& model, const Dataset& dataset,
                               const PartitionLayout& layout, PointId id) {
  const auto row = dataset.row(id);
  return model.forward(row, centroid_distances(row, layout.centroids(),
                                               layout.dim()));
}

std::size_t overlap_top_m(std::span<const PartitionId> rank, std::size_t m,
                          std::span<const PartitionId> replicas) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < std::min(m, rank.size()); ++i) {
    hits += std::binary_search(replicas.begin(), replicas.end(), rank[i]) ? 1 : 0;
  }
  return hits;
}

void check_truth(const ReplicaTruth& truth, const Dataset& dataset) {
  LIRA_REQUIRE(truth.points.size() == truth.replicas.size(),
               "replica truth is ragged");
  for (PointId id : truth.points) {
    LIRA_REQUIRE(id < dataset.size(), "long-tail point out of range");
  }
}

}  // namespace

std::vector<CurvePoint> replica_recall_curve(
    const ProbingModel& model, const Dataset& dataset,
    const PartitionLayout& layout, const ReplicaTruth& truth,
    std::span<const std::size_t> m_values, std::uint64_t seed) {
  check_truth(truth, dataset);
  std::mt19937_64 rng(seed);
  std::vector<CurvePoint> curve(m_values.size());
  for (std::size_t i = 0; i < m_values.size(); ++i) curve[i].m = m_values[i];
  std::size_t used = 0;
  std::vector<PartitionId> random_rank(layout.num_partitions());
  for (std::size_t t = 0; t < truth.points.size(); ++t) {
    const auto& reps = truth.replicas[t];
    if (reps.empty()) continue;
    ++used;
    const auto rank = probability_rank(point_probs(model, dataset, layout,
                                                   truth.points[t]));
    std::iota(random_rank.begin(), random_rank.end(), 0);
    std::shuffle(random_rank.begin(), random_rank.end(), rng);
    const auto denom = static_cast<double>(reps.size());
    for (auto& pt : curve) {
      pt.primary += overlap_top_m(rank, pt.m, reps) / denom;
      pt.control += overlap_top_m(random_rank, pt.m, reps) / denom;
    }
  }
  if (used > 0) {
    for (auto& pt : curve) {
      pt.primary /= static_cast<double>(used);
      pt.control /= static_cast<double>(used);
    }
  }
  return curve;
}

std::vector<CurvePoint> hit_rate_curve(const ProbingModel& model,
                                       const Dataset& dataset,
                                       const PartitionLayout& layout,
                                       const ReplicaTruth& truth,
                                       std::span<const std::size_t> m_values) {
  check_truth(truth, dataset);
  std::vector<CurvePoint> curve(m_values.size());
  for (std::size_t i = 0; i < m_values.size(); ++i) curve[i].m = m_values[i];
  std::size_t used = 0;
  for (std::size_t t = 0; t < truth.points.size(); ++t) {
    const auto& reps = truth.replicas[t];
    if (reps.empty()) continue;
    ++used;
    const auto row = dataset.row(truth.points[t]);
    const auto cd = centroid_distances(row, layout.centroids(), layout.dim());
    const auto model_rank = probability_rank(model.forward(row, cd));
    const auto dist_rank = distance_rank(cd);
    for (auto& pt : curve) {
      pt.primary += overlap_top_m(model_rank, pt.m, reps) > 0 ? 1.0 : 0.0;
      pt.control += overlap_top_m(dist_rank, pt.m, reps) > 0 ? 1.0 : 0.0;
    }
  }
  if (used > 0) {
    for (auto& pt : curve) {
      pt.primary /= static_cast<double>(used);
      pt.control /= static_cast<double>(used);
    }
  }
  return curve;
}

}  // namespace lira
