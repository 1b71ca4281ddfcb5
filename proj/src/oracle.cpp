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


#include "lira/oracle.hpp"

#include <algorithm>
#include <filesystem>
#include <queue>
#include <utility>

#include "lira/binary_io.hpp"

namespace lira {

namespace {

using Candidate = std::pair<float, PointId>;

// Bounded max-heap keeping the k smallest (distance, id) pairs.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) { heap_.reserve(k + 1); }

  void offer(float dist, PointId id) {
    const Candidate c{dist, id};
    if (heap_.size() < k_) {
      heap_.push_back(c);
      std::push_heap(heap_.begin(), heap_.end());
    } else if (c < heap_.front()) {
      std::pop_heap(heap_.begin(), heap_.end());
      heap_.back() = c;
      std::push_heap(heap_.begin(), heap_.end());
    }
  }

  KnnResult finish() {
    std::sort_heap(heap_.begin(), heap_.end());
    KnnResult out;
    out.ids.reserve(heap_.size());
    out.dists.reserve(heap_.size());
    for (const auto& [dist, id] : heap_) {
      out.ids.push_back(id);
      out.dists.push_back(dist);
    }
    return out;
  }

 private:
  std::size_t k_;
  std::vector<Candidate> heap_;
};

}  // namespace

KnnResult brute_force_knn(const Dataset& dataset, std::span<const float> query,
                          std::size_t k, std::optional<PointId> exclude) {
  LIRA_REQUIRE(query.size() == dataset.dim(), "query dimension mismatch");
  const std::size_t available = dataset.size() - (exclude ? 1 : 0);
  LIRA_REQUIRE(k >= 1 && k <= available,
               "k = " + std::to_string(k) + " must be in [1, " +
                   std::to_string(available) + "]");
  TopK top(k);
  const std::size_t d = dataset.dim();
  for (PointId id = 0; id < dataset.size(); ++id) {
    if (exclude && *exclude == id) continue;
    top.offer(l2_sq_unchecked(query.data(), dataset.row_ptr(id), d), id);
  }
  return top.finish();
}

std::vector<KnnResult> brute_force_knn_batch(const Dataset& dataset,
                                             const Dataset& queries,
                                             std::size_t k) {
  LIRA_REQUIRE(queries.dim() == dataset.dim(), "query dimension mismatch");
  LIRA_REQUIRE(k >= 1 && k <= dataset.size(), "k exceeds dataset size");
  std::vector<KnnResult> out(queries.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t q = 0; q < static_cast<std::int64_t>(queries.size());
       ++q) {
    out[q] = brute_force_knn(dataset, queries.row(q), k);
  }
  return out;
}

std::vector<KnnResult> subset_self_knn(const Dataset& dataset,
                                       std::span<const PointId> ids,
                                       std::size_t k) {
  LIRA_REQUIRE(k < ids.size(), "k = " + std::to_string(k) +
                                   " must be smaller than the subset size " +
                                   std::to_string(ids.size()));
  const Dataset subset = gather_rows(dataset, ids);
  std::vector<KnnResult> out(ids.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(ids.size()); ++i) {
    KnnResult local = brute_force_knn(subset, subset.row(i), k,
                                      static_cast<PointId>(i));
    for (PointId& id : local.ids) id = ids[id];
    out[i] = std::move(local);
  }
  return out;
}

KnnCountDistribution knn_count_distribution(const PartitionLayout& layout,
                                            std::span<const PointId> knn_ids) {
  LIRA_REQUIRE(layout.kind() == LayoutKind::kHard,
               "count distributions are defined over a hard layout");
  KnnCountDistribution dist;
  dist.k = knn_ids.size();
  dist.counts.assign(layout.num_partitions(), 0);
  for (PointId id : knn_ids) {
    LIRA_REQUIRE(id < layout.num_points(),
                 "id " + std::to_string(id) + " is not in the layout");
    ++dist.counts[layout.home(id)];
  }
  return dist;
}

ProbingLabel probing_label(const KnnCountDistribution& dist) {
  ProbingLabel label;
  label.mask.resize(dist.counts.size());
  std::transform(dist.counts.begin(), dist.counts.end(), label.mask.begin(),
                 [](std::uint32_t c) { return c > 0 ? 1 : 0; });
  return label;
}

std::size_t optimal_nprobe(const ProbingLabel& label) {
  return static_cast<std::size_t>(
      std::count(label.mask.begin(), label.mask.end(), 1));
}

std::size_t distance_rank_nprobe(const KnnCountDistribution& dist,
                                 std::span<const PartitionId> centroid_order) {
  LIRA_REQUIRE(centroid_order.size() == dist.counts.size(),
               "centroid order must list every partition");
  std::size_t worst = 0;
  for (std::size_t rank = 0; rank < centroid_order.size(); ++rank) {
    const PartitionId p = centroid_order[rank];
    LIRA_REQUIRE(p < dist.counts.size(), "centroid order is not a permutation");
    if (dist.counts[p] > 0) worst = rank + 1;
  }
  return worst;
}

LongTailStats long_tail_stats(const KnnCountDistribution& dist) {
  LongTailStats stats;
  std::uint32_t min_nonzero = 0;
  for (PartitionId p = 0; p < dist.counts.size(); ++p) {
    const std::uint32_t c = dist.counts[p];
    if (c == 0) continue;
    if (min_nonzero == 0 || c < min_nonzero) min_nonzero = c;
    if (c == 1) stats.long_tail_partitions.push_back(p);
  }
  LIRA_REQUIRE(min_nonzero > 0, "distribution has no nonzero count");
  stats.min_nonzero = min_nonzero;
  return stats;
}

IntMatrix GroundTruth::id_matrix() const {
  LIRA_REQUIRE(!results.empty(), "empty ground truth");
  const std::size_t k = results.front().size();
  IntMatrix m{results.size(), k, {}};
  m.data.reserve(results.size() * k);
  for (const auto& r : results) {
    LIRA_REQUIRE(r.size() == k, "ragged ground truth");
    for (PointId id : r.ids) m.data.push_back(static_cast<std::int32_t>(id));
  }
  return m;
}

Dataset GroundTruth::distance_matrix() const {
  LIRA_REQUIRE(!results.empty(), "empty ground truth");
  const std::size_t k = results.front().size();
  std::vector<float> data;
  data.reserve(results.size() * k);
  for (const auto& r : results) {
    data.insert(data.end(), r.dists.begin(), r.dists.end());
  }
  return Dataset(results.size(), k, std::move(data));
}

GroundTruth GroundTruth::from_matrices(const IntMatrix& ids,
                                       const Dataset& dists) {
  LIRA_REQUIRE(ids.n == dists.size() && ids.d == dists.dim(),
               "ground-truth id and distance files disagree in shape");
  GroundTruth gt;
  gt.results.resize(ids.n);
  for (std::size_t q = 0; q < ids.n; ++q) {
    auto& r = gt.results[q];
    for (std::int32_t id : ids.row(q)) {
      LIRA_REQUIRE(id >= 0, "negative id in ground truth");
      r.ids.push_back(static_cast<PointId>(id));
    }
    auto row = dists.row(q);
    r.dists.assign(row.begin(), row.end());
  }
  return gt;
}

std::uint64_t groundtruth_key(const Dataset& base, const Dataset& queries,
                              std::size_t k) {
  Fnv1a64 h;
  h.update_value(base.fingerprint());
  h.update_value(queries.fingerprint());
  h.update_value<std::uint64_t>(k);
  return h.digest();
}

GroundTruth load_or_compute_groundtruth(const Dataset& base,
                                        const Dataset& queries, std::size_t k,
                                        const std::string& dir,
                                        bool* cache_hit) {
  namespace fs = std::filesystem;
  const std::string stem =
      (fs::path(dir) / ("gt_" + hex64(groundtruth_key(base, queries, k))))
          .string();
  const std::string ids_path = stem + ".ivecs";
  const std::string dists_path = stem + ".fvecs";
  if (fs::exists(ids_path) && fs::exists(dists_path)) {
    auto gt = GroundTruth::from_matrices(
        read_ivecs(ids_path), read_vectors(dists_path, VecsFormat::kFvecs));
    if (gt.results.size() == queries.size() &&
        gt.results.front().size() == k) {
      if (cache_hit) *cache_hit = true;
      return gt;
    }
  }
  if (cache_hit) *cache_hit = false;
  GroundTruth gt{brute_force_knn_batch(base, queries, k)};
  fs::create_directories(dir);
  write_ivecs(gt.id_matrix(), ids_path);
  write_vectors(gt.distance_matrix(), dists_path, VecsFormat::kFvecs);
  return gt;
}

}  // namespace lira
