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


#include "lira/retrieval.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "lira/redundancy.hpp"

namespace lira {

std::string_view strategy_name(PlanStrategy s) {
  switch (s) {
    case PlanStrategy::kLiraSigma:
      return "lira";
    case PlanStrategy::kLiraTopN:
      return "lira-topn";
    case PlanStrategy::kIvf:
      return "ivf";
    case PlanStrategy::kFuzzy:
      return "ivf-fuzzy";
  }
  return "unknown";
}

QueryPlan plan_lira_from_probs(std::span<const float> probs, double sigma) {
  LIRA_REQUIRE(!probs.empty(), "empty probability vector");
  LIRA_REQUIRE(sigma > 0.0 && sigma <= 1.0, "sigma must lie in (0, 1]");
  QueryPlan plan;
  plan.strategy = PlanStrategy::kLiraSigma;
  plan.knob = sigma;
  for (PartitionId p : probability_rank(probs)) {
    if (probs[p] > static_cast<float>(sigma)) {
      plan.partitions.push_back(p);
      plan.scores.push_back(probs[p]);
    }
  }
  if (plan.partitions.empty()) {
    const auto top = static_cast<PartitionId>(
        std::max_element(probs.begin(), probs.end()) - probs.begin());
    plan.partitions.push_back(top);
    plan.scores.push_back(probs[top]);
  }
  return plan;
}

QueryPlan plan_lira_topn_from_probs(std::span<const float> probs,
                                    std::size_t nprobe) {
  LIRA_REQUIRE(nprobe >= 1 && nprobe <= probs.size(),
               "nprobe must lie in [1, B]");
  QueryPlan plan;
  plan.strategy = PlanStrategy::kLiraTopN;
  plan.knob = static_cast<double>(nprobe);
  auto rank = probability_rank(probs);
  rank.resize(nprobe);
  for (PartitionId p : rank) plan.scores.push_back(probs[p]);
  plan.partitions = std::move(rank);
  return plan;
}

QueryPlan plan_ivf_from_dists(std::span<const float> centroid_dists,
                              std::size_t nprobe, PlanStrategy strategy) {
  LIRA_REQUIRE(nprobe >= 1 && nprobe <= centroid_dists.size(),
               "nprobe must lie in [1, B]");
  QueryPlan plan;
  plan.strategy = strategy;
  plan.knob = static_cast<double>(nprobe);
  plan.partitions = distance_rank(centroid_dists);
  plan.partitions.resize(nprobe);
  return plan;
}

namespace {

std::vector<float> model_probs(const ProbingModel& model,
                               std::span<const float> query,
                               const PartitionLayout& layout) {
  LIRA_REQUIRE(model.num_partitions() == layout.num_partitions(),
               "model output width differs from B");
  return model.forward(query,
                       centroid_distances(query, layout.centroids(), layout.dim()));
}

}  // namespace

QueryPlan plan_lira(const ProbingModel& model, std::span<const float> query,
                    const PartitionLayout& layout, double sigma) {
  return plan_lira_from_probs(model_probs(model, query, layout), sigma);
}

QueryPlan plan_lira_topn(const ProbingModel& model,
                         std::span<const float> query,
                         const PartitionLayout& layout, std::size_t nprobe) {
  return plan_lira_topn_from_probs(model_probs(model, query, layout), nprobe);
}

QueryPlan plan_ivf(std::span<const float> query, const PartitionLayout& layout,
                   std::size_t nprobe) {
  return plan_ivf_from_dists(
      centroid_distances(query, layout.centroids(), layout.dim()), nprobe,
      layout.kind() == LayoutKind::kFuzzy2 ? PlanStrategy::kFuzzy
                                           : PlanStrategy::kIvf);
}

float CandidateSink::worst() const {
  return heap_.size() < k_ ? std::numeric_limits<float>::infinity()
                           : heap_.front().first;
}

void CandidateSink::offer(float dist, PointId id) {
  const std::pair<float, PointId> c{dist, id};
  if (heap_.size() == k_ && !(c < heap_.front())) return;
  // A replica visited twice yields the identical pair; keep one copy.
  if (std::find(heap_.begin(), heap_.end(), c) != heap_.end()) return;
  if (heap_.size() < k_) {
    heap_.push_back(c);
    std::push_heap(heap_.begin(), heap_.end());
  } else {
    std::pop_heap(heap_.begin(), heap_.end());
    heap_.back() = c;
    std::push_heap(heap_.begin(), heap_.end());
  }
}

KnnResult CandidateSink::finish() {
  std::sort_heap(heap_.begin(), heap_.end());
  KnnResult out;
  for (const auto& [dist, id] : heap_) {
    out.ids.push_back(id);
    out.dists.push_back(dist);
  }
  heap_.clear();
  return out;
}

ExhaustiveScan::ExhaustiveScan(const PartitionLayout& layout,
                               const Dataset& dataset)
    : layout_(layout), dataset_(dataset) {
  LIRA_REQUIRE(layout.num_points() == dataset.size(),
               "layout indexes " + std::to_string(layout.num_points()) +
                   " points, dataset holds " + std::to_string(dataset.size()));
  LIRA_REQUIRE(layout.dim() == dataset.dim(), "layout dimension mismatch");
}

std::size_t ExhaustiveScan::search_partition(PartitionId partition,
                                             std::span<const float> query,
                                             std::size_t /*k*/,
                                             CandidateSink& sink) const {
  const auto members = layout_.members(partition);
  const std::size_t d = dataset_.dim();
  for (PointId id : members) {
    sink.offer(l2_sq_unchecked(query.data(), dataset_.row_ptr(id), d), id);
  }
  return members.size();
}

SearchResult search(const InternalIndex& index, const QueryPlan& plan,
                    std::span<const float> query, std::size_t k) {
  LIRA_REQUIRE(k >= 1, "k must be positive");
  LIRA_REQUIRE(!plan.partitions.empty(), "empty query plan");
  SearchResult out;
  CandidateSink sink(k);
  for (PartitionId p : plan.partitions) {
    out.metrics.cmp += index.search_partition(p, query, k, sink);
  }
  out.metrics.nprobe = plan.partitions.size();
  out.knn = sink.finish();
  return out;
}

SearchResult search(const PartitionLayout& layout, const Dataset& dataset,
                    const QueryPlan& plan, std::span<const float> query,
                    std::size_t k) {
  LIRA_REQUIRE(query.size() == dataset.dim(), "query dimension mismatch");
  std::vector<std::uint8_t> seen(layout.num_partitions(), 0);
  for (PartitionId p : plan.partitions) {
    LIRA_REQUIRE(p < layout.num_partitions(), "plan names an unknown partition");
    LIRA_REQUIRE(!seen[p], "plan probes partition " + std::to_string(p) +
                               " twice");
    seen[p] = 1;
  }
  return search(ExhaustiveScan(layout, dataset), plan, query, k);
}

double recall_at_k(const KnnResult& result, const KnnResult& gt,
                   std::size_t k) {
  LIRA_REQUIRE(k >= 1, "k must be positive");
  LIRA_REQUIRE(gt.size() >= k, "ground truth holds " +
                                   std::to_string(gt.size()) +
                                   " ids, fewer than k = " + std::to_string(k));
  std::vector<PointId> truth(gt.ids.begin(), gt.ids.begin() + k);
  std::sort(truth.begin(), truth.end());
  std::size_t hits = 0;
  std::vector<PointId> got = result.ids;
  std::sort(got.begin(), got.end());
  got.erase(std::unique(got.begin(), got.end()), got.end());
  for (PointId id : got) {
    hits += std::binary_search(truth.begin(), truth.end(), id) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(k);
}

}  // namespace lira
