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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lira/dataset.hpp"
#include "lira/model.hpp"
#include "lira/partition.hpp"

namespace lira {

enum class PlanStrategy {
  kLiraSigma,  // probabilities above a threshold
  kLiraTopN,   // top-n probabilities
  kIvf,        // n nearest centroids, hard layout
  kFuzzy,      // n nearest centroids, fuzzy2 layout
};

std::string_view strategy_name(PlanStrategy s);

/// Partitions to probe for one query, in probing order.
struct QueryPlan {
  std::vector<PartitionId> partitions;
  std::vector<float> scores;  // model probabilities, empty for IVF plans
  PlanStrategy strategy = PlanStrategy::kIvf;
  double knob = 0.0;          // sigma or nprobe
};

/// {b : probs_b > sigma} by descending probability; the argmax partition
/// alone when nothing clears sigma.
QueryPlan plan_lira_from_probs(std::span<const float> probs, double sigma);
/// Top `nprobe` partitions by probability.
QueryPlan plan_lira_topn_from_probs(std::span<const float> probs,
                                    std::size_t nprobe);
/// `nprobe` nearest centroids from precomputed centroid distances.
QueryPlan plan_ivf_from_dists(std::span<const float> centroid_dists,
                              std::size_t nprobe,
                              PlanStrategy strategy = PlanStrategy::kIvf);

QueryPlan plan_lira(const ProbingModel& model, std::span<const float> query,
                    const PartitionLayout& layout, double sigma);
QueryPlan plan_lira_topn(const ProbingModel& model,
                         std::span<const float> query,
                         const PartitionLayout& layout, std::size_t nprobe);
QueryPlan plan_ivf(std::span<const float> query, const PartitionLayout& layout,
                   std::size_t nprobe);

struct QueryMetrics {
  double recall_at_k = 0.0;  // filled by callers that hold ground truth
  std::size_t cmp = 0;       // stored entries visited, replicas included
  std::size_t nprobe = 0;
};

/// Keeps the k best distinct ids seen so far.
class CandidateSink {
 public:
  explicit CandidateSink(std::size_t k) : k_(k) { heap_.reserve(k + 1); }

  /// Threshold below which a candidate can enter, +inf while not full.
  float worst() const;
  void offer(float dist, PointId id);
  KnnResult finish();

 private:
  std::size_t k_;
  std::vector<std::pair<float, PointId>> heap_;
};

/// Per-partition search. The only implementation scans every member.
class InternalIndex {
 public:
  virtual ~InternalIndex() = default;
  /// Offers (distance, id) of candidates in `partition` to `sink`; returns
  /// the number of stored entries visited.
  virtual std::size_t search_partition(PartitionId partition,
                                       std::span<const float> query,
                                       std::size_t k,
                                       CandidateSink& sink) const = 0;
};

class ExhaustiveScan final : public InternalIndex {
 public:
  ExhaustiveScan(const PartitionLayout& layout, const Dataset& dataset);
  std::size_t search_partition(PartitionId partition,
                               std::span<const float> query, std::size_t k,
                               CandidateSink& sink) const override;

 private:
  const PartitionLayout& layout_;
  const Dataset& dataset_;
};

struct SearchResult {
  KnnResult knn;
  QueryMetrics metrics;
};

/// Probes the plan's partitions through `index`, deduplicates by id and
/// returns the k nearest candidates.
SearchResult search(const InternalIndex& index, const QueryPlan& plan,
                    std::span<const float> query, std::size_t k);
/// search() with an ExhaustiveScan over (layout, dataset).
SearchResult search(const PartitionLayout& layout, const Dataset& dataset,
                    const QueryPlan& plan, std::span<const float> query,
                    std::size_t k);

/// |ids(result) ∩ first k ids(gt)| / k. Throws if gt holds fewer than k.
double recall_at_k(const KnnResult& result, const KnnResult& gt, std::size_t k);

}  // namespace lira
