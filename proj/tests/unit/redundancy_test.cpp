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


#include <numeric>

#include <gtest/gtest.h>

#include "lira/oracle.hpp"
#include "lira/redundancy.hpp"
#include "test_support.hpp"

namespace lira {
namespace {

TEST(Redundancy, PickCount) {
  EXPECT_EQ(redundancy_pick_count(3.0, 100000), 3000u);
  EXPECT_EQ(redundancy_pick_count(3.0, 10), 1u);
  EXPECT_EQ(redundancy_pick_count(2.5, 999), 24u);
  EXPECT_EQ(redundancy_pick_count(100.0, 7), 7u);
  EXPECT_THROW(redundancy_pick_count(0.0, 10), InvalidArgument);
  EXPECT_THROW(redundancy_pick_count(101.0, 10), InvalidArgument);
}

TEST(Redundancy, PickRankingAndTies) {
  // Five points, B = 3, sigma 0.5. Predicted nprobe: 2, 1, 2, 3, 2.
  const std::vector<float> probs = {
      0.6f, 0.6f, 0.1f,   // 0: nprobe 2, mass 1.3
      0.9f, 0.1f, 0.1f,   // 1: nprobe 1
      0.7f, 0.5f, 0.1f,   // 2: nprobe 2, mass 1.3
      0.5f, 0.5f, 0.5f,   // 3: nprobe 3
      0.9f, 0.9f, 0.0f};  // 4: nprobe 2, mass 1.8
  EXPECT_EQ(pick_candidates(probs, 3, 20.0), (std::vector<PointId>{3}));
  EXPECT_EQ(pick_candidates(probs, 3, 80.0),
            (std::vector<PointId>{3, 4, 0, 2}));
  EXPECT_EQ(pick_candidates(probs, 3, 100.0),
            (std::vector<PointId>{3, 4, 0, 2, 1}));
  EXPECT_THROW(pick_candidates(std::span<const float>(probs).first(14), 3, 20.0),
               InvalidArgument);
}

TEST(Redundancy, ReplicaTarget) {
  const float p[] = {0.2f, 0.9f, 0.9f, 0.5f};
  EXPECT_EQ(choose_replica_partition(p, 0), 1u);
  EXPECT_EQ(choose_replica_partition(p, 1), 2u);
  EXPECT_EQ(choose_replica_partition(p, 2), 1u);
  const float q[] = {0.1f, 0.3f, 0.8f};
  EXPECT_EQ(choose_replica_partition(q, 2), 1u);
  const float one[] = {1.0f};
  EXPECT_THROW(choose_replica_partition(one, 0), InvalidArgument);
}

TEST(Redundancy, ApplyStoresExtraEntries) {
  const Dataset data = testing::random_dataset(1000, 3, 5);
  const auto hard = assign_hard(data, kmeans(data, 10, {10, 1}).centroids);
  RedundancyPlan plan;
  plan.eta = 3.0;
  for (PointId id = 0; id < 30; ++id) {
    plan.picks.push_back(id * 7);
    plan.targets.push_back((hard.home(id * 7) + 1) % 10);
  }
  const auto red = apply_redundancy(hard, plan);
  EXPECT_EQ(red.kind(), LayoutKind::kRedundant);
  EXPECT_EQ(red.total_entries(), 1030u);
  for (std::size_t i = 0; i < plan.picks.size(); ++i) {
    const auto m = red.members(plan.targets[i]);
    EXPECT_NE(std::find(m.begin(), m.end(), plan.picks[i]), m.end());
    EXPECT_EQ(red.home(plan.picks[i]), hard.home(plan.picks[i]));
  }
  // Home lists keep their original contents and order.
  for (PartitionId p = 0; p < 10; ++p) {
    const auto h = hard.members(p);
    const auto r = red.members(p);
    EXPECT_TRUE(std::equal(h.begin(), h.end(), r.begin()));
  }

  RedundancyPlan dup = plan;
  dup.picks[1] = dup.picks[0];
  dup.targets[1] = dup.targets[0];
  EXPECT_THROW(apply_redundancy(hard, dup), InvalidArgument);
  RedundancyPlan home = plan;
  home.targets[0] = hard.home(home.picks[0]);
  EXPECT_THROW(apply_redundancy(hard, home), InvalidArgument);
}

TEST(Redundancy, PlanTargetsNeverHome) {
  const Dataset data = testing::random_dataset(2000, 4, 9);
  const auto hard = assign_hard(data, kmeans(data, 8, {10, 1}).centroids);
  ModelShape shape;
  shape.dim = 4;
  shape.num_partitions = 8;
  const auto model = ProbingModel::init(shape, 4);
  const auto plan = plan_redundancy(model, data, hard, 3.0);
  EXPECT_EQ(plan.picks.size(), 60u);
  for (std::size_t i = 0; i < plan.picks.size(); ++i) {
    EXPECT_NE(plan.targets[i], hard.home(plan.picks[i]));
  }
  EXPECT_EQ(apply_redundancy(hard, plan).total_entries(), 2060u);
  EXPECT_EQ(plan, plan_redundancy(model, data, hard, 3.0));
}

TEST(Redundancy, PredictAllMatchesSingleForward) {
  const Dataset data = testing::random_dataset(300, 4, 12);
  const auto hard = assign_hard(data, kmeans(data, 5, {10, 1}).centroids);
  ModelShape shape;
  shape.dim = 4;
  shape.num_partitions = 5;
  const auto model = ProbingModel::init(shape, 2);
  const auto all = predict_all(model, data, hard);
  for (std::size_t i = 0; i < 300; i += 13) {
    const auto p = model.forward(
        data.row(i), centroid_distances(data.row(i), hard.centroids(), 4));
    // Batched and single-column products round differently.
    for (std::size_t b = 0; b < 5; ++b) EXPECT_NEAR(all[i * 5 + b], p[b], 1e-5);
  }
}

TEST(ReplicaTruth, HandFixture) {
  // Partitions: 0 = {0,1,2}, 1 = {3,4}, 2 = {5}, 3 = {6}.
  const PartitionLayout hard(LayoutKind::kHard, 1, {0, 1, 2, 3},
                             {{0, 1, 2}, {3, 4}, {5}, {6}},
                             {0, 0, 0, 1, 1, 2, 3});
  // Query A: kNN {0,1,3,4,5} -> point 5 is long-tail, replicas {0,1}.
  // Query B: kNN {0,6,5,1}  -> points 5 and 6 long-tail, replicas {0}.
  std::vector<KnnResult> lists(2);
  lists[0].ids = {0, 1, 3, 4, 5};
  lists[1].ids = {0, 6, 5, 1};
  const auto truth = replica_partitions(hard, lists);
  EXPECT_EQ(truth.points, (std::vector<PointId>{5, 6}));
  EXPECT_EQ(truth.replicas[0], (std::vector<PartitionId>{0, 1}));
  EXPECT_EQ(truth.replicas[1], (std::vector<PartitionId>{0}));
}

TEST(ReplicaTruth, CurvesAreBoundedAndMonotone) {
  const Dataset data = gen_synthetic({1500, 6, 12, 0.08f, 3});
  const auto hard = assign_hard(data, kmeans(data, 12, {10, 1}).centroids);
  std::vector<PointId> ids(1500);
  std::iota(ids.begin(), ids.end(), 0);
  const auto truth = replica_partitions(hard, subset_self_knn(data, ids, 20));
  ASSERT_FALSE(truth.points.empty());
  ModelShape shape;
  shape.dim = 6;
  shape.num_partitions = 12;
  const auto model = ProbingModel::init(shape, 4);
  const std::size_t ms[] = {1, 2, 4, 8, 12};
  const auto hit = hit_rate_curve(model, data, hard, truth, ms);
  const auto rec = replica_recall_curve(model, data, hard, truth, ms, 5);
  for (std::size_t i = 0; i < 5; ++i) {
    for (double v : {hit[i].primary, hit[i].control, rec[i].primary, rec[i].control}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    if (i > 0) {
      EXPECT_GE(hit[i].primary, hit[i - 1].primary);
      EXPECT_GE(hit[i].control, hit[i - 1].control);
      EXPECT_GE(rec[i].primary, rec[i - 1].primary);
    }
  }
  // Every partition ranked: every replica is covered.
  EXPECT_DOUBLE_EQ(hit[4].primary, 1.0);
  EXPECT_DOUBLE_EQ(rec[4].primary, 1.0);
  EXPECT_DOUBLE_EQ(rec[4].control, 1.0);
}

TEST(ProbabilityRank, TiesToLowerId) {
  const float p[] = {0.2f, 0.7f, 0.2f, 0.7f};
  EXPECT_EQ(probability_rank(p), (std::vector<PartitionId>{1, 3, 0, 2}));
}

}  // namespace
}  // namespace lira
