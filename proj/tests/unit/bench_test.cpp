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


#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "lira/bench.hpp"
#include "lira/oracle.hpp"
#include "test_support.hpp"

namespace lira::bench {
namespace {

struct Setup {
  Dataset data = gen_synthetic({3000, 6, 12, 0.1f, 31});
  Dataset queries = gen_synthetic({80, 6, 12, 0.1f, 32});
  PartitionLayout hard = assign_hard(data, kmeans(data, 12, {10, 3}).centroids);
  std::vector<KnnResult> gt = brute_force_knn_batch(data, queries, 10);
  ProbingModel model = make_model();

  ProbingModel make_model() const {
    std::vector<PointId> ids;
    for (PointId i = 0; i < data.size(); i += 2) ids.push_back(i);
    const auto ts = build_training_set(data, ids, hard, 10);
    ModelShape shape;
    shape.dim = 6;
    shape.num_partitions = 12;
    auto m = ProbingModel::init(shape, 2);
    TrainConfig cfg;
    cfg.batch_size = 64;
    cfg.epochs = 2;
    cfg.log_every = 0;
    train(m, ts, cfg);
    return m;
  }
};

const Setup& setup() {
  static Setup s;
  return s;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

TEST(Grids, Values) {
  EXPECT_EQ(nprobe_grid(3), (std::vector<double>{1, 2, 3}));
  const auto s = sigma_grid();
  ASSERT_EQ(s.size(), 19u);
  EXPECT_DOUBLE_EQ(s.front(), 0.1);
  EXPECT_DOUBLE_EQ(s.back(), 1.0);
  Method lira{"lira", PlanStrategy::kLiraSigma, nullptr, nullptr, {}};
  const auto g = per_query_grid(lira);
  ASSERT_EQ(g.size(), 19u);
  EXPECT_DOUBLE_EQ(g.front(), 0.95);
  EXPECT_DOUBLE_EQ(g.back(), 0.05);
}

TEST(Sweep, MatchesDirectEvaluation) {
  const auto& s = setup();
  const Workload w(s.data, s.queries, s.gt, 10);
  const std::vector<Method> methods = {
      {"ivf", PlanStrategy::kIvf, &s.hard, nullptr, nprobe_grid(12)},
      {"lira", PlanStrategy::kLiraSigma, &s.hard, &s.model, sigma_grid()}};
  const auto records = tradeoff_sweep(methods, w);
  ASSERT_EQ(records.size(), 31u);
  // Sorted by name: ivf first.
  EXPECT_EQ(records.front().method, "ivf");
  EXPECT_EQ(records.back().method, "lira");
  // ivf at nprobe = B is exhaustive.
  EXPECT_DOUBLE_EQ(records[11].mean_recall, 1.0);
  EXPECT_DOUBLE_EQ(records[11].mean_cmp, 3000.0);
  // Spot-check one cell against plain search calls.
  const auto& cell = records[12 + 8];  // lira sigma 0.5
  ASSERT_DOUBLE_EQ(cell.knob, 0.5);
  double recall = 0.0, cmp = 0.0;
  for (std::size_t q = 0; q < s.queries.size(); ++q) {
    const auto r = search(s.hard, s.data,
                          plan_lira(s.model, s.queries.row(q), s.hard, 0.5),
                          s.queries.row(q), 10);
    recall += recall_at_k(r.knn, s.gt[q], 10);
    cmp += r.metrics.cmp;
  }
  EXPECT_NEAR(cell.mean_recall, recall / 80, 1e-12);
  EXPECT_NEAR(cell.mean_cmp, cmp / 80, 1e-9);

  const auto best = min_cmp_at_recall(records, "ivf", 0.9);
  ASSERT_TRUE(best);
  for (const auto& r : records) {
    if (r.method == "ivf" && r.mean_recall >= 0.9) EXPECT_GE(r.mean_cmp, best->mean_cmp);
  }
  EXPECT_FALSE(min_cmp_at_recall(records, "ivf", 1.01));
  EXPECT_FALSE(min_cmp_at_recall(records, "nope", 0.1));
}

TEST(Sweep, RejectsModelFreeLira) {
  const auto& s = setup();
  const Workload w(s.data, s.queries, s.gt, 10);
  const std::vector<Method> bad = {
      {"lira", PlanStrategy::kLiraSigma, &s.hard, nullptr, sigma_grid()}};
  EXPECT_THROW(tradeoff_sweep(bad, w), InvalidArgument);
  EXPECT_THROW(Workload(s.data, s.queries, s.gt, 11), InvalidArgument);
}

TEST(ProbingWaste, MatchesOracle) {
  const auto& s = setup();
  const auto report = probing_waste_report(s.queries, s.gt, s.hard, 10);
  ASSERT_EQ(report.rows.size(), 80u);
  for (const auto& row : report.rows) {
    const auto dist = knn_count_distribution(s.hard, s.gt[row.query].ids);
    EXPECT_EQ(row.optimal, optimal_nprobe(probing_label(dist)));
    EXPECT_GE(row.distance_rank, row.optimal);
    EXPECT_EQ(row.extra, row.distance_rank - row.optimal);
  }
  ASSERT_EQ(report.cdf_optimal.size(), 12u);
  EXPECT_DOUBLE_EQ(report.cdf_optimal.back(), 1.0);
  EXPECT_DOUBLE_EQ(report.cdf_distance.back(), 1.0);
  for (std::size_t x = 0; x < 12; ++x) {
    EXPECT_GE(report.cdf_optimal[x], report.cdf_distance[x]);
  }
}

TEST(LongTail, HistogramCoversEveryQuery) {
  const auto& s = setup();
  const std::size_t bs[] = {4, 12};
  const auto report = long_tail_report(s.data, s.queries, s.gt, 10, bs, {10, 1});
  ASSERT_EQ(report.histograms.size(), 2u);
  for (const auto& [b, hist] : report.histograms) {
    std::size_t total = 0;
    for (const auto& [count, n] : hist) {
      EXPECT_GE(count, 1u);
      EXPECT_LE(count, 10u);
      total += n;
    }
    EXPECT_EQ(total, 80u);
  }
}

TEST(PerQuery, CheapestKnobReachesTarget) {
  const auto& s = setup();
  const Workload w(s.data, s.queries, s.gt, 10);
  const Method ivf{"ivf", PlanStrategy::kIvf, &s.hard, nullptr, {}};
  const Method lira{"lira", PlanStrategy::kLiraSigma, &s.hard, &s.model, {}};
  const auto cmp = per_query_comparison(ivf, lira, w, 0.9, 25, 3);
  EXPECT_EQ(cmp.rows.size() + cmp.excluded.size(), 80u);
  EXPECT_EQ(cmp.sample.size(), std::min<std::size_t>(25, cmp.rows.size()));
  const PreparedMethod pi(ivf, w);
  for (const auto& row : cmp.rows) {
    EXPECT_GE(pi.run(row.query, row.knob_a).metrics.recall_at_k, 0.9);
    if (row.knob_a > 1) {
      EXPECT_LT(pi.run(row.query, row.knob_a - 1).metrics.recall_at_k, 0.9);
    }
    EXPECT_DOUBLE_EQ(row.cmp_ratio,
                     static_cast<double>(row.cmp_b) / static_cast<double>(row.cmp_a));
  }
  // IVF reaches any target at nprobe = B, so only LIRA can exclude.
  const PreparedMethod pl(lira, w);
  for (std::size_t q : cmp.excluded) {
    EXPECT_LT(pl.run(q, 0.05).metrics.recall_at_k, 0.9);
  }
}

TEST(Csv, HeaderAndRows) {
  const auto dir = testing::scratch_dir("csv");
  {
    CsvWriter csv(dir + "/a.csv", {"x", "y", "series"}, 0xabcULL);
    csv.row(1, 0.5, "ivf");
    csv.row(std::size_t{2}, 0.25f, std::string("lira"));
    EXPECT_THROW(csv.row(1, 2), InvalidArgument);
  }
  const auto lines = read_lines(dir + "/a.csv");
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "# lira-csv v1 config=0000000000000abc");
  EXPECT_EQ(lines[1], "x,y,series");
  EXPECT_EQ(lines[2], "1,0.5,ivf");
  EXPECT_EQ(lines[3], "2,0.25,lira");
  EXPECT_NE(config_hash("a"), config_hash("b"));
}

TEST(Csv, ConvergenceColumns) {
  const auto dir = testing::scratch_dir("csv");
  std::vector<TrainLogRow> log(2);
  log[1].step = 1;
  log[1].batch = 10;
  log[1].metrics = {0.125, 0.75, 0.5, 3.0, 0.25};
  convergence_report(dir + "/c.csv", log, 1);
  const auto lines = read_lines(dir + "/c.csv");
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[1], "step,batch,epoch,loss,recall,mean_nprobe,hit_rate");
  EXPECT_EQ(lines[3], "1,10,0,0.125,0.75,3,0.25");
}

}  // namespace
}  // namespace lira::bench
