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


#include "lira/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <random>

#include "lira/binary_io.hpp"
#include "lira/oracle.hpp"

namespace lira::bench {

std::vector<double> nprobe_grid(std::size_t num_partitions) {
  std::vector<double> grid(num_partitions);
  std::iota(grid.begin(), grid.end(), 1.0);
  return grid;
}

std::vector<double> sigma_grid() {
  std::vector<double> grid;
  for (int i = 2; i <= 20; ++i) grid.push_back(i / 20.0);
  return grid;
}

Workload::Workload(const Dataset& base, const Dataset& queries,
                   std::span<const KnnResult> gt, std::size_t k)
    : base_(base), queries_(queries), gt_(gt), k_(k) {
  LIRA_REQUIRE(base.dim() == queries.dim(), "query dimension mismatch");
  LIRA_REQUIRE(gt.size() == queries.size(),
               "ground truth covers " + std::to_string(gt.size()) +
                   " queries, workload holds " +
                   std::to_string(queries.size()));
  LIRA_REQUIRE(k >= 1, "k must be positive");
  for (const auto& r : gt) {
    LIRA_REQUIRE(r.size() >= k, "ground truth shorter than k");
  }
}

PreparedMethod::PreparedMethod(const Method& method, const Workload& workload)
    : method_(method), workload_(workload) {
  LIRA_REQUIRE(method.layout != nullptr, "method '" + method.name +
                                             "' has no layout");
  const PartitionLayout& layout = *method.layout;
  LIRA_REQUIRE(layout.num_points() == workload.base().size(),
               "layout does not index the workload base set");
  const bool uses_model = method.strategy == PlanStrategy::kLiraSigma ||
                          method.strategy == PlanStrategy::kLiraTopN;
  LIRA_REQUIRE(!uses_model || method.model != nullptr,
               "method '" + method.name + "' needs a model");
  const Dataset& qs = workload.queries();
  dists_.resize(qs.size());
  if (uses_model) probs_.resize(qs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t q = 0; q < static_cast<std::int64_t>(qs.size()); ++q) {
    dists_[q] = centroid_distances(qs.row(q), layout.centroids(), layout.dim());
    if (uses_model) probs_[q] = method.model->forward(qs.row(q), dists_[q]);
  }
}

QueryPlan PreparedMethod::plan(std::size_t q, double knob) const {
  switch (method_.strategy) {
    case PlanStrategy::kLiraSigma:
      return plan_lira_from_probs(probs_[q], knob);
    case PlanStrategy::kLiraTopN:
      return plan_lira_topn_from_probs(probs_[q],
                                       static_cast<std::size_t>(knob));
    case PlanStrategy::kIvf:
    case PlanStrategy::kFuzzy:
      return plan_ivf_from_dists(dists_[q], static_cast<std::size_t>(knob),
                                 method_.strategy);
  }
  throw InvalidArgument("unknown strategy");
}

SearchResult PreparedMethod::run(std::size_t q, double knob) const {
  const std::size_t k = workload_.k();
  auto result = search(*method_.layout, workload_.base(), plan(q, knob),
                       workload_.queries().row(q), k);
  result.metrics.recall_at_k = recall_at_k(result.knn, workload_.truth(q), k);
  return result;
}

namespace {

SweepRecord run_cell(const PreparedMethod& prepared, std::size_t num_queries,
                     double knob) {
  SweepRecord rec;
  rec.method = prepared.method().name;
  rec.knob = knob;
  std::vector<QueryMetrics> per_query(num_queries);
  const auto start = std::chrono::steady_clock::now();
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t q = 0; q < static_cast<std::int64_t>(num_queries); ++q) {
    per_query[q] = prepared.run(static_cast<std::size_t>(q), knob).metrics;
  }
  rec.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  // Summed in query order so the means do not depend on the thread count.
  for (const auto& m : per_query) {
    rec.mean_recall += m.recall_at_k;
    rec.mean_cmp += static_cast<double>(m.cmp);
    rec.mean_nprobe += static_cast<double>(m.nprobe);
  }
  const auto n = static_cast<double>(num_queries);
  rec.mean_recall /= n;
  rec.mean_cmp /= n;
  rec.mean_nprobe /= n;
  return rec;
}

// Nested plans make these exact: a larger probe set cannot lose a true
// neighbor, and a lower threshold cannot shrink the probe set.
void check_monotone(const Method& method, std::span<const SweepRecord> cells) {
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const auto& lo = cells[i - 1];
    const auto& hi = cells[i];
    if (method.strategy == PlanStrategy::kLiraSigma) {
      if (hi.mean_nprobe > lo.mean_nprobe) {
        throw Error("sweep '" + method.name + "': mean nprobe grows from " +
                    std::to_string(lo.mean_nprobe) + " to " +
                    std::to_string(hi.mean_nprobe) + " as sigma rises");
      }
    } else if (hi.mean_recall < lo.mean_recall) {
      throw Error("sweep '" + method.name + "': mean recall drops from " +
                  std::to_string(lo.mean_recall) + " to " +
                  std::to_string(hi.mean_recall) + " as nprobe rises");
    }
  }
}

}  // namespace

std::vector<SweepRecord> tradeoff_sweep(std::span<const Method> methods,
                                        const Workload& workload) {
  std::vector<SweepRecord> out;
  for (const Method& method : methods) {
    LIRA_REQUIRE(!method.knobs.empty(), "method '" + method.name +
                                            "' has an empty knob grid");
    std::vector<double> knobs = method.knobs;
    std::sort(knobs.begin(), knobs.end());
    knobs.erase(std::unique(knobs.begin(), knobs.end()), knobs.end());
    const PreparedMethod prepared(method, workload);
    std::vector<SweepRecord> cells;
    for (double knob : knobs) {
      cells.push_back(run_cell(prepared, workload.queries().size(), knob));
    }
    check_monotone(method, cells);
    out.insert(out.end(), cells.begin(), cells.end());
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const SweepRecord& a, const SweepRecord& b) {
                     return a.method < b.method;
                   });
  return out;
}

std::optional<SweepRecord> min_cmp_at_recall(
    std::span<const SweepRecord> records, const std::string& method,
    double target) {
  std::optional<SweepRecord> best;
  for (const auto& r : records) {
    if (r.method != method || r.mean_recall < target) continue;
    if (!best || r.mean_cmp < best->mean_cmp) best = r;
  }
  return best;
}

ProbingWasteReport probing_waste_report(const Dataset& queries,
                                        std::span<const KnnResult> gt,
                                        const PartitionLayout& hard,
                                        std::size_t k) {
  LIRA_REQUIRE(hard.kind() == LayoutKind::kHard, "needs a hard layout");
  LIRA_REQUIRE(gt.size() == queries.size(), "ground truth size mismatch");
  const std::size_t b = hard.num_partitions();
  ProbingWasteReport report;
  std::vector<std::size_t> opt_hist(b + 1, 0), dist_hist(b + 1, 0);
  for (std::size_t q = 0; q < queries.size(); ++q) {
    LIRA_REQUIRE(gt[q].size() >= k, "ground truth shorter than k");
    const auto dist = knn_count_distribution(
        hard, std::span<const PointId>(gt[q].ids.data(), k));
    ProbingWasteRow row;
    row.query = q;
    row.optimal = optimal_nprobe(probing_label(dist));
    row.distance_rank = distance_rank_nprobe(
        dist, distance_rank(centroid_distances(queries.row(q),
                                               hard.centroids(), hard.dim())));
    row.extra = row.distance_rank - row.optimal;
    ++opt_hist[row.optimal];
    ++dist_hist[row.distance_rank];
    report.rows.push_back(row);
  }
  const auto n = static_cast<double>(queries.size());
  std::size_t opt_acc = 0, dist_acc = 0;
  for (std::size_t x = 1; x <= b; ++x) {
    opt_acc += opt_hist[x];
    dist_acc += dist_hist[x];
    report.cdf_optimal.push_back(static_cast<double>(opt_acc) / n);
    report.cdf_distance.push_back(static_cast<double>(dist_acc) / n);
  }
  return report;
}

LongTailReport long_tail_report(const Dataset& base, const Dataset& queries,
                                std::span<const KnnResult> gt, std::size_t k,
                                std::span<const std::size_t> partition_counts,
                                const KMeansOptions& kmeans_options) {
  LIRA_REQUIRE(gt.size() == queries.size(), "ground truth size mismatch");
  LongTailReport report;
  for (std::size_t b : partition_counts) {
    const auto km = kmeans(base, b, kmeans_options);
    const auto layout = assign_hard(base, km.centroids);
    auto& hist = report.histograms[b];
    for (std::size_t q = 0; q < queries.size(); ++q) {
      LIRA_REQUIRE(gt[q].size() >= k, "ground truth shorter than k");
      const auto dist = knn_count_distribution(
          layout, std::span<const PointId>(gt[q].ids.data(), k));
      ++hist[long_tail_stats(dist).min_nonzero];
    }
  }
  return report;
}

std::vector<double> per_query_grid(const Method& method) {
  if (method.strategy == PlanStrategy::kLiraSigma) {
    std::vector<double> grid;
    for (int i = 19; i >= 1; --i) grid.push_back(i / 20.0);
    return grid;
  }
  LIRA_REQUIRE(method.layout != nullptr, "method has no layout");
  return nprobe_grid(method.layout->num_partitions());
}

namespace {

struct Cheapest {
  double knob = 0.0;
  QueryMetrics metrics;
};

// Plans along `grid` are nested, so reaching the target is monotone.
std::optional<Cheapest> cheapest_knob(const PreparedMethod& prepared,
                                      std::span<const double> grid,
                                      std::size_t q, double target) {
  std::size_t lo = 0, hi = grid.size();
  std::optional<Cheapest> found;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const auto m = prepared.run(q, grid[mid]).metrics;
    if (m.recall_at_k >= target) {
      found = Cheapest{grid[mid], m};
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return found;
}

}  // namespace

PerQueryComparison per_query_comparison(const Method& method_a,
                                        const Method& method_b,
                                        const Workload& workload,
                                        double target, std::size_t sample_size,
                                        std::uint64_t seed) {
  LIRA_REQUIRE(target > 0.0 && target <= 1.0, "target recall must lie in (0, 1]");
  const PreparedMethod pa(method_a, workload), pb(method_b, workload);
  const auto grid_a = per_query_grid(method_a);
  const auto grid_b = per_query_grid(method_b);
  PerQueryComparison out;
  for (std::size_t q = 0; q < workload.queries().size(); ++q) {
    const auto a = cheapest_knob(pa, grid_a, q, target);
    const auto b = cheapest_knob(pb, grid_b, q, target);
    if (!a || !b) {
      out.excluded.push_back(q);
      continue;
    }
    PerQueryRow row;
    row.query = q;
    row.knob_a = a->knob;
    row.knob_b = b->knob;
    row.cmp_a = a->metrics.cmp;
    row.cmp_b = b->metrics.cmp;
    row.nprobe_a = a->metrics.nprobe;
    row.nprobe_b = b->metrics.nprobe;
    row.cmp_ratio = static_cast<double>(row.cmp_b) /
                    static_cast<double>(std::max<std::size_t>(row.cmp_a, 1));
    row.nprobe_ratio = static_cast<double>(row.nprobe_b) /
                       static_cast<double>(row.nprobe_a);
    out.rows.push_back(row);
  }
  out.sample.resize(out.rows.size());
  std::iota(out.sample.begin(), out.sample.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(out.sample.begin(), out.sample.end(), rng);
  out.sample.resize(std::min(sample_size, out.sample.size()));
  std::sort(out.sample.begin(), out.sample.end());
  return out;
}

CsvWriter::CsvWriter(const std::string& path, std::vector<std::string> columns,
                     std::uint64_t config_hash)
    : out_(path), columns_(columns.size()) {
  if (!out_) throw Error("cannot open " + path + " for writing");
  LIRA_REQUIRE(!columns.empty(), "CSV needs at least one column");
  out_ << "# lira-csv v1 config=" << hex64(config_hash) << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) {
    out_ << (i ? "," : "") << columns[i];
  }
  out_ << '\n';
}

void CsvWriter::comment(const std::string& text) { out_ << "# " << text << '\n'; }

std::string CsvWriter::format(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::uint64_t config_hash(const std::string& description) {
  Fnv1a64 h;
  h.update({reinterpret_cast<const std::uint8_t*>(description.data()),
            description.size()});
  return h.digest();
}

void write_sweep_csv(const std::string& path,
                     std::span<const SweepRecord> records,
                     std::uint64_t config) {
  CsvWriter csv(path,
                {"method", "knob", "mean_recall", "mean_cmp", "mean_nprobe"},
                config);
  for (const auto& r : records) {
    csv.row(r.method, r.knob, r.mean_recall, r.mean_cmp, r.mean_nprobe);
  }
}

void write_sweep_timing_csv(const std::string& path,
                            std::span<const SweepRecord> records,
                            std::uint64_t config) {
  CsvWriter csv(path, {"method", "knob", "wall_clock_s"}, config);
  for (const auto& r : records) csv.row(r.method, r.knob, r.wall_clock_s);
}

void write_probing_waste_csv(const std::string& path,
                             const ProbingWasteReport& report,
                             std::uint64_t config) {
  CsvWriter csv(path, {"query", "nprobe_opt", "nprobe_dist", "extra"}, config);
  for (const auto& r : report.rows) {
    csv.row(r.query, r.optimal, r.distance_rank, r.extra);
  }
  CsvWriter cdf(path + ".cdf.csv", {"x", "y", "series"}, config);
  for (std::size_t x = 0; x < report.cdf_optimal.size(); ++x) {
    cdf.row(x + 1, report.cdf_optimal[x], "nprobe_opt");
  }
  for (std::size_t x = 0; x < report.cdf_distance.size(); ++x) {
    cdf.row(x + 1, report.cdf_distance[x], "nprobe_dist");
  }
}

void write_long_tail_csv(const std::string& path, const LongTailReport& report,
                         std::uint64_t config) {
  CsvWriter csv(path, {"B", "min_nonzero", "queries"}, config);
  for (const auto& [b, hist] : report.histograms) {
    for (const auto& [count, queries] : hist) csv.row(b, count, queries);
  }
}

void write_per_query_csv(const std::string& path,
                         const PerQueryComparison& cmp, std::uint64_t config) {
  CsvWriter csv(path,
                {"query", "knob_a", "knob_b", "cmp_a", "cmp_b", "nprobe_a",
                 "nprobe_b", "cmp_ratio", "nprobe_ratio", "sampled"},
                config);
  csv.comment("excluded " + std::to_string(cmp.excluded.size()) +
              " queries unreachable at the target recall");
  std::size_t s = 0;
  for (std::size_t i = 0; i < cmp.rows.size(); ++i) {
    const bool sampled = s < cmp.sample.size() && cmp.sample[s] == i;
    if (sampled) ++s;
    const auto& r = cmp.rows[i];
    csv.row(r.query, r.knob_a, r.knob_b, r.cmp_a, r.cmp_b, r.nprobe_a,
            r.nprobe_b, r.cmp_ratio, r.nprobe_ratio, sampled ? 1 : 0);
  }
}

void write_curve_csv(const std::string& path, std::span<const CurvePoint> curve,
                     const std::string& primary, const std::string& control,
                     std::uint64_t config) {
  CsvWriter csv(path, {"x", "y", "series"}, config);
  for (const auto& c : curve) csv.row(c.m, c.primary, primary);
  for (const auto& c : curve) csv.row(c.m, c.control, control);
}

void convergence_report(const std::string& path,
                        std::span<const TrainLogRow> log, std::uint64_t config) {
  CsvWriter csv(path,
                {"step", "batch", "epoch", "loss", "recall", "mean_nprobe",
                 "hit_rate"},
                config);
  for (const auto& r : log) {
    csv.row(r.step, r.batch, r.epoch, r.metrics.loss, r.metrics.recall,
            r.metrics.mean_nprobe, r.metrics.hit_rate);
  }
}

void write_sweep_plot(const std::string& path,
                      std::span<const SweepRecord> records,
                      std::uint64_t config) {
  CsvWriter csv(path, {"x", "y", "series"}, config);
  for (const auto& r : records) csv.row(r.mean_cmp, r.mean_recall, r.method);
}

}  // namespace lira::bench
