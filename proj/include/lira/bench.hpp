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
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "lira/dataset.hpp"
#include "lira/model.hpp"
#include "lira/partition.hpp"
#include "lira/redundancy.hpp"
#include "lira/retrieval.hpp"
#include "lira/training.hpp"

namespace lira::bench {

/// A searchable configuration: a layout, a planning strategy, and the knob
/// values to sweep (sigma for kLiraSigma, nprobe otherwise).
struct Method {
  std::string name;
  PlanStrategy strategy = PlanStrategy::kIvf;
  const PartitionLayout* layout = nullptr;
  const ProbingModel* model = nullptr;
  std::vector<double> knobs;
};

/// nprobe = 1..B.
std::vector<double> nprobe_grid(std::size_t num_partitions);
/// sigma = 0.10, 0.15, ..., 1.00.
std::vector<double> sigma_grid();

/// Evaluation queries with their ground truth. Per-query model outputs and
/// centroid distances are computed once per method and reused across knobs.
class Workload {
 public:
  Workload(const Dataset& base, const Dataset& queries,
           std::span<const KnnResult> gt, std::size_t k);

  const Dataset& base() const { return base_; }
  const Dataset& queries() const { return queries_; }
  std::size_t k() const { return k_; }
  const KnnResult& truth(std::size_t q) const { return gt_[q]; }

 private:
  const Dataset& base_;
  const Dataset& queries_;
  std::span<const KnnResult> gt_;
  std::size_t k_;
};

class PreparedMethod {
 public:
  PreparedMethod(const Method& method, const Workload& workload);

  const Method& method() const { return method_; }
  QueryPlan plan(std::size_t q, double knob) const;
  /// Search with recall filled in.
  SearchResult run(std::size_t q, double knob) const;

 private:
  Method method_;
  const Workload& workload_;
  std::vector<std::vector<float>> dists_;
  std::vector<std::vector<float>> probs_;
};

struct SweepRecord {
  std::string method;
  double knob = 0.0;
  double mean_recall = 0.0;
  double mean_cmp = 0.0;
  double mean_nprobe = 0.0;
  double wall_clock_s = 0.0;
};

/// Every (method, knob) cell over every query, sorted by method name then
/// knob. Throws if IVF-style recall decreases in nprobe or LIRA nprobe grows
/// with sigma.
std::vector<SweepRecord> tradeoff_sweep(std::span<const Method> methods,
                                        const Workload& workload);

/// Smallest mean cmp among `method` cells reaching `target` mean recall.
std::optional<SweepRecord> min_cmp_at_recall(
    std::span<const SweepRecord> records, const std::string& method,
    double target);

struct ProbingWasteRow {
  std::size_t query = 0;
  std::size_t optimal = 0;        // nprobe*
  std::size_t distance_rank = 0;  // nprobe*_dist
  std::size_t extra = 0;
};

struct ProbingWasteReport {
  std::vector<ProbingWasteRow> rows;
  /// cdf_optimal[x-1] = fraction of queries with nprobe* <= x, x = 1..B;
  /// likewise for the distance-rank count.
  std::vector<double> cdf_optimal;
  std::vector<double> cdf_distance;
};

ProbingWasteReport probing_waste_report(const Dataset& queries,
                                        std::span<const KnnResult> gt,
                                        const PartitionLayout& hard,
                                        std::size_t k);

/// Per B: histogram[min nonzero kNN count] = number of queries.
struct LongTailReport {
  std::map<std::size_t, std::map<std::uint32_t, std::size_t>> histograms;
};

/// Rebuilds K-Means and a hard layout for every B in `partition_counts`.
LongTailReport long_tail_report(const Dataset& base, const Dataset& queries,
                                std::span<const KnnResult> gt, std::size_t k,
                                std::span<const std::size_t> partition_counts,
                                const KMeansOptions& kmeans_options);

struct PerQueryRow {
  std::size_t query = 0;
  double knob_a = 0.0, knob_b = 0.0;
  std::size_t cmp_a = 0, cmp_b = 0;
  std::size_t nprobe_a = 0, nprobe_b = 0;
  double cmp_ratio = 0.0;     // cmp_b / cmp_a
  double nprobe_ratio = 0.0;  // nprobe_b / nprobe_a
};

struct PerQueryComparison {
  std::vector<PerQueryRow> rows;
  std::vector<std::size_t> excluded;  // queries unreachable by either method
  std::vector<std::size_t> sample;    // row indices exported for plotting
};

/// Knob grid ordered from cheapest to most expensive plan.
std::vector<double> per_query_grid(const Method& method);

/// For every query, the cheapest grid knob of each method whose plan reaches
/// `target` recall (binary search over the nested plans), and the ratios of
/// method b over method a.
PerQueryComparison per_query_comparison(const Method& method_a,
                                        const Method& method_b,
                                        const Workload& workload,
                                        double target,
                                        std::size_t sample_size = 100,
                                        std::uint64_t seed = 11);

// CSV output. Every file opens with "# lira-csv v1 config=<hash>" followed
// by a column header line.

class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::vector<std::string> columns,
            std::uint64_t config_hash);

  template <typename... Ts>
  void row(const Ts&... values) {
    static_assert(sizeof...(Ts) > 0);
    if (sizeof...(Ts) != columns_) {
      throw InvalidArgument("CsvWriter: row width does not match header");
    }
    std::size_t i = 0;
    ((out_ << (i++ ? "," : "") << format(values)), ...);
    out_ << '\n';
    if (!out_) throw Error("CsvWriter: write failure");
  }

  void comment(const std::string& text);

 private:
  static std::string format(const std::string& v) { return v; }
  static std::string format(const char* v) { return v; }
  static std::string format(double v);
  static std::string format(float v) { return format(static_cast<double>(v)); }
  template <typename T>
  static std::string format(T v) requires std::is_integral_v<T> {
    return std::to_string(v);
  }

  std::ofstream out_;
  std::size_t columns_;
};

std::uint64_t config_hash(const std::string& description);

/// Every column except wall_clock_s, so reruns reproduce the file exactly.
void write_sweep_csv(const std::string& path,
                     std::span<const SweepRecord> records,
                     std::uint64_t config);
/// method, knob, wall_clock_s.
void write_sweep_timing_csv(const std::string& path,
                            std::span<const SweepRecord> records,
                            std::uint64_t config);
void write_probing_waste_csv(const std::string& path,
                             const ProbingWasteReport& report,
                             std::uint64_t config);
void write_long_tail_csv(const std::string& path, const LongTailReport& report,
                         std::uint64_t config);
void write_per_query_csv(const std::string& path,
                         const PerQueryComparison& cmp, std::uint64_t config);
void write_curve_csv(const std::string& path, std::span<const CurvePoint> curve,
                     const std::string& primary, const std::string& control,
                     std::uint64_t config);
/// One row per logging step: loss, recall, mean_nprobe, hit_rate.
void convergence_report(const std::string& path,
                        std::span<const TrainLogRow> log, std::uint64_t config);

/// Long-format "x,y,series" rendering of a sweep (x = mean cmp, y = mean
/// recall) for plotting tools.
void write_sweep_plot(const std::string& path,
                      std::span<const SweepRecord> records,
                      std::uint64_t config);

}  // namespace lira::bench
