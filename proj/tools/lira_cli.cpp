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


// Command-line front end: ground truth, index building, training,
// redundancy, queries, sweeps and analysis reports.

#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lira/bench.hpp"
#include "lira/binary_io.hpp"
#include "lira/index_io.hpp"
#include "lira/model_io.hpp"
#include "lira/oracle.hpp"
#include "lira/redundancy.hpp"
#include "lira/retrieval.hpp"
#include "lira/training.hpp"
#include "lira/vecs_io.hpp"

namespace fs = std::filesystem;
using namespace lira;

namespace {

struct RunConfig {
  std::string out_dir = "lira_out";
  std::string base_path;
  std::string queries_path;
  std::size_t synth_n = 20000;
  std::size_t synth_d = 32;
  std::size_t synth_clusters = 64;
  float synth_spread = 0.2f;
  std::size_t num_queries = 1000;

  std::size_t k = 100;
  std::size_t partitions = 64;
  std::size_t kmeans_iters = 25;
  double eta = 3.0;
  double sigma = 0.5;
  std::size_t nprobe = 1;

  std::size_t sample_size = 100000;
  std::size_t batch_size = 512;
  std::size_t epochs = 10;
  double lr = 1e-3;
  std::uint64_t seed = 42;
  int threads = 0;

  std::string method = "lira";
  std::vector<std::size_t> query_ids{0};

  double target_recall = 0.98;
  std::vector<double> sigma_grid;
  std::size_t plot_sample = 100;

  std::vector<std::size_t> b_list{64, 32, 16, 8};
  std::vector<std::size_t> m_list{1, 2, 4, 8, 16};
};

// Independent streams derived from the single --seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

enum Stream : std::uint64_t { kSample = 0, kKMeans = 1, kInit = 2, kTrain = 3, kPlot = 4 };

struct Data {
  Dataset base;
  Dataset queries;
};

Data load_data(const RunConfig& cfg) {
  if (cfg.base_path.empty()) {
    SyntheticSpec spec{cfg.synth_n + cfg.num_queries, cfg.synth_d,
                       cfg.synth_clusters, cfg.synth_spread, cfg.seed};
    auto [base, queries] = split_tail(gen_synthetic(spec), cfg.num_queries);
    return {std::move(base), std::move(queries)};
  }
  Dataset base = read_vectors(cfg.base_path, vecs_format_from_path(cfg.base_path));
  if (!cfg.queries_path.empty()) {
    return {std::move(base),
            read_vectors(cfg.queries_path, vecs_format_from_path(cfg.queries_path))};
  }
  auto [head, tail] = split_tail(base, cfg.num_queries);
  return {std::move(head), std::move(tail)};
}

std::string describe(const RunConfig& cfg) {
  std::ostringstream s;
  s << "base=" << cfg.base_path << ";queries=" << cfg.queries_path
    << ";synth=" << cfg.synth_n << "x" << cfg.synth_d << "/" << cfg.synth_clusters
    << "/" << cfg.synth_spread << ";nq=" << cfg.num_queries << ";k=" << cfg.k
    << ";B=" << cfg.partitions << ";iters=" << cfg.kmeans_iters
    << ";eta=" << cfg.eta << ";sigma=" << cfg.sigma
    << ";sample=" << cfg.sample_size << ";batch=" << cfg.batch_size
    << ";epochs=" << cfg.epochs << ";lr=" << cfg.lr << ";seed=" << cfg.seed
    << ";target=" << cfg.target_recall;
  return s.str();
}

std::string artifact(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out_dir) / name).string();
}

void require_artifact(const RunConfig& cfg, const std::string& name,
                      const std::string& stage) {
  if (!fs::exists(artifact(cfg, name))) {
    throw Error("missing " + artifact(cfg, name) + ": run stage '" + stage +
                "' first");
  }
}

IndexFile load_checked(const RunConfig& cfg, const std::string& name,
                       const std::string& stage, const Dataset& base) {
  require_artifact(cfg, name, stage);
  IndexFile index = load_index(artifact(cfg, name));
  if (index.dataset_fingerprint != base.fingerprint()) {
    throw Error(artifact(cfg, name) +
                " was built from a different dataset: rerun stage '" + stage +
                "'");
  }
  return index;
}

std::vector<PointId> training_ids(const RunConfig& cfg, const Dataset& base) {
  return sample_ids(base.size(), cfg.sample_size, derive_seed(cfg.seed, kSample));
}

GroundTruth groundtruth(const RunConfig& cfg, const Data& data, bool* hit) {
  return load_or_compute_groundtruth(data.base, data.queries, cfg.k,
                                     artifact(cfg, "gt"), hit);
}

int cmd_groundtruth(const RunConfig& cfg) {
  const Data data = load_data(cfg);
  bool hit = false;
  const auto gt = groundtruth(cfg, data, &hit);
  std::cout << (hit ? "cache hit" : "computed") << ": " << gt.results.size()
            << " queries, k=" << cfg.k << ", key "
            << hex64(groundtruth_key(data.base, data.queries, cfg.k)) << " in "
            << artifact(cfg, "gt") << "\n";
  return 0;
}

int cmd_build(const RunConfig& cfg) {
  const Data data = load_data(cfg);
  const auto ids = training_ids(cfg, data.base);
  const auto km = kmeans(gather_rows(data.base, ids), cfg.partitions,
                         {cfg.kmeans_iters, derive_seed(cfg.seed, kKMeans)});
  const auto hard = assign_hard(data.base, km.centroids);
  const auto fuzzy = assign_fuzzy(data.base, km.centroids);
  const auto fp = data.base.fingerprint();
  save_index({fp, hard, std::nullopt, std::nullopt}, artifact(cfg, "ivf.lira"));
  save_index({fp, fuzzy, std::nullopt, std::nullopt},
             artifact(cfg, "ivffuzzy.lira"));
  std::cout << "k-means: " << km.iterations << " iterations"
            << (km.converged ? " (converged)" : "") << ", inertia "
            << km.inertia.back() << "\n"
            << "wrote " << artifact(cfg, "ivf.lira") << " (" << hard.total_entries()
            << " entries) and " << artifact(cfg, "ivffuzzy.lira") << " ("
            << fuzzy.total_entries() << " entries)\n";
  return 0;
}

int cmd_train(const RunConfig& cfg) {
  const Data data = load_data(cfg);
  const IndexFile ivf = load_checked(cfg, "ivf.lira", "build", data.base);
  const auto ids = training_ids(cfg, data.base);
  if (cfg.k >= ids.size()) {
    throw InvalidArgument("k must be smaller than the training sample");
  }
  const auto knn = subset_self_knn(data.base, ids, cfg.k);
  IntMatrix knn_ids{ids.size(), cfg.k, {}};
  for (const auto& r : knn) {
    for (PointId id : r.ids) knn_ids.data.push_back(static_cast<std::int32_t>(id));
  }
  IntMatrix id_list{ids.size(), 1, {ids.begin(), ids.end()}};
  write_ivecs(knn_ids, artifact(cfg, "train_knn.ivecs"));
  write_ivecs(id_list, artifact(cfg, "train_ids.ivecs"));

  const auto ts = build_training_set_from_knn(data.base, ids, ivf.layout, knn);
  ModelShape shape;
  shape.dim = data.base.dim();
  shape.num_partitions = ivf.layout.num_partitions();
  shape.sigma_train = static_cast<float>(cfg.sigma);
  auto model = ProbingModel::init(shape, derive_seed(cfg.seed, kInit));
  TrainConfig tc;
  tc.batch_size = cfg.batch_size;
  tc.epochs = cfg.epochs;
  tc.learning_rate = cfg.lr;
  tc.seed = derive_seed(cfg.seed, kTrain);
  tc.sigma = cfg.sigma;
  const auto result = train(model, ts, tc);
  save_model(model, artifact(cfg, "model.lirm"));
  bench::convergence_report(artifact(cfg, "convergence.csv"), result.log,
                            bench::config_hash(describe(cfg)));
  const auto& last = result.log.back().metrics;
  std::cout << "trained on " << ts.size() << " points, " << result.batches
            << " batches: loss " << last.loss << ", recall " << last.recall
            << ", mean nprobe " << last.mean_nprobe << ", hit rate "
            << last.hit_rate << "\nwrote " << artifact(cfg, "model.lirm")
            << " and " << artifact(cfg, "convergence.csv") << "\n";
  return 0;
}

int cmd_redundancy(const RunConfig& cfg) {
  const Data data = load_data(cfg);
  const IndexFile ivf = load_checked(cfg, "ivf.lira", "build", data.base);
  require_artifact(cfg, "model.lirm", "train");
  const auto model = load_model(artifact(cfg, "model.lirm"));
  if (model.num_partitions() != ivf.layout.num_partitions()) {
    throw Error("model.lirm does not match ivf.lira: rerun stage 'train'");
  }
  const auto plan = plan_redundancy(model, data.base, ivf.layout, cfg.eta);
  const auto layout = apply_redundancy(ivf.layout, plan);
  save_index({data.base.fingerprint(), layout, plan, model},
             artifact(cfg, "lira.lira"));
  std::cout << "duplicated " << plan.picks.size() << " points (eta " << cfg.eta
            << "%), " << layout.total_entries() << " stored entries\nwrote "
            << artifact(cfg, "lira.lira") << "\n";
  return 0;
}

struct Searchable {
  IndexFile index;
  PlanStrategy strategy;
};

Searchable open_method(const RunConfig& cfg, const std::string& method,
                       const Dataset& base) {
  if (method == "ivf") {
    return {load_checked(cfg, "ivf.lira", "build", base), PlanStrategy::kIvf};
  }
  if (method == "ivf-fuzzy") {
    return {load_checked(cfg, "ivffuzzy.lira", "build", base), PlanStrategy::kFuzzy};
  }
  if (method == "lira") {
    return {load_checked(cfg, "lira.lira", "redundancy", base),
            PlanStrategy::kLiraSigma};
  }
  if (method == "lira-meta") {
    IndexFile index = load_checked(cfg, "ivf.lira", "build", base);
    require_artifact(cfg, "model.lirm", "train");
    index.model = load_model(artifact(cfg, "model.lirm"));
    return {std::move(index), PlanStrategy::kLiraSigma};
  }
  throw InvalidArgument("unknown method '" + method +
                        "' (expected lira, lira-meta, ivf, ivf-fuzzy)");
}

int cmd_query(const RunConfig& cfg) {
  const Data data = load_data(cfg);
  const Searchable s = open_method(cfg, cfg.method, data.base);
  const bool lira = s.strategy == PlanStrategy::kLiraSigma;
  for (std::size_t q : cfg.query_ids) {
    if (q >= data.queries.size()) {
      throw InvalidArgument("query id " + std::to_string(q) + " out of range (" +
                            std::to_string(data.queries.size()) + " queries)");
    }
    const auto row = data.queries.row(q);
    const QueryPlan plan = lira ? plan_lira(*s.index.model, row, s.index.layout, cfg.sigma)
                                : plan_ivf(row, s.index.layout, cfg.nprobe);
    const auto result = search(s.index.layout, data.base, plan, row, cfg.k);
    const auto truth = brute_force_knn(data.base, row, cfg.k);
    std::printf("query %zu method=%s knob %s=%g nprobe=%zu cmp=%zu recall@%zu=%.4f\n",
                q, cfg.method.c_str(), lira ? "sigma" : "nprobe",
                lira ? cfg.sigma : static_cast<double>(cfg.nprobe),
                result.metrics.nprobe, result.metrics.cmp, cfg.k,
                recall_at_k(result.knn, truth, cfg.k));
    for (std::size_t i = 0; i < result.knn.size(); ++i) {
      std::printf("  %zu %u %.6g\n", i + 1, result.knn.ids[i], result.knn.dists[i]);
    }
  }
  return 0;
}

int cmd_bench(const RunConfig& cfg) {
  const Data data = load_data(cfg);
  const IndexFile ivf = load_checked(cfg, "ivf.lira", "build", data.base);
  const IndexFile fuzzy = load_checked(cfg, "ivffuzzy.lira", "build", data.base);
  const IndexFile lira = load_checked(cfg, "lira.lira", "redundancy", data.base);
  if (!lira.model) throw Error("lira.lira holds no model: rerun stage 'redundancy'");
  bool hit = false;
  const auto gt = groundtruth(cfg, data, &hit);
  const bench::Workload workload(data.base, data.queries, gt.results, cfg.k);
  const auto sigmas = cfg.sigma_grid.empty() ? bench::sigma_grid() : cfg.sigma_grid;
  const std::size_t b = ivf.layout.num_partitions();
  const std::vector<bench::Method> methods = {
      {"ivf", PlanStrategy::kIvf, &ivf.layout, nullptr, bench::nprobe_grid(b)},
      {"ivf-fuzzy", PlanStrategy::kFuzzy, &fuzzy.layout, nullptr,
       bench::nprobe_grid(b)},
      {"lira", PlanStrategy::kLiraSigma, &lira.layout, &*lira.model, sigmas},
      {"lira-meta", PlanStrategy::kLiraSigma, &ivf.layout, &*lira.model, sigmas}};
  const auto records = bench::tradeoff_sweep(methods, workload);
  const auto config = bench::config_hash(describe(cfg));
  bench::write_sweep_csv(artifact(cfg, "sweep.csv"), records, config);
  bench::write_sweep_timing_csv(artifact(cfg, "sweep_timing.csv"), records, config);
  bench::write_sweep_plot(artifact(cfg, "sweep_plot.csv"), records, config);
  const auto per_query = bench::per_query_comparison(
      methods[0], methods[2], workload, cfg.target_recall, cfg.plot_sample,
      derive_seed(cfg.seed, kPlot));
  bench::write_per_query_csv(artifact(cfg, "per_query.csv"), per_query, config);

  std::printf("minimum mean cmp at mean Recall@%zu >= %g\n", cfg.k, cfg.target_recall);
  const auto base_best = bench::min_cmp_at_recall(records, "ivf", cfg.target_recall);
  for (const auto& m : methods) {
    const auto best = bench::min_cmp_at_recall(records, m.name, cfg.target_recall);
    if (!best) {
      std::printf("  %-10s unreachable on the knob grid\n", m.name.c_str());
      continue;
    }
    std::printf("  %-10s knob %-6g cmp %-12.1f nprobe %-7.2f recall %.4f", m.name.c_str(),
                best->knob, best->mean_cmp, best->mean_nprobe, best->mean_recall);
    if (base_best) {
      std::printf("  (%+.1f%% vs ivf)",
                  100.0 * (best->mean_cmp / base_best->mean_cmp - 1.0));
    }
    std::printf("\n");
  }
  std::printf("per-query comparison: %zu queries, %zu excluded\n",
              per_query.rows.size(), per_query.excluded.size());
  std::printf("wrote sweep.csv, sweep_timing.csv, sweep_plot.csv, per_query.csv in %s\n",
              cfg.out_dir.c_str());
  return 0;
}

int cmd_analyze(const RunConfig& cfg) {
  const Data data = load_data(cfg);
  const IndexFile ivf = load_checked(cfg, "ivf.lira", "build", data.base);
  bool hit = false;
  const auto gt = groundtruth(cfg, data, &hit);
  const auto config = bench::config_hash(describe(cfg));

  const auto waste = bench::probing_waste_report(data.queries, gt.results,
                                                 ivf.layout, cfg.k);
  bench::write_probing_waste_csv(artifact(cfg, "probing_waste.csv"), waste, config);
  double extra = 0.0;
  for (const auto& r : waste.rows) extra += static_cast<double>(r.extra);
  std::printf("probing waste: mean extra nprobe %.3f over %zu queries\n",
              extra / static_cast<double>(waste.rows.size()), waste.rows.size());

  const auto tail = bench::long_tail_report(
      data.base, data.queries, gt.results, cfg.k, cfg.b_list,
      {cfg.kmeans_iters, derive_seed(cfg.seed, kKMeans)});
  bench::write_long_tail_csv(artifact(cfg, "long_tail.csv"), tail, config);
  for (const auto& [b, hist] : tail.histograms) {
    const auto it = hist.find(1);
    std::printf("long tail: B=%zu, %zu queries with a lone-neighbor partition\n", b,
                it == hist.end() ? std::size_t{0} : it->second);
  }

  require_artifact(cfg, "model.lirm", "train");
  require_artifact(cfg, "train_knn.ivecs", "train");
  const auto model = load_model(artifact(cfg, "model.lirm"));
  const auto ids = read_ivecs(artifact(cfg, "train_knn.ivecs"));
  std::vector<KnnResult> lists(ids.n);
  for (std::size_t i = 0; i < ids.n; ++i) {
    for (std::int32_t id : ids.row(i)) {
      if (id < 0 || static_cast<std::size_t>(id) >= data.base.size()) {
        throw Error("train_knn.ivecs does not match the dataset: rerun stage 'train'");
      }
      lists[i].ids.push_back(static_cast<PointId>(id));
    }
  }
  const auto truth = replica_partitions(ivf.layout, lists);
  const auto recall = replica_recall_curve(model, data.base, ivf.layout, truth,
                                           cfg.m_list, derive_seed(cfg.seed, kPlot));
  const auto hits = hit_rate_curve(model, data.base, ivf.layout, truth, cfg.m_list);
  bench::write_curve_csv(artifact(cfg, "replica_recall.csv"), recall, "model",
                         "random", config);
  bench::write_curve_csv(artifact(cfg, "replica_hit_rate.csv"), hits, "model",
                         "distance", config);
  std::printf("replica analysis over %zu long-tail points\n", truth.points.size());
  for (const auto& h : hits) {
    std::printf("  M=%zu hit rate model %.3f distance %.3f\n", h.m, h.primary,
                h.control);
  }
  std::printf("wrote probing_waste.csv, long_tail.csv, replica_recall.csv, "
              "replica_hit_rate.csv in %s\n", cfg.out_dir.c_str());
  return 0;
}

void add_data_options(CLI::App& app, RunConfig& cfg) {
  app.add_option("--out", cfg.out_dir, "Output directory for artifacts and reports")
      ->envname("LIRA_OUT_DIR")
      ->capture_default_str();
  app.add_option("--base", cfg.base_path,
                 "Base vectors (.fvecs/.bvecs); synthetic data when omitted");
  app.add_option("--queries", cfg.queries_path,
                 "Query vectors; the last --num-queries base rows when omitted");
  app.add_option("--synthetic-n", cfg.synth_n, "Synthetic base size")
      ->capture_default_str();
  app.add_option("--synthetic-d", cfg.synth_d, "Synthetic dimension")
      ->capture_default_str();
  app.add_option("--synthetic-clusters", cfg.synth_clusters,
                 "Synthetic mixture components")
      ->capture_default_str();
  app.add_option("--synthetic-spread", cfg.synth_spread,
                 "Synthetic per-dimension standard deviation")
      ->capture_default_str();
  app.add_option("--num-queries", cfg.num_queries,
                 "Held-out queries split from the tail of the data")
      ->capture_default_str();
  app.add_option("-k,--k", cfg.k, "Neighbors per query (reference default: 100)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("-B,--partitions", cfg.partitions,
                 "Number of partitions (reference default: 64 at small scale)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--kmeans-iters", cfg.kmeans_iters, "K-Means iteration cap")
      ->capture_default_str();
  app.add_option("--eta", cfg.eta,
                 "Percent of points duplicated by redundancy (reference default: 3)")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 100.0));
  app.add_option("--sigma", cfg.sigma,
                 "Probability threshold for probing (reference default: 0.5)")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--nprobe", cfg.nprobe, "Partitions probed by ivf methods")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--sample-size", cfg.sample_size,
                 "Training subset size (reference default: 100000)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--batch-size", cfg.batch_size, "Training batch size (reference default: 512)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--epochs", cfg.epochs, "Training epochs (reference default: 10)")
      ->capture_default_str();
  app.add_option("--lr", cfg.lr, "Adam learning rate (reference default: 0.001)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "Seed for every random choice")
      ->capture_default_str();
  app.add_option("--threads", cfg.threads,
                 "Thread cap, 0 = all cores; results do not depend on it")
      ->capture_default_str();
  app.add_option("--method", cfg.method,
                 "query: lira, lira-meta (model over the hard layout), ivf, ivf-fuzzy")
      ->capture_default_str();
  app.add_option("--query-ids", cfg.query_ids, "query: query rows to search")
      ->delimiter(',');
  app.add_option("--target-recall", cfg.target_recall,
                 "bench: recall target for the cmp table and per-query search "
                 "(reference default: 0.98)")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--sigma-grid", cfg.sigma_grid,
                 "bench: sigma values to sweep (default 0.10 to 1.00 step 0.05)")
      ->delimiter(',');
  app.add_option("--plot-sample", cfg.plot_sample,
                 "bench: per-query rows flagged for plotting (reference default: 100)")
      ->capture_default_str();
  app.add_option("--b-list", cfg.b_list,
                 "analyze: partition counts for the long-tail report "
                 "(reference default: 64,32,16,8)")
      ->delimiter(',');
  app.add_option("--m-list", cfg.m_list,
                 "analyze: top-M cutoffs for replica curves (default 1,2,4,8,16)")
      ->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lira: learned partition probing for IVF vector search"};
  app.set_config("--config", "", "TOML config file; command-line flags win");
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig cfg;
  add_data_options(app, cfg);

  struct Stage {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&);
  };
  const Stage stages[] = {
      {"groundtruth", "Exact kNN of the queries, cached by content hash", cmd_groundtruth},
      {"build", "K-Means partitions: ivf.lira and ivffuzzy.lira", cmd_build},
      {"train", "Train the probing model: model.lirm, convergence.csv", cmd_train},
      {"redundancy", "Duplicate eta% of points: lira.lira", cmd_redundancy},
      {"query", "Search queries and print neighbors and metrics", cmd_query},
      {"bench", "Recall/cmp sweeps and per-query comparison CSVs", cmd_bench},
      {"analyze", "Probing-waste, long-tail and replica reports", cmd_analyze},
  };
  for (const auto& s : stages) app.add_subcommand(s.name, s.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
  try {
    fs::create_directories(cfg.out_dir);
    for (const auto& s : stages) {
      if (app.got_subcommand(s.name)) return s.run(cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
