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


#include "lira/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lira/binary_io.hpp"

namespace lira {

float l2_sq_unchecked(const float* a, const float* b, std::size_t d) {
  double acc = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += diff * diff;
  }
  return static_cast<float>(acc);
}

float l2_sq(std::span<const float> a, std::span<const float> b) {
  LIRA_REQUIRE(a.size() == b.size(),
               "dimension mismatch " + std::to_string(a.size()) + " vs " +
                   std::to_string(b.size()));
  return l2_sq_unchecked(a.data(), b.data(), a.size());
}

Dataset::Dataset(std::size_t n, std::size_t d, std::vector<float> data)
    : n_(n), d_(d), data_(std::move(data)) {
  LIRA_REQUIRE(n_ >= 1, "dataset must hold at least one row");
  LIRA_REQUIRE(d_ >= 1, "dimension must be at least 1");
  LIRA_REQUIRE(data_.size() == n_ * d_,
               "payload holds " + std::to_string(data_.size()) +
                   " floats, expected n*d = " + std::to_string(n_ * d_));
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw InvalidArgument("Dataset: non-finite value in row " +
                            std::to_string(i / d_));
    }
  }
}

std::uint64_t Dataset::fingerprint() const {
  Fnv1a64 h;
  h.update_value<std::uint64_t>(n_);
  h.update_value<std::uint64_t>(d_);
  for (float v : data_) h.update_value(v);
  return h.digest();
}

Dataset gather_rows(const Dataset& source, std::span<const PointId> ids) {
  const std::size_t d = source.dim();
  std::vector<float> data(ids.size() * d);
  for (std::size_t j = 0; j < ids.size(); ++j) {
    LIRA_REQUIRE(ids[j] < source.size(), "row id out of range");
    std::copy_n(source.row_ptr(ids[j]), d, data.begin() + j * d);
  }
  return Dataset(ids.size(), d, std::move(data));
}

std::vector<PointId> sample_ids(std::size_t n, std::size_t m,
                                std::uint64_t seed) {
  std::vector<PointId> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  if (m >= n) return ids;
  // Partial Fisher-Yates: the first m slots end up a uniform sample.
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(ids[i], ids[pick(rng)]);
  }
  ids.resize(m);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::pair<Dataset, Dataset> split_tail(const Dataset& source,
                                       std::size_t tail) {
  LIRA_REQUIRE(tail >= 1 && tail < source.size(),
               "tail must leave at least one row on each side");
  const std::size_t head = source.size() - tail;
  const std::size_t d = source.dim();
  auto all = source.data();
  std::vector<float> a(all.begin(), all.begin() + head * d);
  std::vector<float> b(all.begin() + head * d, all.end());
  return {Dataset(head, d, std::move(a)), Dataset(tail, d, std::move(b))};
}

namespace {

void check_spec(const SyntheticSpec& spec) {
  LIRA_REQUIRE(spec.n >= 1 && spec.d >= 1, "n and d must be positive");
  LIRA_REQUIRE(spec.clusters >= 1 && spec.clusters <= spec.n,
               "clusters must be in [1, n]");
  LIRA_REQUIRE(std::isfinite(spec.spread) && spec.spread >= 0.0f,
               "spread must be finite and non-negative");
}

}  // namespace

std::vector<float> synthetic_means(const SyntheticSpec& spec) {
  check_spec(spec);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  std::vector<float> means(spec.clusters * spec.d);
  for (float& m : means) m = unit(rng);
  return means;
}

Dataset gen_synthetic(const SyntheticSpec& spec) {
  check_spec(spec);
  std::vector<float> means = synthetic_means(spec);
  // Rows draw from a second stream so the means are independent of n.
  std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<std::size_t> pick(0, spec.clusters - 1);
  std::normal_distribution<float> noise(0.0f, 1.0f);
  std::vector<float> data(spec.n * spec.d);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const float* mean = means.data() + pick(rng) * spec.d;
    for (std::size_t j = 0; j < spec.d; ++j) {
      data[i * spec.d + j] = mean[j] + spec.spread * noise(rng);
    }
  }
  return Dataset(spec.n, spec.d, std::move(data));
}

}  // namespace lira
