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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lira/common.hpp"

namespace lira {

/// Squared Euclidean distance. Accumulates in double, returns float.
/// Throws InvalidArgument on dimension mismatch.
float l2_sq(std::span<const float> a, std::span<const float> b);

/// Same as l2_sq without the size check; `a` and `b` must both hold `d`
/// floats. Used in the hot scan loops.
float l2_sq_unchecked(const float* a, const float* b, std::size_t d);

/// Immutable row-major n x d matrix of finite floats. Row i has id i.
class Dataset {
 public:
  Dataset(std::size_t n, std::size_t d, std::vector<float> data);

  std::size_t size() const { return n_; }
  std::size_t dim() const { return d_; }

  std::span<const float> row(std::size_t i) const {
    return {data_.data() + i * d_, d_};
  }
  const float* row_ptr(std::size_t i) const { return data_.data() + i * d_; }
  std::span<const float> data() const { return data_; }

  /// FNV-1a over (n, d, payload bytes).
  std::uint64_t fingerprint() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::size_t n_;
  std::size_t d_;
  std::vector<float> data_;
};

/// Rows `ids` of `source`, in the given order. Row j of the result is
/// source row ids[j].
Dataset gather_rows(const Dataset& source, std::span<const PointId> ids);

/// `m` distinct ids drawn uniformly from [0, n), ascending. All ids when
/// m >= n.
std::vector<PointId> sample_ids(std::size_t n, std::size_t m, std::uint64_t seed);

/// Splits off the last `tail` rows into a second dataset.
std::pair<Dataset, Dataset> split_tail(const Dataset& source, std::size_t tail);

/// Result of a k-nearest-neighbor query: ids ascending by (distance, id).
struct KnnResult {
  std::vector<PointId> ids;
  std::vector<float> dists;

  std::size_t size() const { return ids.size(); }
  friend bool operator==(const KnnResult&, const KnnResult&) = default;
};

struct SyntheticSpec {
  std::size_t n = 10000;
  std::size_t d = 16;
  std::size_t clusters = 16;
  float spread = 0.02f;
  std::uint64_t seed = 42;
};

/// Gaussian mixture: `clusters` means drawn uniformly in [0,1]^d, isotropic
/// standard deviation `spread`, components chosen uniformly per row.
Dataset gen_synthetic(const SyntheticSpec& spec);

/// Means that gen_synthetic(spec) draws, in component order.
std::vector<float> synthetic_means(const SyntheticSpec& spec);

}  // namespace lira
