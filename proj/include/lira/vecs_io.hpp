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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lira/dataset.hpp"

namespace lira {

// Readers and writers for the TEXMEX formats used by SIFT/GIST/BIGANN:
// every record is a little-endian int32 dimension followed by that many
// components (float32 for fvecs, uint8 for bvecs, int32 for ivecs).

enum class VecsFormat { kFvecs, kBvecs, kIvecs };

VecsFormat parse_vecs_format(std::string_view name);
/// Guess from the file extension (".fvecs", ".bvecs", ".ivecs").
VecsFormat vecs_format_from_path(const std::string& path);

/// Row-major n x d matrix of int32, the payload of an ivecs file.
struct IntMatrix {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<std::int32_t> data;

  std::span<const std::int32_t> row(std::size_t i) const {
    return {data.data() + i * d, d};
  }
  friend bool operator==(const IntMatrix&, const IntMatrix&) = default;
};

Dataset decode_vectors(std::span<const std::uint8_t> bytes, VecsFormat format);
IntMatrix decode_ivecs(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_vectors(const Dataset& dataset,
                                         VecsFormat format);
std::vector<std::uint8_t> encode_ivecs(const IntMatrix& matrix);

/// fvecs or bvecs into a Dataset; throws FormatError on truncation,
/// inconsistent or non-positive dimension.
Dataset read_vectors(const std::string& path, VecsFormat format);
void write_vectors(const Dataset& dataset, const std::string& path,
                   VecsFormat format);

IntMatrix read_ivecs(const std::string& path);
void write_ivecs(const IntMatrix& matrix, const std::string& path);

}  // namespace lira
