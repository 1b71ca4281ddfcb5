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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lira/model.hpp"
#include "lira/partition.hpp"
#include "lira/redundancy.hpp"

namespace lira {

// Index file layout (all little-endian):
//   "LIRA" | u32 version | u64 dataset fingerprint | u32 B | u32 d
//   | u32 kind | u32 N
//   | B centroid records: i32 d, f32[d]
//   | N home partitions: u32[N]
//   | B member lists: u32 length, u32[length] ids
//   | u32 has_plan [ f64 eta, u32 count, count x (u32 id, u32 target) ]
//   | u32 has_model [ u64 byte length, model file bytes ]

inline constexpr std::uint32_t kIndexFormatVersion = 1;

struct IndexFile {
  std::uint64_t dataset_fingerprint = 0;
  PartitionLayout layout;
  std::optional<RedundancyPlan> plan;
  std::optional<ProbingModel> model;
};

std::vector<std::uint8_t> encode_index(const IndexFile& index);
IndexFile decode_index(std::span<const std::uint8_t> bytes);

void save_index(const IndexFile& index, const std::string& path);
IndexFile load_index(const std::string& path);

}  // namespace lira
