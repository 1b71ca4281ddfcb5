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
#include <vector>

#include "lira/model.hpp"

namespace lira {

// Model file layout (all little-endian):
//   "LIRM" | u32 version | u32 d | u32 B | f32 sigma_train
//   | u32 nq, nq x u32 query widths | u32 ni, ... | u32 nh, ... head hidden
//   | f32[d] query mean | f32[d] query std | f32[B] dist mean | f32[B] dist std
//   | per layer of query, dist, head: f32[out*in] weight (row-major),
//     f32[out] bias

inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> encode_model(const ProbingModel& model);
ProbingModel decode_model(std::span<const std::uint8_t> bytes);

void save_model(const ProbingModel& model, const std::string& path);
ProbingModel load_model(const std::string& path);

}  // namespace lira
