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


#include "lira/index_io.hpp"

#include "lira/binary_io.hpp"
#include "lira/model_io.hpp"

namespace lira {

std::vector<std::uint8_t> encode_index(const IndexFile& index) {
  const PartitionLayout& layout = index.layout;
  const std::size_t b = layout.num_partitions();
  const std::size_t d = layout.dim();
  ByteWriter w;
  w.put_magic("LIRA");
  w.put<std::uint32_t>(kIndexFormatVersion);
  w.put<std::uint64_t>(index.dataset_fingerprint);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(b));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(layout.kind()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(layout.num_points()));
  for (PartitionId p = 0; p < b; ++p) {
    w.put<std::int32_t>(static_cast<std::int32_t>(d));
    w.put_array(layout.centroid(p));
  }
  w.put_array(layout.homes());
  for (PartitionId p = 0; p < b; ++p) {
    const auto members = layout.members(p);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(members.size()));
    w.put_array(members);
  }
  w.put<std::uint32_t>(index.plan ? 1 : 0);
  if (index.plan) {
    const auto& plan = *index.plan;
    w.put<double>(plan.eta);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(plan.picks.size()));
    for (std::size_t i = 0; i < plan.picks.size(); ++i) {
      w.put<std::uint32_t>(plan.picks[i]);
      w.put<std::uint32_t>(plan.targets[i]);
    }
  }
  w.put<std::uint32_t>(index.model ? 1 : 0);
  if (index.model) {
    const auto model_bytes = encode_model(*index.model);
    w.put<std::uint64_t>(model_bytes.size());
    w.put_bytes(model_bytes);
  }
  return w.take();
}

IndexFile decode_index(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("LIRA");
  const auto version = r.get<std::uint32_t>();
  if (version != kIndexFormatVersion) {
    throw FormatError("unsupported index format version " +
                          std::to_string(version),
                      r.offset() - 4);
  }
  const auto fingerprint = r.get<std::uint64_t>();
  const std::size_t b = r.get<std::uint32_t>();
  const std::size_t d = r.get<std::uint32_t>();
  const auto kind_raw = r.get<std::uint32_t>();
  if (kind_raw > static_cast<std::uint32_t>(LayoutKind::kRedundant)) {
    throw FormatError("unknown layout kind " + std::to_string(kind_raw),
                      r.offset() - 4);
  }
  const std::size_t n = r.get<std::uint32_t>();
  if (b == 0 || d == 0) throw FormatError("empty layout header", r.offset());
  // Each partition needs at least 4 + 4d bytes of centroid and 4 of length.
  if (r.remaining() / (8 + 4 * d) < b || r.remaining() / 4 < n) {
    throw FormatError("layout header exceeds file size", r.offset());
  }

  std::vector<float> centroids(b * d);
  for (std::size_t p = 0; p < b; ++p) {
    const std::size_t at = r.offset();
    if (r.get<std::int32_t>() != static_cast<std::int32_t>(d)) {
      throw FormatError("centroid record dimension mismatch", at);
    }
    r.get_array(std::span<float>(centroids.data() + p * d, d));
  }
  std::vector<PartitionId> homes(n);
  r.get_array(std::span<PartitionId>(homes));
  std::vector<std::vector<PointId>> members(b);
  for (auto& list : members) {
    const std::size_t len = r.get<std::uint32_t>();
    if (len > r.remaining() / 4) {
      throw FormatError("member list exceeds file size", r.offset() - 4);
    }
    list.resize(len);
    r.get_array(std::span<PointId>(list));
  }

  std::optional<RedundancyPlan> plan;
  if (r.get<std::uint32_t>() != 0) {
    RedundancyPlan p;
    p.eta = r.get<double>();
    const std::size_t count = r.get<std::uint32_t>();
    if (count > r.remaining() / 8) {
      throw FormatError("redundancy plan exceeds file size", r.offset() - 4);
    }
    for (std::size_t i = 0; i < count; ++i) {
      p.picks.push_back(r.get<std::uint32_t>());
      p.targets.push_back(r.get<std::uint32_t>());
    }
    plan = std::move(p);
  }
  std::optional<ProbingModel> model;
  if (r.get<std::uint32_t>() != 0) {
    const auto len = r.get<std::uint64_t>();
    if (len > r.remaining()) {
      throw FormatError("embedded model exceeds file size", r.offset() - 8);
    }
    model = decode_model(r.get_bytes(static_cast<std::size_t>(len)));
  }
  if (!r.at_end()) throw FormatError("trailing bytes after index", r.offset());

  const std::size_t at = r.offset();
  try {
    PartitionLayout layout(static_cast<LayoutKind>(kind_raw), d,
                           std::move(centroids), std::move(members),
                           std::move(homes));
    return IndexFile{fingerprint, std::move(layout), std::move(plan),
                     std::move(model)};
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("inconsistent layout: ") + e.what(), at);
  }
}

void save_index(const IndexFile& index, const std::string& path) {
  write_file_bytes(path, encode_index(index));
}

IndexFile load_index(const std::string& path) {
  return decode_index(read_file_bytes(path));
}

}  // namespace lira
