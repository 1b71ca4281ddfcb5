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


#include "lira/vecs_io.hpp"

#include <cmath>

#include "lira/binary_io.hpp"

namespace lira {

VecsFormat parse_vecs_format(std::string_view name) {
  if (name == "fvecs") return VecsFormat::kFvecs;
  if (name == "bvecs") return VecsFormat::kBvecs;
  if (name == "ivecs") return VecsFormat::kIvecs;
  throw InvalidArgument("unknown vector format: " + std::string(name));
}

VecsFormat vecs_format_from_path(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot == std::string::npos) {
    throw InvalidArgument("cannot infer vector format of " + path);
  }
  return parse_vecs_format(std::string_view(path).substr(dot + 1));
}

namespace {

std::size_t component_size(VecsFormat format) {
  return format == VecsFormat::kBvecs ? 1 : 4;
}

// Walks the records and returns (n, d). Every record must repeat the
// dimension of the first one.
std::pair<std::size_t, std::size_t> scan_records(
    std::span<const std::uint8_t> bytes, VecsFormat format) {
  if (bytes.empty()) throw FormatError("empty vector file", 0);
  ByteReader reader(bytes);
  const auto first = reader.get<std::int32_t>();
  if (first <= 0) {
    throw FormatError("non-positive dimension " + std::to_string(first), 0);
  }
  const std::size_t d = static_cast<std::size_t>(first);
  const std::size_t record = 4 + d * component_size(format);
  if (bytes.size() % record != 0) {
    throw FormatError("file size " + std::to_string(bytes.size()) +
                          " is not a multiple of record size " +
                          std::to_string(record),
                      bytes.size() - bytes.size() % record);
  }
  const std::size_t n = bytes.size() / record;
  for (std::size_t i = 1; i < n; ++i) {
    ByteReader at(bytes.subspan(i * record));
    const auto dim = at.get<std::int32_t>();
    if (dim != first) {
      throw FormatError("inconsistent dimension " + std::to_string(dim) +
                            ", expected " + std::to_string(first),
                        i * record);
    }
  }
  return {n, d};
}

}  // namespace

Dataset decode_vectors(std::span<const std::uint8_t> bytes,
                       VecsFormat format) {
  const auto [n, d] = scan_records(bytes, format);
  std::vector<float> data(n * d);
  ByteReader reader(bytes);
  for (std::size_t i = 0; i < n; ++i) {
    reader.get<std::int32_t>();
    float* row = data.data() + i * d;
    switch (format) {
      case VecsFormat::kFvecs:
        reader.get_array(std::span<float>(row, d));
        break;
      case VecsFormat::kBvecs: {
        auto raw = reader.get_bytes(d);
        for (std::size_t j = 0; j < d; ++j) row[j] = raw[j];
        break;
      }
      case VecsFormat::kIvecs:
        for (std::size_t j = 0; j < d; ++j) {
          row[j] = static_cast<float>(reader.get<std::int32_t>());
        }
        break;
    }
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      const std::size_t r = i / d;
      throw FormatError("non-finite value in record " + std::to_string(r),
                        r * (4 + d * component_size(format)));
    }
  }
  return Dataset(n, d, std::move(data));
}

IntMatrix decode_ivecs(std::span<const std::uint8_t> bytes) {
  const auto [n, d] = scan_records(bytes, VecsFormat::kIvecs);
  IntMatrix m{n, d, std::vector<std::int32_t>(n * d)};
  ByteReader reader(bytes);
  for (std::size_t i = 0; i < n; ++i) {
    reader.get<std::int32_t>();
    reader.get_array(std::span<std::int32_t>(m.data.data() + i * d, d));
  }
  return m;
}

std::vector<std::uint8_t> encode_vectors(const Dataset& dataset,
                                         VecsFormat format) {
  const std::size_t d = dataset.dim();
  ByteWriter w;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    w.put<std::int32_t>(static_cast<std::int32_t>(d));
    auto row = dataset.row(i);
    switch (format) {
      case VecsFormat::kFvecs:
        w.put_array(row);
        break;
      case VecsFormat::kBvecs:
        for (float v : row) {
          if (!(v >= 0.0f && v <= 255.0f) || std::floor(v) != v) {
            throw InvalidArgument("bvecs requires integers in [0,255], row " +
                                  std::to_string(i) + " holds " +
                                  std::to_string(v));
          }
          w.put<std::uint8_t>(static_cast<std::uint8_t>(v));
        }
        break;
      case VecsFormat::kIvecs:
        for (float v : row) {
          if (std::floor(v) != v || std::fabs(v) > 2147483520.0f) {
            throw InvalidArgument("ivecs requires int32 values, row " +
                                  std::to_string(i));
          }
          w.put<std::int32_t>(static_cast<std::int32_t>(v));
        }
        break;
    }
  }
  return w.take();
}

std::vector<std::uint8_t> encode_ivecs(const IntMatrix& matrix) {
  LIRA_REQUIRE(matrix.n >= 1 && matrix.d >= 1, "empty id matrix");
  LIRA_REQUIRE(matrix.data.size() == matrix.n * matrix.d,
               "payload size does not match n*d");
  ByteWriter w;
  for (std::size_t i = 0; i < matrix.n; ++i) {
    w.put<std::int32_t>(static_cast<std::int32_t>(matrix.d));
    w.put_array(matrix.row(i));
  }
  return w.take();
}

Dataset read_vectors(const std::string& path, VecsFormat format) {
  return decode_vectors(read_file_bytes(path), format);
}

void write_vectors(const Dataset& dataset, const std::string& path,
                   VecsFormat format) {
  write_file_bytes(path, encode_vectors(dataset, format));
}

IntMatrix read_ivecs(const std::string& path) {
  return decode_ivecs(read_file_bytes(path));
}

void write_ivecs(const IntMatrix& matrix, const std::string& path) {
  write_file_bytes(path, encode_ivecs(matrix));
}

}  // namespace lira
