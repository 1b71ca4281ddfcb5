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


#include "lira/model_io.hpp"

#include <cmath>

#include "lira/binary_io.hpp"

namespace lira {

namespace {

constexpr std::uint32_t kMaxWidth = 1u << 20;

void put_widths(ByteWriter& w, const std::vector<std::size_t>& widths) {
  w.put<std::uint32_t>(static_cast<std::uint32_t>(widths.size()));
  for (std::size_t v : widths) w.put<std::uint32_t>(static_cast<std::uint32_t>(v));
}

std::vector<std::size_t> get_widths(ByteReader& r) {
  const auto n = r.get<std::uint32_t>();
  if (n > 64) throw FormatError("implausible layer count", r.offset() - 4);
  std::vector<std::size_t> widths(n);
  for (auto& v : widths) {
    v = r.get<std::uint32_t>();
    if (v == 0 || v > kMaxWidth) {
      throw FormatError("invalid layer width", r.offset() - 4);
    }
  }
  return widths;
}

void put_vector(ByteWriter& w, const nn::Vector<float>& v) {
  w.put_array(std::span<const float>(v.data(), static_cast<std::size_t>(v.size())));
}

void get_vector(ByteReader& r, nn::Vector<float>& v) {
  r.get_array(std::span<float>(v.data(), static_cast<std::size_t>(v.size())));
}

void put_mlp(ByteWriter& w, const nn::Mlp<float>& mlp) {
  for (const auto& layer : mlp.layers) {
    for (Eigen::Index row = 0; row < layer.weight.rows(); ++row) {
      for (Eigen::Index col = 0; col < layer.weight.cols(); ++col) {
        w.put(layer.weight(row, col));
      }
    }
    put_vector(w, layer.bias);
  }
}

void get_mlp(ByteReader& r, nn::Mlp<float>& mlp) {
  for (auto& layer : mlp.layers) {
    for (Eigen::Index row = 0; row < layer.weight.rows(); ++row) {
      for (Eigen::Index col = 0; col < layer.weight.cols(); ++col) {
        layer.weight(row, col) = r.get<float>();
      }
    }
    get_vector(r, layer.bias);
  }
}

void check_finite(const ProbingModel& model, std::size_t offset) {
  bool ok = true;
  auto params = model.params();
  params.for_each_tensor([&](float* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) ok = ok && std::isfinite(p[i]);
  });
  const auto& qn = model.query_norm();
  const auto& dn = model.dist_norm();
  ok = ok && qn.mean.allFinite() && dn.mean.allFinite() &&
       qn.stddev.allFinite() && dn.stddev.allFinite() &&
       (qn.stddev.array() > 0.0f).all() && (dn.stddev.array() > 0.0f).all();
  if (!ok) throw FormatError("model holds non-finite or invalid values", offset);
}

}  // namespace

std::vector<std::uint8_t> encode_model(const ProbingModel& model) {
  const ModelShape& s = model.shape();
  ByteWriter w;
  w.put_magic("LIRM");
  w.put<std::uint32_t>(kModelFormatVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.dim));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.num_partitions));
  w.put<float>(s.sigma_train);
  put_widths(w, s.query_widths);
  put_widths(w, s.dist_widths);
  put_widths(w, s.head_widths);
  put_vector(w, model.query_norm().mean);
  put_vector(w, model.query_norm().stddev);
  put_vector(w, model.dist_norm().mean);
  put_vector(w, model.dist_norm().stddev);
  put_mlp(w, model.params().query);
  put_mlp(w, model.params().dist);
  put_mlp(w, model.params().head);
  return w.take();
}

ProbingModel decode_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("LIRM");
  const auto version = r.get<std::uint32_t>();
  if (version != kModelFormatVersion) {
    throw FormatError("unsupported model format version " +
                          std::to_string(version) + " (expected " +
                          std::to_string(kModelFormatVersion) + ")",
                      r.offset() - 4);
  }
  ModelShape shape;
  shape.dim = r.get<std::uint32_t>();
  shape.num_partitions = r.get<std::uint32_t>();
  if (shape.dim == 0 || shape.dim > kMaxWidth || shape.num_partitions == 0 ||
      shape.num_partitions > kMaxWidth) {
    throw FormatError("invalid model dimensions", r.offset() - 8);
  }
  shape.sigma_train = r.get<float>();
  shape.query_widths = get_widths(r);
  shape.dist_widths = get_widths(r);
  shape.head_widths = get_widths(r);
  if (shape.query_widths.empty() || shape.dist_widths.empty()) {
    throw FormatError("feature networks need at least one layer", r.offset());
  }

  std::uint64_t floats = 2 * shape.dim + 2 * shape.num_partitions;
  auto add_layers = [&](std::size_t in, std::vector<std::size_t> widths) {
    for (std::size_t w : widths) {
      floats += static_cast<std::uint64_t>(w) * (in + 1);
      in = w;
    }
  };
  add_layers(shape.dim, shape.query_widths);
  add_layers(shape.num_partitions, shape.dist_widths);
  auto head = shape.head_widths;
  head.push_back(shape.num_partitions);
  add_layers(shape.query_widths.back() + shape.dist_widths.back(), head);
  if (floats * 4 != r.remaining()) {
    throw FormatError("model payload holds " + std::to_string(r.remaining()) +
                          " bytes, header declares " +
                          std::to_string(floats * 4),
                      r.offset());
  }

  // Shapes come from init(); values are overwritten below.
  ProbingModel model = ProbingModel::init(shape, 0);
  InputNorm<float> qn = model.query_norm(), dn = model.dist_norm();
  get_vector(r, qn.mean);
  get_vector(r, qn.stddev);
  get_vector(r, dn.mean);
  get_vector(r, dn.stddev);
  model.set_normalization(std::move(qn), std::move(dn));
  get_mlp(r, model.params().query);
  get_mlp(r, model.params().dist);
  get_mlp(r, model.params().head);
  if (!r.at_end()) {
    throw FormatError("trailing bytes after model payload", r.offset());
  }
  check_finite(model, r.offset());
  return model;
}

void save_model(const ProbingModel& model, const std::string& path) {
  write_file_bytes(path, encode_model(model));
}

ProbingModel load_model(const std::string& path) {
  return decode_model(read_file_bytes(path));
}

}  // namespace lira
