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

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

namespace lira::nn {

// Column-major batches: every column is one example.
template <typename S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <typename S>
struct DenseLayer {
  Matrix<S> weight;  // out x in
  Vector<S> bias;    // out

  std::size_t in_features() const { return weight.cols(); }
  std::size_t out_features() const { return weight.rows(); }
};

/// Stack of dense layers with ReLU between them. `relu_output` also applies
/// ReLU after the last layer (feature extractors); heads leave it linear.
template <typename S>
struct Mlp {
  std::vector<DenseLayer<S>> layers;
  bool relu_output = true;

  template <typename T>
  Mlp<T> cast() const {
    Mlp<T> out;
    out.relu_output = relu_output;
    for (const auto& l : layers) {
      out.layers.push_back({l.weight.template cast<T>(),
                            l.bias.template cast<T>()});
    }
    return out;
  }

  /// Same shapes, all zeros.
  Mlp zeros_like() const {
    Mlp out;
    out.relu_output = relu_output;
    for (const auto& l : layers) {
      out.layers.push_back({Matrix<S>::Zero(l.weight.rows(), l.weight.cols()),
                            Vector<S>::Zero(l.bias.size())});
    }
    return out;
  }

  std::size_t in_features() const { return layers.front().in_features(); }
  std::size_t out_features() const { return layers.back().out_features(); }
};

/// Builds an MLP with layer widths `in -> widths[0] -> ... -> widths.back()`,
/// He-normal weights and zero biases.
template <typename S>
Mlp<S> make_mlp(std::size_t in, const std::vector<std::size_t>& widths,
                bool relu_output, std::mt19937_64& rng) {
  Mlp<S> mlp;
  mlp.relu_output = relu_output;
  std::size_t fan_in = in;
  for (std::size_t w : widths) {
    std::normal_distribution<double> init(0.0, std::sqrt(2.0 / fan_in));
    DenseLayer<S> layer{Matrix<S>(w, fan_in), Vector<S>::Zero(w)};
    // Row-major fill order keeps initialization independent of storage.
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        layer.weight(r, c) = static_cast<S>(init(rng));
      }
    }
    mlp.layers.push_back(std::move(layer));
    fan_in = w;
  }
  return mlp;
}

/// Activations kept by the forward pass for backprop.
template <typename S>
struct MlpTrace {
  std::vector<Matrix<S>> inputs;  // input to each layer
  std::vector<Matrix<S>> pre;     // pre-activation of each layer
};

template <typename S>
bool relu_after(const Mlp<S>& mlp, std::size_t layer) {
  return layer + 1 < mlp.layers.size() || mlp.relu_output;
}

template <typename S>
Matrix<S> forward(const Mlp<S>& mlp, const Matrix<S>& x,
                  MlpTrace<S>* trace = nullptr) {
  Matrix<S> a = x;
  for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
    const auto& layer = mlp.layers[l];
    Matrix<S> z = layer.weight * a;
    z.colwise() += layer.bias;
    if (trace) {
      trace->inputs.push_back(std::move(a));
      trace->pre.push_back(z);
    }
    a = relu_after(mlp, l) ? Matrix<S>(z.cwiseMax(S(0))) : std::move(z);
  }
  return a;
}

/// Accumulates parameter gradients into `grads` and returns the gradient
/// with respect to the MLP input. `grad_out` is dLoss/dOutput.
template <typename S>
Matrix<S> backward(const Mlp<S>& mlp, const MlpTrace<S>& trace,
                   Matrix<S> grad_out, Mlp<S>& grads) {
  for (std::size_t l = mlp.layers.size(); l-- > 0;) {
    if (relu_after(mlp, l)) {
      grad_out = grad_out.cwiseProduct(
          (trace.pre[l].array() > S(0)).template cast<S>().matrix());
    }
    grads.layers[l].weight.noalias() += grad_out * trace.inputs[l].transpose();
    grads.layers[l].bias += grad_out.rowwise().sum();
    grad_out = mlp.layers[l].weight.transpose() * grad_out;
  }
  return grad_out;
}

/// Calls f(S* data, size) for every weight and bias tensor, in the fixed
/// order weight0, bias0, weight1, bias1, ...
template <typename S, typename F>
void for_each_tensor(Mlp<S>& mlp, F&& f) {
  for (auto& l : mlp.layers) {
    f(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
    f(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
}

}  // namespace lira::nn
