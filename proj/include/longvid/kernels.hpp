// Copyright 2026 The longvid Authors
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
//
// 1-D numeric primitives: forward passes plus vector-Jacobian products.
//
// The default entry points are OpenMP-parallel. Parallel loops only ever
// split independent output elements; every accumulation runs serially in
// one thread, so results are bit-identical for any thread count and match
// the serial reference in longvid::ref exactly. All functions are pure.
//
// Convolution is grouped cross-correlation with zero padding. Weight layout
// for a Conv1DSpec is out_channels x ((in_channels/groups) * kernel_size),
// row-major over (group input channel, tap).

#ifndef LONGVID_KERNELS_HPP_
#define LONGVID_KERNELS_HPP_

#include <cstddef>
#include <vector>

#include "longvid/tensor.hpp"

namespace longvid {

struct Conv1DSpec {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel_size = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;  // zero padding on both ends
  std::size_t groups = 1;

  void validate() const;
  /// floor((length + 2*padding - kernel_size) / stride) + 1; throws when
  /// the result would be non-positive.
  std::size_t out_length(std::size_t length) const;
  std::size_t weight_cols() const { return (in_channels / groups) * kernel_size; }
};

struct Conv1DGrads {
  Tensor2D input;
  Tensor2D weight;
  std::vector<double> bias;
};

struct LinearGrads {
  Tensor2D input;
  Tensor2D weight;
  std::vector<double> bias;
};

struct LayerNormGrads {
  Tensor2D input;
  std::vector<double> gamma;
  std::vector<double> beta;
};

// input: in_channels x length, output: out_channels x out_length.
Tensor2D conv1d(const Tensor2D& input, const Conv1DSpec& spec, const Tensor2D& weight,
                const std::vector<double>& bias);
Conv1DGrads conv1d_vjp(const Tensor2D& input, const Conv1DSpec& spec, const Tensor2D& weight,
                       const Tensor2D& grad_out);

// Non-overlapping mean pooling along length; stride = window.
Tensor2D avg_pool1d(const Tensor2D& input, std::size_t window);
Tensor2D avg_pool1d_vjp(const Tensor2D& grad_out, std::size_t window);

// Nearest-neighbor repetition along length.
Tensor2D upsample_nearest(const Tensor2D& input, std::size_t factor);
Tensor2D upsample_nearest_vjp(const Tensor2D& grad_out, std::size_t factor);

// Normalization across the channel dimension at each length position.
Tensor2D channel_layer_norm(const Tensor2D& input, const std::vector<double>& gamma,
                            const std::vector<double>& beta, double eps);
LayerNormGrads channel_layer_norm_vjp(const Tensor2D& input, const std::vector<double>& gamma,
                                      const std::vector<double>& beta, double eps,
                                      const Tensor2D& grad_out);

// Exact erf-based GELU: x * Phi(x).
Tensor2D gelu(const Tensor2D& input);
Tensor2D gelu_vjp(const Tensor2D& input, const Tensor2D& grad_out);
double gelu_scalar(double x);

// input: rows x in_dim, weight: out_dim x in_dim, bias: out_dim.
Tensor2D linear(const Tensor2D& input, const Tensor2D& weight, const std::vector<double>& bias);
LinearGrads linear_vjp(const Tensor2D& input, const Tensor2D& weight, const Tensor2D& grad_out);

// Serial implementations written from the operation definitions; kept as
// the comparison baseline for the parallel kernels and the benchmarks.
namespace ref {

Tensor2D conv1d(const Tensor2D& input, const Conv1DSpec& spec, const Tensor2D& weight,
                const std::vector<double>& bias);
Conv1DGrads conv1d_vjp(const Tensor2D& input, const Conv1DSpec& spec, const Tensor2D& weight,
                       const Tensor2D& grad_out);
Tensor2D avg_pool1d(const Tensor2D& input, std::size_t window);
Tensor2D avg_pool1d_vjp(const Tensor2D& grad_out, std::size_t window);
Tensor2D upsample_nearest(const Tensor2D& input, std::size_t factor);
Tensor2D upsample_nearest_vjp(const Tensor2D& grad_out, std::size_t factor);
Tensor2D channel_layer_norm(const Tensor2D& input, const std::vector<double>& gamma,
                            const std::vector<double>& beta, double eps);
LayerNormGrads channel_layer_norm_vjp(const Tensor2D& input, const std::vector<double>& gamma,
                                      const std::vector<double>& beta, double eps,
                                      const Tensor2D& grad_out);
Tensor2D gelu(const Tensor2D& input);
Tensor2D gelu_vjp(const Tensor2D& input, const Tensor2D& grad_out);
Tensor2D linear(const Tensor2D& input, const Tensor2D& weight, const std::vector<double>& bias);
LinearGrads linear_vjp(const Tensor2D& input, const Tensor2D& weight, const Tensor2D& grad_out);

}  // namespace ref

}  // namespace longvid

#endif  // LONGVID_KERNELS_HPP_
