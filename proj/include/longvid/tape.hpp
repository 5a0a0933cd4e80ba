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
// Temporal adaptive position encoder: a three-level U-Net-like stack of
// 1-D depthwise-separable convolutions over the token sequence. The zero
// padding at both sequence ends is the only source of absolute position;
// it anchors the features so relative positions propagate inward. The
// final linear layer starts at exactly zero so the encoder is a no-op
// when freshly initialized.

#ifndef LONGVID_TAPE_HPP_
#define LONGVID_TAPE_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "longvid/kernels.hpp"
#include "longvid/tensor.hpp"

namespace longvid {

// LayerNorm epsilon used by every norm in the encoder.
inline constexpr double kTapeLayerNormEps = 1e-5;

struct TapeConfig {
  std::size_t merge_len = 4;    // token-shuffle m; depthwise kernels are merge_len(+/-*)1
  std::size_t clip_num = 16;    // clip count K; fc kernel is clip_num+1
  std::size_t input_dim = 768;  // encoder token channels (C_q)
  std::size_t mid_dim = 256;
  std::size_t output_dim = 4096;  // LM channels (C_l)
  std::size_t sample_rate = 2;    // downsample stride per U-Net level

  /// merge_len even and >= 2, clip_num even, sample_rate >= 1: the conv
  /// kernels must be odd for exact length preservation across the
  /// residual adds.
  void validate() const;

  /// Token count must divide by merge_len * sample_rate^2.
  void validate_length(std::size_t tokens) const;

  std::size_t output_rows(std::size_t tokens) const { return tokens / merge_len; }

  /// Number of output rows at each sequence end that can differ from the
  /// constant-input interior: the accumulated reach of the zero-padding
  /// anchors through every conv, upsample, and residual of the stack.
  std::size_t boundary_margin() const;

  // Layer shapes (weight layout documented in kernels.hpp).
  Conv1DSpec down_depthwise_spec() const;
  Conv1DSpec pointwise_spec() const;
  Conv1DSpec fc_conv_spec() const;
  Conv1DSpec refine_depthwise_spec() const;
};

/// Depthwise conv + pointwise conv + channel layer norm (+ GELU applied by
/// the forward pass).
struct ConvBlockParams {
  Tensor2D depthwise_w;
  std::vector<double> depthwise_b;
  Tensor2D pointwise_w;
  std::vector<double> pointwise_b;
  std::vector<double> gamma;
  std::vector<double> beta;
};

/// Full (ungrouped) conv + channel layer norm (+ GELU).
struct FcBlockParams {
  Tensor2D conv_w;
  std::vector<double> conv_b;
  std::vector<double> gamma;
  std::vector<double> beta;
};

struct TapeParams {
  Tensor2D linear_input_w;  // mid_dim x input_dim
  std::vector<double> linear_input_b;
  ConvBlockParams down1;
  ConvBlockParams down2;
  FcBlockParams fc;
  ConvBlockParams conv2;
  ConvBlockParams conv1;
  Tensor2D linear_output_w;  // output_dim x mid_dim, zero at init
  std::vector<double> linear_output_b;
  // When set, the VJP reports zero for every parameter gradient while the
  // input gradient still flows (first-epoch training schedule).
  bool frozen = false;
};

/// Seeded init: conv and linear weights/biases uniform over
/// +/- 1/sqrt(fan_in), norm affines at (1, 0), final linear exactly zero.
/// Draw order is fixed (linear_input, down1, down2, fc, conv2, conv1).
TapeParams tape_init(const TapeConfig& config, std::uint64_t seed);

/// v_q: tokens x input_dim -> v_t: (tokens / merge_len) x output_dim.
Tensor2D tape_forward(const Tensor2D& v_q, const TapeConfig& config, const TapeParams& params);

/// Intermediate activations captured for the backward pass.
struct TapeTrace {
  Tensor2D input;        // tokens x input_dim
  Tensor2D stem;         // mid x L, transposed linear_input output
  Tensor2D level1;       // mid x L1, pooled
  struct Block {
    Tensor2D in, dw, pw, ln;  // ln is the pre-GELU normalized activation
  };
  Block down1, down2, conv2, conv1;
  struct Fc {
    Tensor2D in, conv, ln;
  } fc;
  Tensor2D merged2;  // upsample(fc out) + down1 out
  Tensor2D merged1;  // upsample(conv2 out) + level1
  Tensor2D head_in;  // L1 x mid, input of linear_output
};

Tensor2D tape_forward_cached(const Tensor2D& v_q, const TapeConfig& config,
                             const TapeParams& params, TapeTrace& trace);

struct TapeGrads {
  Tensor2D input;
  TapeParams params;  // same shapes as the parameters, gradient values
};

TapeGrads tape_vjp(const TapeConfig& config, const TapeParams& params, const TapeTrace& trace,
                   const Tensor2D& grad_out);

/// Residual fuse of compressed tokens with their position features.
Tensor2D fuse(const Tensor2D& v_l, const Tensor2D& v_t);

}  // namespace longvid

#endif  // LONGVID_TAPE_HPP_
