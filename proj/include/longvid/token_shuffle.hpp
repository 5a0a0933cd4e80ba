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
// Token sequence compression: groups of m adjacent tokens are concatenated
// along the channel axis and mapped by one linear projection. The tiled
// 1/m initialization makes the fresh projector reproduce mean pooling
// through the pretrained base projector exactly.

#ifndef LONGVID_TOKEN_SHUFFLE_HPP_
#define LONGVID_TOKEN_SHUFFLE_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "longvid/kernels.hpp"
#include "longvid/tensor.hpp"

namespace longvid {

struct ShuffleConfig {
  std::size_t m = 4;      // adjacent tokens merged per output token
  std::size_t c_q = 768;  // encoder channel dim
  std::size_t c_l = 4096; // language-model channel dim

  void validate() const;
};

struct ShuffleParams {
  Tensor2D weight;           // c_l x (m * c_q)
  std::vector<double> bias;  // c_l
};

/// Rows (i*m .. i*m + m-1) of v_q become output row i, concatenated in
/// order; values are copied untouched. Token count L must divide by m.
Tensor2D merge_adjacent(const Tensor2D& v_q, std::size_t m);

/// Adjoint of merge_adjacent (the inverse reshape).
Tensor2D merge_adjacent_vjp(const Tensor2D& grad_out, std::size_t m);

/// Per-row affine projection of merged tokens to the LM dimension.
Tensor2D project(const Tensor2D& v_m, const ShuffleParams& params);
LinearGrads project_vjp(const Tensor2D& v_m, const ShuffleParams& params, const Tensor2D& grad_out);

/// Tile the base projector m times along the input-channel axis, scaling
/// each copy by 1/m; bias is carried over unchanged. Guarantees
/// project(merge_adjacent(v, m)) == linear(mean_pool_rows(v, m), w0, b0).
ShuffleParams efficient_init(const Tensor2D& w0, const std::vector<double>& b0, std::size_t m);

/// Seeded random projector, the "w/o init" ablation baseline.
ShuffleParams random_init(const ShuffleConfig& config, std::uint64_t seed);

/// Mean over every window of m consecutive rows.
Tensor2D mean_pool_rows(const Tensor2D& v_q, std::size_t m);

/// Pooling-compression baseline: mean pool rows, then project with the
/// base parameters.
Tensor2D mean_pool_compress(const Tensor2D& v_q, std::size_t m, const Tensor2D& w0,
                            const std::vector<double>& b0);

}  // namespace longvid

#endif  // LONGVID_TOKEN_SHUFFLE_HPP_
