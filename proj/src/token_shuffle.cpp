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

#include "longvid/token_shuffle.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "longvid/rng.hpp"

namespace longvid {

void ShuffleConfig::validate() const {
  if (m < 1) throw std::invalid_argument("shuffle: m must be >= 1");
  if (c_q < 1 || c_l < 1) throw std::invalid_argument("shuffle: channel dims must be >= 1");
}

Tensor2D merge_adjacent(const Tensor2D& v_q, std::size_t m) {
  if (m < 1) throw std::invalid_argument("merge_adjacent: m must be >= 1");
  if (v_q.rows() % m != 0)
    throw std::invalid_argument("merge_adjacent: token count " + std::to_string(v_q.rows()) +
                                " not divisible by m=" + std::to_string(m));
  // Row-major L x c_q means m consecutive rows are already contiguous;
  // merging is a pure reshape.
  Tensor2D out(v_q.rows() / m, v_q.cols() * m);
  std::memcpy(out.data(), v_q.data(), v_q.size() * sizeof(double));
  return out;
}

Tensor2D merge_adjacent_vjp(const Tensor2D& grad_out, std::size_t m) {
  if (m < 1 || grad_out.cols() % m != 0)
    throw std::invalid_argument("merge_adjacent_vjp: channel count not divisible by m");
  Tensor2D g(grad_out.rows() * m, grad_out.cols() / m);
  std::memcpy(g.data(), grad_out.data(), grad_out.size() * sizeof(double));
  return g;
}

Tensor2D project(const Tensor2D& v_m, const ShuffleParams& params) {
  return linear(v_m, params.weight, params.bias);
}

LinearGrads project_vjp(const Tensor2D& v_m, const ShuffleParams& params, const Tensor2D& grad_out) {
  return linear_vjp(v_m, params.weight, grad_out);
}

ShuffleParams efficient_init(const Tensor2D& w0, const std::vector<double>& b0, std::size_t m) {
  if (m < 1) throw std::invalid_argument("efficient_init: m must be >= 1");
  if (!all_finite(w0) || !all_finite(b0))
    throw std::invalid_argument("efficient_init: base parameters must be finite");
  const double scale = 1.0 / static_cast<double>(m);
  ShuffleParams params;
  params.weight = Tensor2D(w0.rows(), w0.cols() * m);
  for (std::size_t o = 0; o < w0.rows(); ++o)
    for (std::size_t copy = 0; copy < m; ++copy)
      for (std::size_t i = 0; i < w0.cols(); ++i)
        params.weight(o, copy * w0.cols() + i) = w0(o, i) * scale;
  params.bias = b0;
  return params;
}

ShuffleParams random_init(const ShuffleConfig& config, std::uint64_t seed) {
  config.validate();
  SplitMix64 rng(hash_combine(seed, 0x73687566666c6521ULL));
  const std::size_t in_dim = config.m * config.c_q;
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  ShuffleParams params;
  params.weight = Tensor2D(config.c_l, in_dim);
  for (std::size_t i = 0; i < params.weight.size(); ++i)
    params.weight.data()[i] = rng.next_symmetric(bound);
  params.bias.resize(config.c_l);
  for (double& b : params.bias) b = rng.next_symmetric(bound);
  return params;
}

Tensor2D mean_pool_rows(const Tensor2D& v_q, std::size_t m) {
  if (m < 1 || v_q.rows() % m != 0)
    throw std::invalid_argument("mean_pool_rows: token count not divisible by m");
  Tensor2D out(v_q.rows() / m, v_q.cols());
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t c = 0; c < out.cols(); ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) acc += v_q(i * m + j, c);
      out(i, c) = acc / static_cast<double>(m);
    }
  }
  return out;
}

Tensor2D mean_pool_compress(const Tensor2D& v_q, std::size_t m, const Tensor2D& w0,
                            const std::vector<double>& b0) {
  return linear(mean_pool_rows(v_q, m), w0, b0);
}

}  // namespace longvid
