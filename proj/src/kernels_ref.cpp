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
// Serial reference kernels, written directly from the operation
// definitions. These stay deliberately plain: explicit padded buffers and
// straight loops, no parallel pragmas. Tests assert that the OpenMP
// kernels reproduce these results exactly.

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "longvid/kernels.hpp"

namespace longvid {
namespace ref {

Tensor2D conv1d(const Tensor2D& input, const Conv1DSpec& spec, const Tensor2D& weight,
                const std::vector<double>& bias) {
  spec.validate();
  if (input.rows() != spec.in_channels) throw std::invalid_argument("ref::conv1d: channel mismatch");
  if (weight.rows() != spec.out_channels || weight.cols() != spec.weight_cols())
    throw std::invalid_argument("ref::conv1d: weight shape mismatch");
  if (bias.size() != spec.out_channels) throw std::invalid_argument("ref::conv1d: bias size mismatch");

  const std::size_t out_len = spec.out_length(input.cols());
  const std::size_t k = spec.kernel_size;
  const std::size_t in_per_group = spec.in_channels / spec.groups;
  const std::size_t out_per_group = spec.out_channels / spec.groups;

  // Materialize the zero padding.
  Tensor2D padded(input.rows(), input.cols() + 2 * spec.padding, 0.0);
  for (std::size_t c = 0; c < input.rows(); ++c)
    for (std::size_t i = 0; i < input.cols(); ++i) padded(c, spec.padding + i) = input(c, i);

  Tensor2D out(spec.out_channels, out_len);
  for (std::size_t oc = 0; oc < spec.out_channels; ++oc) {
    const std::size_t ic0 = (oc / out_per_group) * in_per_group;
    for (std::size_t op = 0; op < out_len; ++op) {
      double acc = bias[oc];
      for (std::size_t icg = 0; icg < in_per_group; ++icg)
        for (std::size_t t = 0; t < k; ++t)
          acc += weight(oc, icg * k + t) * padded(ic0 + icg, op * spec.stride + t);
      out(oc, op) = acc;
    }
  }
  return out;
}

Conv1DGrads conv1d_vjp(const Tensor2D& input, const Conv1DSpec& spec, const Tensor2D& weight,
                       const Tensor2D& grad_out) {
  spec.validate();
  const std::int64_t len = static_cast<std::int64_t>(input.cols());
  const std::int64_t out_len = static_cast<std::int64_t>(spec.out_length(input.cols()));
  const std::int64_t k = static_cast<std::int64_t>(spec.kernel_size);
  const std::int64_t s = static_cast<std::int64_t>(spec.stride);
  const std::int64_t p = static_cast<std::int64_t>(spec.padding);
  const std::int64_t in_per_group = static_cast<std::int64_t>(spec.in_channels / spec.groups);
  const std::int64_t out_per_group = static_cast<std::int64_t>(spec.out_channels / spec.groups);

  Conv1DGrads g;
  g.input = Tensor2D(input.rows(), input.cols());
  g.weight = Tensor2D(weight.rows(), weight.cols());
  g.bias.assign(spec.out_channels, 0.0);

  for (std::size_t oc = 0; oc < spec.out_channels; ++oc) {
    double acc = 0.0;
    for (std::size_t op = 0; op < static_cast<std::size_t>(out_len); ++op) acc += grad_out(oc, op);
    g.bias[oc] = acc;
  }

  for (std::size_t oc = 0; oc < spec.out_channels; ++oc) {
    for (std::size_t wc = 0; wc < weight.cols(); ++wc) {
      const std::int64_t icg = static_cast<std::int64_t>(wc) / k;
      const std::int64_t t = static_cast<std::int64_t>(wc) % k;
      const std::int64_t ic = (static_cast<std::int64_t>(oc) / out_per_group) * in_per_group + icg;
      double acc = 0.0;
      for (std::int64_t op = 0; op < out_len; ++op) {
        const std::int64_t ip = op * s + t - p;
        if (ip >= 0 && ip < len)
          acc += grad_out(oc, static_cast<std::size_t>(op)) *
                 input(static_cast<std::size_t>(ic), static_cast<std::size_t>(ip));
      }
      g.weight(oc, wc) = acc;
    }
  }

  for (std::int64_t ic = 0; ic < static_cast<std::int64_t>(input.rows()); ++ic) {
    const std::int64_t group = ic / in_per_group;
    const std::int64_t icg = ic % in_per_group;
    for (std::int64_t ip = 0; ip < len; ++ip) {
      double acc = 0.0;
      for (std::int64_t oc = group * out_per_group; oc < (group + 1) * out_per_group; ++oc) {
        const std::int64_t op_lo = (ip + p - k + 1 > 0) ? (ip + p - k + 1 + s - 1) / s : 0;
        const std::int64_t op_hi = (ip + p) / s;
        for (std::int64_t op = op_lo; op <= op_hi && op < out_len; ++op) {
          const std::int64_t t = ip + p - op * s;
          acc += grad_out(static_cast<std::size_t>(oc), static_cast<std::size_t>(op)) *
                 weight(static_cast<std::size_t>(oc), static_cast<std::size_t>(icg * k + t));
        }
      }
      g.input(static_cast<std::size_t>(ic), static_cast<std::size_t>(ip)) = acc;
    }
  }
  return g;
}

Tensor2D avg_pool1d(const Tensor2D& input, std::size_t window) {
  if (window == 0 || input.cols() % window != 0)
    throw std::invalid_argument("ref::avg_pool1d: length not divisible by window");
  Tensor2D out(input.rows(), input.cols() / window);
  for (std::size_t c = 0; c < input.rows(); ++c) {
    for (std::size_t j = 0; j < out.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t u = 0; u < window; ++u) acc += input(c, j * window + u);
      out(c, j) = acc / static_cast<double>(window);
    }
  }
  return out;
}

Tensor2D avg_pool1d_vjp(const Tensor2D& grad_out, std::size_t window) {
  Tensor2D g(grad_out.rows(), grad_out.cols() * window);
  for (std::size_t c = 0; c < g.rows(); ++c)
    for (std::size_t i = 0; i < g.cols(); ++i)
      g(c, i) = grad_out(c, i / window) / static_cast<double>(window);
  return g;
}

Tensor2D upsample_nearest(const Tensor2D& input, std::size_t factor) {
  if (factor < 1) throw std::invalid_argument("ref::upsample_nearest: factor must be >= 1");
  Tensor2D out(input.rows(), input.cols() * factor);
  for (std::size_t c = 0; c < out.rows(); ++c)
    for (std::size_t i = 0; i < out.cols(); ++i) out(c, i) = input(c, i / factor);
  return out;
}

Tensor2D upsample_nearest_vjp(const Tensor2D& grad_out, std::size_t factor) {
  if (factor < 1 || grad_out.cols() % factor != 0)
    throw std::invalid_argument("ref::upsample_nearest_vjp: bad factor");
  Tensor2D g(grad_out.rows(), grad_out.cols() / factor);
  for (std::size_t c = 0; c < g.rows(); ++c) {
    for (std::size_t j = 0; j < g.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t u = 0; u < factor; ++u) acc += grad_out(c, j * factor + u);
      g(c, j) = acc;
    }
  }
  return g;
}

Tensor2D channel_layer_norm(const Tensor2D& input, const std::vector<double>& gamma,
                            const std::vector<double>& beta, double eps) {
  if (gamma.size() != input.rows() || beta.size() != input.rows() || !(eps > 0.0))
    throw std::invalid_argument("ref::channel_layer_norm: bad arguments");
  const std::size_t ch = input.rows();
  Tensor2D out(input.rows(), input.cols());
  for (std::size_t t = 0; t < input.cols(); ++t) {
    double mean = 0.0;
    for (std::size_t c = 0; c < ch; ++c) mean += input(c, t);
    mean /= static_cast<double>(ch);
    double var = 0.0;
    for (std::size_t c = 0; c < ch; ++c) {
      const double d = input(c, t) - mean;
      var += d * d;
    }
    var /= static_cast<double>(ch);
    const double inv_std = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < ch; ++c)
      out(c, t) = gamma[c] * ((input(c, t) - mean) * inv_std) + beta[c];
  }
  return out;
}

LayerNormGrads channel_layer_norm_vjp(const Tensor2D& input, const std::vector<double>& gamma,
                                      const std::vector<double>& beta, double eps,
                                      const Tensor2D& grad_out) {
  const std::size_t ch = input.rows();
  LayerNormGrads g;
  g.input = Tensor2D(input.rows(), input.cols());
  g.gamma.assign(gamma.size(), 0.0);
  g.beta.assign(beta.size(), 0.0);
  Tensor2D xhat(input.rows(), input.cols());
  for (std::size_t t = 0; t < input.cols(); ++t) {
    double mean = 0.0;
    for (std::size_t c = 0; c < ch; ++c) mean += input(c, t);
    mean /= static_cast<double>(ch);
    double var = 0.0;
    for (std::size_t c = 0; c < ch; ++c) {
      const double d = input(c, t) - mean;
      var += d * d;
    }
    var /= static_cast<double>(ch);
    const double inv_std = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < ch; ++c) xhat(c, t) = (input(c, t) - mean) * inv_std;

    double mean_gdy = 0.0, mean_gdy_xhat = 0.0;
    for (std::size_t c = 0; c < ch; ++c) {
      const double gdy = gamma[c] * grad_out(c, t);
      mean_gdy += gdy;
      mean_gdy_xhat += gdy * xhat(c, t);
    }
    mean_gdy /= static_cast<double>(ch);
    mean_gdy_xhat /= static_cast<double>(ch);
    for (std::size_t c = 0; c < ch; ++c)
      g.input(c, t) = (gamma[c] * grad_out(c, t) - mean_gdy - xhat(c, t) * mean_gdy_xhat) * inv_std;
  }
  for (std::size_t c = 0; c < ch; ++c) {
    double dg = 0.0, db = 0.0;
    for (std::size_t t = 0; t < input.cols(); ++t) {
      dg += grad_out(c, t) * xhat(c, t);
      db += grad_out(c, t);
    }
    g.gamma[c] = dg;
    g.beta[c] = db;
  }
  return g;
}

Tensor2D gelu(const Tensor2D& input) {
  Tensor2D out(input.rows(), input.cols());
  for (std::size_t i = 0; i < input.size(); ++i) out.data()[i] = gelu_scalar(input.data()[i]);
  return out;
}

Tensor2D gelu_vjp(const Tensor2D& input, const Tensor2D& grad_out) {
  constexpr double kInvSqrt2Pi = 0.3989422804014327;
  Tensor2D g(input.rows(), input.cols());
  for (std::size_t i = 0; i < input.size(); ++i) {
    const double x = input.data()[i];
    const double cdf = 0.5 * std::erfc(-x * M_SQRT1_2);
    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
    g.data()[i] = grad_out.data()[i] * (cdf + x * pdf);
  }
  return g;
}

Tensor2D linear(const Tensor2D& input, const Tensor2D& weight, const std::vector<double>& bias) {
  if (input.cols() != weight.cols() || bias.size() != weight.rows())
    throw std::invalid_argument("ref::linear: shape mismatch");
  Tensor2D out(input.rows(), weight.rows());
  for (std::size_t r = 0; r < input.rows(); ++r) {
    for (std::size_t o = 0; o < weight.rows(); ++o) {
      double acc = bias[o];
      for (std::size_t i = 0; i < input.cols(); ++i) acc += input(r, i) * weight(o, i);
      out(r, o) = acc;
    }
  }
  return out;
}

LinearGrads linear_vjp(const Tensor2D& input, const Tensor2D& weight, const Tensor2D& grad_out) {
  LinearGrads g;
  g.input = Tensor2D(input.rows(), input.cols());
  g.weight = Tensor2D(weight.rows(), weight.cols());
  g.bias.assign(weight.rows(), 0.0);
  for (std::size_t r = 0; r < input.rows(); ++r)
    for (std::size_t i = 0; i < input.cols(); ++i) {
      double acc = 0.0;
      for (std::size_t o = 0; o < weight.rows(); ++o) acc += grad_out(r, o) * weight(o, i);
      g.input(r, i) = acc;
    }
  for (std::size_t o = 0; o < weight.rows(); ++o)
    for (std::size_t i = 0; i < weight.cols(); ++i) {
      double acc = 0.0;
      for (std::size_t r = 0; r < input.rows(); ++r) acc += grad_out(r, o) * input(r, i);
      g.weight(o, i) = acc;
    }
  for (std::size_t o = 0; o < weight.rows(); ++o) {
    double acc = 0.0;
    for (std::size_t r = 0; r < input.rows(); ++r) acc += grad_out(r, o);
    g.bias[o] = acc;
  }
  return g;
}

}  // namespace ref
}  // namespace longvid
