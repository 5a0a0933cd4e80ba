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

#include "longvid/kernels.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace longvid {

namespace {

// Parallelism pays off only past a few thousand output elements.
constexpr std::int64_t kParallelCutoff = 4096;

void check_conv_args(const Tensor2D& input, const Conv1DSpec& spec, const Tensor2D& weight,
                     const std::vector<double>& bias) {
  spec.validate();
  if (input.rows() != spec.in_channels)
    throw std::invalid_argument("conv1d: input has " + std::to_string(input.rows()) +
                                " channels, spec expects " + std::to_string(spec.in_channels));
  if (weight.rows() != spec.out_channels || weight.cols() != spec.weight_cols())
    throw std::invalid_argument("conv1d: weight shape " + weight.shape_str() + " does not match spec " +
                                std::to_string(spec.out_channels) + "x" +
                                std::to_string(spec.weight_cols()));
  if (bias.size() != spec.out_channels)
    throw std::invalid_argument("conv1d: bias size mismatch");
}

void check_linear_args(const Tensor2D& input, const Tensor2D& weight,
                       const std::vector<double>& bias) {
  if (input.cols() != weight.cols())
    throw std::invalid_argument("linear: input cols " + std::to_string(input.cols()) +
                                " != weight in_dim " + std::to_string(weight.cols()));
  if (bias.size() != weight.rows()) throw std::invalid_argument("linear: bias size mismatch");
}

void check_norm_args(const Tensor2D& input, const std::vector<double>& gamma,
                     const std::vector<double>& beta, double eps) {
  if (gamma.size() != input.rows() || beta.size() != input.rows())
    throw std::invalid_argument("channel_layer_norm: affine size != channel count");
  if (!(eps > 0.0)) throw std::invalid_argument("channel_layer_norm: eps must be > 0");
}

}  // namespace

void Conv1DSpec::validate() const {
  if (in_channels == 0 || out_channels == 0 || groups == 0)
    throw std::invalid_argument("conv1d: channel/group counts must be positive");
  if (kernel_size < 1) throw std::invalid_argument("conv1d: kernel_size must be >= 1");
  if (stride < 1) throw std::invalid_argument("conv1d: stride must be >= 1");
  if (in_channels % groups != 0 || out_channels % groups != 0)
    throw std::invalid_argument("conv1d: channels not divisible by groups");
}

std::size_t Conv1DSpec::out_length(std::size_t length) const {
  const std::int64_t padded = static_cast<std::int64_t>(length) + 2 * static_cast<std::int64_t>(padding);
  const std::int64_t span = padded - static_cast<std::int64_t>(kernel_size);
  if (span < 0) throw std::invalid_argument("conv1d: non-positive output length");
  return static_cast<std::size_t>(span / static_cast<std::int64_t>(stride)) + 1;
}

Tensor2D conv1d(const Tensor2D& input, const Conv1DSpec& spec, const Tensor2D& weight,
                const std::vector<double>& bias) {
  check_conv_args(input, spec, weight, bias);
  const std::int64_t len = static_cast<std::int64_t>(input.cols());
  const std::int64_t out_len = static_cast<std::int64_t>(spec.out_length(input.cols()));
  const std::int64_t k = static_cast<std::int64_t>(spec.kernel_size);
  const std::int64_t s = static_cast<std::int64_t>(spec.stride);
  const std::int64_t p = static_cast<std::int64_t>(spec.padding);
  const std::int64_t oc_n = static_cast<std::int64_t>(spec.out_channels);
  const std::int64_t in_per_group = static_cast<std::int64_t>(spec.in_channels / spec.groups);
  const std::int64_t out_per_group = static_cast<std::int64_t>(spec.out_channels / spec.groups);

  Tensor2D out(spec.out_channels, static_cast<std::size_t>(out_len));
#pragma omp parallel for collapse(2) if (oc_n * out_len > kParallelCutoff)
  for (std::int64_t oc = 0; oc < oc_n; ++oc) {
    for (std::int64_t op = 0; op < out_len; ++op) {
      const std::int64_t ic0 = (oc / out_per_group) * in_per_group;
      double acc = bias[static_cast<std::size_t>(oc)];
      for (std::int64_t icg = 0; icg < in_per_group; ++icg) {
        const double* in_row = input.row(static_cast<std::size_t>(ic0 + icg)).data();
        const double* w_row = weight.row(static_cast<std::size_t>(oc)).data() + icg * k;
        for (std::int64_t t = 0; t < k; ++t) {
          const std::int64_t ip = op * s + t - p;
          if (ip >= 0 && ip < len) acc += w_row[t] * in_row[ip];
        }
      }
      out(static_cast<std::size_t>(oc), static_cast<std::size_t>(op)) = acc;
    }
  }
  return out;
}

Conv1DGrads conv1d_vjp(const Tensor2D& input, const Conv1DSpec& spec, const Tensor2D& weight,
                       const Tensor2D& grad_out) {
  check_conv_args(input, spec, weight, std::vector<double>(spec.out_channels, 0.0));
  const std::int64_t len = static_cast<std::int64_t>(input.cols());
  const std::int64_t out_len = static_cast<std::int64_t>(spec.out_length(input.cols()));
  if (grad_out.rows() != spec.out_channels || grad_out.cols() != static_cast<std::size_t>(out_len))
    throw std::invalid_argument("conv1d_vjp: grad_out shape mismatch");
  const std::int64_t k = static_cast<std::int64_t>(spec.kernel_size);
  const std::int64_t s = static_cast<std::int64_t>(spec.stride);
  const std::int64_t p = static_cast<std::int64_t>(spec.padding);
  const std::int64_t ic_n = static_cast<std::int64_t>(spec.in_channels);
  const std::int64_t oc_n = static_cast<std::int64_t>(spec.out_channels);
  const std::int64_t in_per_group = ic_n / static_cast<std::int64_t>(spec.groups);
  const std::int64_t out_per_group = oc_n / static_cast<std::int64_t>(spec.groups);

  Conv1DGrads g;
  g.input = Tensor2D(input.rows(), input.cols());
  g.weight = Tensor2D(weight.rows(), weight.cols());
  g.bias.assign(spec.out_channels, 0.0);

#pragma omp parallel for if (oc_n > 4)
  for (std::int64_t oc = 0; oc < oc_n; ++oc) {
    double acc = 0.0;
    for (std::int64_t op = 0; op < out_len; ++op)
      acc += grad_out(static_cast<std::size_t>(oc), static_cast<std::size_t>(op));
    g.bias[static_cast<std::size_t>(oc)] = acc;
  }

  const std::int64_t wcols = static_cast<std::int64_t>(weight.cols());
#pragma omp parallel for collapse(2) if (oc_n * wcols > kParallelCutoff)
  for (std::int64_t oc = 0; oc < oc_n; ++oc) {
    for (std::int64_t wc = 0; wc < wcols; ++wc) {
      const std::int64_t icg = wc / k;
      const std::int64_t t = wc % k;
      const std::int64_t ic = (oc / out_per_group) * in_per_group + icg;
      double acc = 0.0;
      for (std::int64_t op = 0; op < out_len; ++op) {
        const std::int64_t ip = op * s + t - p;
        if (ip >= 0 && ip < len)
          acc += grad_out(static_cast<std::size_t>(oc), static_cast<std::size_t>(op)) *
                 input(static_cast<std::size_t>(ic), static_cast<std::size_t>(ip));
      }
      g.weight(static_cast<std::size_t>(oc), static_cast<std::size_t>(wc)) = acc;
    }
  }

  // Gather form: each input element sums its contributions so the loop can
  // run lock-free in parallel.
#pragma omp parallel for collapse(2) if (ic_n * len > kParallelCutoff)
  for (std::int64_t ic = 0; ic < ic_n; ++ic) {
    for (std::int64_t ip = 0; ip < len; ++ip) {
      const std::int64_t group = ic / in_per_group;
      const std::int64_t icg = ic % in_per_group;
      double acc = 0.0;
      for (std::int64_t oc = group * out_per_group; oc < (group + 1) * out_per_group; ++oc) {
        // taps with op*s + t - p == ip and t in [0, k)
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
  if (window == 0) throw std::invalid_argument("avg_pool1d: window must be >= 1");
  if (input.cols() % window != 0)
    throw std::invalid_argument("avg_pool1d: length " + std::to_string(input.cols()) +
                                " not divisible by window " + std::to_string(window));
  const std::int64_t ch = static_cast<std::int64_t>(input.rows());
  const std::int64_t out_len = static_cast<std::int64_t>(input.cols() / window);
  const std::int64_t w = static_cast<std::int64_t>(window);
  Tensor2D out(input.rows(), static_cast<std::size_t>(out_len));
#pragma omp parallel for collapse(2) if (ch * out_len > kParallelCutoff)
  for (std::int64_t c = 0; c < ch; ++c) {
    for (std::int64_t j = 0; j < out_len; ++j) {
      double acc = 0.0;
      for (std::int64_t u = 0; u < w; ++u)
        acc += input(static_cast<std::size_t>(c), static_cast<std::size_t>(j * w + u));
      out(static_cast<std::size_t>(c), static_cast<std::size_t>(j)) = acc / static_cast<double>(w);
    }
  }
  return out;
}

Tensor2D avg_pool1d_vjp(const Tensor2D& grad_out, std::size_t window) {
  const std::int64_t ch = static_cast<std::int64_t>(grad_out.rows());
  const std::int64_t in_len = static_cast<std::int64_t>(grad_out.cols() * window);
  const double inv = 1.0 / static_cast<double>(window);
  Tensor2D g(grad_out.rows(), static_cast<std::size_t>(in_len));
#pragma omp parallel for collapse(2) if (ch * in_len > kParallelCutoff)
  for (std::int64_t c = 0; c < ch; ++c)
    for (std::int64_t i = 0; i < in_len; ++i)
      g(static_cast<std::size_t>(c), static_cast<std::size_t>(i)) =
          grad_out(static_cast<std::size_t>(c), static_cast<std::size_t>(i / static_cast<std::int64_t>(window))) * inv;
  return g;
}

Tensor2D upsample_nearest(const Tensor2D& input, std::size_t factor) {
  if (factor < 1) throw std::invalid_argument("upsample_nearest: factor must be >= 1");
  const std::int64_t ch = static_cast<std::int64_t>(input.rows());
  const std::int64_t out_len = static_cast<std::int64_t>(input.cols() * factor);
  Tensor2D out(input.rows(), static_cast<std::size_t>(out_len));
#pragma omp parallel for collapse(2) if (ch * out_len > kParallelCutoff)
  for (std::int64_t c = 0; c < ch; ++c)
    for (std::int64_t i = 0; i < out_len; ++i)
      out(static_cast<std::size_t>(c), static_cast<std::size_t>(i)) =
          input(static_cast<std::size_t>(c), static_cast<std::size_t>(i / static_cast<std::int64_t>(factor)));
  return out;
}

Tensor2D upsample_nearest_vjp(const Tensor2D& grad_out, std::size_t factor) {
  if (factor < 1) throw std::invalid_argument("upsample_nearest_vjp: factor must be >= 1");
  if (grad_out.cols() % factor != 0)
    throw std::invalid_argument("upsample_nearest_vjp: grad length not divisible by factor");
  const std::int64_t ch = static_cast<std::int64_t>(grad_out.rows());
  const std::int64_t in_len = static_cast<std::int64_t>(grad_out.cols() / factor);
  const std::int64_t f = static_cast<std::int64_t>(factor);
  Tensor2D g(grad_out.rows(), static_cast<std::size_t>(in_len));
#pragma omp parallel for collapse(2) if (ch * in_len > kParallelCutoff)
  for (std::int64_t c = 0; c < ch; ++c) {
    for (std::int64_t j = 0; j < in_len; ++j) {
      double acc = 0.0;
      for (std::int64_t u = 0; u < f; ++u)
        acc += grad_out(static_cast<std::size_t>(c), static_cast<std::size_t>(j * f + u));
      g(static_cast<std::size_t>(c), static_cast<std::size_t>(j)) = acc;
    }
  }
  return g;
}

Tensor2D channel_layer_norm(const Tensor2D& input, const std::vector<double>& gamma,
                            const std::vector<double>& beta, double eps) {
  check_norm_args(input, gamma, beta, eps);
  const std::int64_t ch = static_cast<std::int64_t>(input.rows());
  const std::int64_t len = static_cast<std::int64_t>(input.cols());
  Tensor2D out(input.rows(), input.cols());
#pragma omp parallel for if (len > 64)
  for (std::int64_t t = 0; t < len; ++t) {
    double mean = 0.0;
    for (std::int64_t c = 0; c < ch; ++c) mean += input(static_cast<std::size_t>(c), static_cast<std::size_t>(t));
    mean /= static_cast<double>(ch);
    double var = 0.0;
    for (std::int64_t c = 0; c < ch; ++c) {
      const double d = input(static_cast<std::size_t>(c), static_cast<std::size_t>(t)) - mean;
      var += d * d;
    }
    var /= static_cast<double>(ch);
    const double inv_std = 1.0 / std::sqrt(var + eps);
    for (std::int64_t c = 0; c < ch; ++c) {
      const std::size_t cc = static_cast<std::size_t>(c), tt = static_cast<std::size_t>(t);
      out(cc, tt) = gamma[cc] * ((input(cc, tt) - mean) * inv_std) + beta[cc];
    }
  }
  return out;
}

LayerNormGrads channel_layer_norm_vjp(const Tensor2D& input, const std::vector<double>& gamma,
                                      const std::vector<double>& beta, double eps,
                                      const Tensor2D& grad_out) {
  check_norm_args(input, gamma, beta, eps);
  if (!grad_out.same_shape(input)) throw std::invalid_argument("channel_layer_norm_vjp: grad shape mismatch");
  const std::int64_t ch = static_cast<std::int64_t>(input.rows());
  const std::int64_t len = static_cast<std::int64_t>(input.cols());
  LayerNormGrads g;
  g.input = Tensor2D(input.rows(), input.cols());
  g.gamma.assign(gamma.size(), 0.0);
  g.beta.assign(beta.size(), 0.0);

  // Normalized activations are shared between the input and affine grads.
  Tensor2D xhat(input.rows(), input.cols());
#pragma omp parallel for if (len > 64)
  for (std::int64_t t = 0; t < len; ++t) {
    const std::size_t tt = static_cast<std::size_t>(t);
    double mean = 0.0;
    for (std::int64_t c = 0; c < ch; ++c) mean += input(static_cast<std::size_t>(c), tt);
    mean /= static_cast<double>(ch);
    double var = 0.0;
    for (std::int64_t c = 0; c < ch; ++c) {
      const double d = input(static_cast<std::size_t>(c), tt) - mean;
      var += d * d;
    }
    var /= static_cast<double>(ch);
    const double inv_std = 1.0 / std::sqrt(var + eps);
    for (std::int64_t c = 0; c < ch; ++c) {
      const std::size_t cc = static_cast<std::size_t>(c);
      xhat(cc, tt) = (input(cc, tt) - mean) * inv_std;
    }

    double mean_gdy = 0.0, mean_gdy_xhat = 0.0;
    for (std::int64_t c = 0; c < ch; ++c) {
      const std::size_t cc = static_cast<std::size_t>(c);
      const double gdy = gamma[cc] * grad_out(cc, tt);
      mean_gdy += gdy;
      mean_gdy_xhat += gdy * xhat(cc, tt);
    }
    mean_gdy /= static_cast<double>(ch);
    mean_gdy_xhat /= static_cast<double>(ch);
    for (std::int64_t c = 0; c < ch; ++c) {
      const std::size_t cc = static_cast<std::size_t>(c);
      g.input(cc, tt) = (gamma[cc] * grad_out(cc, tt) - mean_gdy - xhat(cc, tt) * mean_gdy_xhat) * inv_std;
    }
  }

#pragma omp parallel for if (ch > 16)
  for (std::int64_t c = 0; c < ch; ++c) {
    const std::size_t cc = static_cast<std::size_t>(c);
    double dg = 0.0, db = 0.0;
    for (std::int64_t t = 0; t < len; ++t) {
      const std::size_t tt = static_cast<std::size_t>(t);
      dg += grad_out(cc, tt) * xhat(cc, tt);
      db += grad_out(cc, tt);
    }
    g.gamma[cc] = dg;
    g.beta[cc] = db;
  }
  return g;
}

double gelu_scalar(double x) { return x * 0.5 * std::erfc(-x * M_SQRT1_2); }

Tensor2D gelu(const Tensor2D& input) {
  const std::int64_t n = static_cast<std::int64_t>(input.size());
  Tensor2D out(input.rows(), input.cols());
  const double* in = input.data();
  double* o = out.data();
#pragma omp parallel for if (n > kParallelCutoff)
  for (std::int64_t i = 0; i < n; ++i) o[i] = gelu_scalar(in[i]);
  return out;
}

Tensor2D gelu_vjp(const Tensor2D& input, const Tensor2D& grad_out) {
  if (!grad_out.same_shape(input)) throw std::invalid_argument("gelu_vjp: grad shape mismatch");
  const std::int64_t n = static_cast<std::int64_t>(input.size());
  Tensor2D g(input.rows(), input.cols());
  const double* in = input.data();
  const double* go = grad_out.data();
  double* out = g.data();
  constexpr double kInvSqrt2Pi = 0.3989422804014327;
#pragma omp parallel for if (n > kParallelCutoff)
  for (std::int64_t i = 0; i < n; ++i) {
    const double x = in[i];
    const double cdf = 0.5 * std::erfc(-x * M_SQRT1_2);
    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
    out[i] = go[i] * (cdf + x * pdf);
  }
  return g;
}

Tensor2D linear(const Tensor2D& input, const Tensor2D& weight, const std::vector<double>& bias) {
  check_linear_args(input, weight, bias);
  const std::int64_t rows = static_cast<std::int64_t>(input.rows());
  const std::int64_t out_dim = static_cast<std::int64_t>(weight.rows());
  const std::int64_t in_dim = static_cast<std::int64_t>(weight.cols());
  Tensor2D out(input.rows(), weight.rows());
#pragma omp parallel for collapse(2) if (rows * out_dim > kParallelCutoff)
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t o = 0; o < out_dim; ++o) {
      const double* x = input.row(static_cast<std::size_t>(r)).data();
      const double* w = weight.row(static_cast<std::size_t>(o)).data();
      double acc = bias[static_cast<std::size_t>(o)];
      for (std::int64_t i = 0; i < in_dim; ++i) acc += x[i] * w[i];
      out(static_cast<std::size_t>(r), static_cast<std::size_t>(o)) = acc;
    }
  }
  return out;
}

LinearGrads linear_vjp(const Tensor2D& input, const Tensor2D& weight, const Tensor2D& grad_out) {
  check_linear_args(input, weight, std::vector<double>(weight.rows(), 0.0));
  if (grad_out.rows() != input.rows() || grad_out.cols() != weight.rows())
    throw std::invalid_argument("linear_vjp: grad_out shape mismatch");
  const std::int64_t rows = static_cast<std::int64_t>(input.rows());
  const std::int64_t out_dim = static_cast<std::int64_t>(weight.rows());
  const std::int64_t in_dim = static_cast<std::int64_t>(weight.cols());

  LinearGrads g;
  g.input = Tensor2D(input.rows(), input.cols());
  g.weight = Tensor2D(weight.rows(), weight.cols());
  g.bias.assign(weight.rows(), 0.0);

#pragma omp parallel for collapse(2) if (rows * in_dim > kParallelCutoff)
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t i = 0; i < in_dim; ++i) {
      double acc = 0.0;
      for (std::int64_t o = 0; o < out_dim; ++o)
        acc += grad_out(static_cast<std::size_t>(r), static_cast<std::size_t>(o)) *
               weight(static_cast<std::size_t>(o), static_cast<std::size_t>(i));
      g.input(static_cast<std::size_t>(r), static_cast<std::size_t>(i)) = acc;
    }
  }

#pragma omp parallel for collapse(2) if (out_dim * in_dim > kParallelCutoff)
  for (std::int64_t o = 0; o < out_dim; ++o) {
    for (std::int64_t i = 0; i < in_dim; ++i) {
      double acc = 0.0;
      for (std::int64_t r = 0; r < rows; ++r)
        acc += grad_out(static_cast<std::size_t>(r), static_cast<std::size_t>(o)) *
               input(static_cast<std::size_t>(r), static_cast<std::size_t>(i));
      g.weight(static_cast<std::size_t>(o), static_cast<std::size_t>(i)) = acc;
    }
  }

#pragma omp parallel for if (out_dim > 16)
  for (std::int64_t o = 0; o < out_dim; ++o) {
    double acc = 0.0;
    for (std::int64_t r = 0; r < rows; ++r)
      acc += grad_out(static_cast<std::size_t>(r), static_cast<std::size_t>(o));
    g.bias[static_cast<std::size_t>(o)] = acc;
  }
  return g;
}

}  // namespace longvid
