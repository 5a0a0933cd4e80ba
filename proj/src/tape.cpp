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

#include "longvid/tape.hpp"

#include <cmath>
#include <stdexcept>

#include "longvid/rng.hpp"

namespace longvid {

void TapeConfig::validate() const {
  if (merge_len < 2 || merge_len % 2 != 0)
    throw std::invalid_argument("tape: merge_len must be even and >= 2");
  if (clip_num % 2 != 0)
    throw std::invalid_argument("tape: clip_num must be even (fc kernel clip_num+1 must be odd)");
  if (sample_rate < 1) throw std::invalid_argument("tape: sample_rate must be >= 1");
  if (input_dim < 1 || mid_dim < 1 || output_dim < 1)
    throw std::invalid_argument("tape: channel dims must be >= 1");
}

void TapeConfig::validate_length(std::size_t tokens) const {
  const std::size_t unit = merge_len * sample_rate * sample_rate;
  if (tokens == 0 || tokens % unit != 0)
    throw std::invalid_argument("tape: token count " + std::to_string(tokens) +
                                " not divisible by merge_len*sample_rate^2 = " + std::to_string(unit));
}

std::size_t TapeConfig::boundary_margin() const {
  const auto ceil_div = [](std::size_t a, std::size_t b) { return (a + b - 1) / b; };
  const std::size_t s = sample_rate;
  // Contaminated-position count per stage: conv adds its padding before
  // dividing by stride, upsample multiplies, residual takes the max.
  const std::size_t a2 = ceil_div(merge_len, s);                // down1
  const std::size_t a3 = ceil_div(a2 + merge_len, s);           // down2
  const std::size_t a4 = a3 + clip_num / 2;                     // fc
  const std::size_t a5 = std::max(a4 * s, a2);                  // upsample + residual
  const std::size_t a6 = a5 + merge_len / 2;                    // conv2
  const std::size_t a7 = a6 * s;                                // upsample + residual (margin-0 branch)
  return a7 + merge_len / 2;                                    // conv1
}

Conv1DSpec TapeConfig::down_depthwise_spec() const {
  return {mid_dim, mid_dim, 2 * merge_len + 1, sample_rate, merge_len, mid_dim};
}

Conv1DSpec TapeConfig::pointwise_spec() const { return {mid_dim, mid_dim, 1, 1, 0, 1}; }

Conv1DSpec TapeConfig::fc_conv_spec() const {
  return {mid_dim, mid_dim, clip_num + 1, 1, clip_num / 2, 1};
}

Conv1DSpec TapeConfig::refine_depthwise_spec() const {
  return {mid_dim, mid_dim, merge_len + 1, 1, merge_len / 2, mid_dim};
}

namespace {

void fill_uniform(Tensor2D& t, SplitMix64& rng, double bound) {
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = rng.next_symmetric(bound);
}

void fill_uniform(std::vector<double>& v, SplitMix64& rng, double bound) {
  for (double& x : v) x = rng.next_symmetric(bound);
}

ConvBlockParams init_conv_block(const TapeConfig& cfg, const Conv1DSpec& dw, SplitMix64& rng) {
  ConvBlockParams p;
  const double dw_bound = 1.0 / std::sqrt(static_cast<double>(dw.weight_cols()));
  p.depthwise_w = Tensor2D(dw.out_channels, dw.weight_cols());
  fill_uniform(p.depthwise_w, rng, dw_bound);
  p.depthwise_b.resize(dw.out_channels);
  fill_uniform(p.depthwise_b, rng, dw_bound);

  const Conv1DSpec pw = cfg.pointwise_spec();
  const double pw_bound = 1.0 / std::sqrt(static_cast<double>(pw.weight_cols()));
  p.pointwise_w = Tensor2D(pw.out_channels, pw.weight_cols());
  fill_uniform(p.pointwise_w, rng, pw_bound);
  p.pointwise_b.resize(pw.out_channels);
  fill_uniform(p.pointwise_b, rng, pw_bound);

  p.gamma.assign(cfg.mid_dim, 1.0);
  p.beta.assign(cfg.mid_dim, 0.0);
  return p;
}

FcBlockParams init_fc_block(const TapeConfig& cfg, SplitMix64& rng) {
  FcBlockParams p;
  const Conv1DSpec spec = cfg.fc_conv_spec();
  const double bound = 1.0 / std::sqrt(static_cast<double>(spec.weight_cols()));
  p.conv_w = Tensor2D(spec.out_channels, spec.weight_cols());
  fill_uniform(p.conv_w, rng, bound);
  p.conv_b.resize(spec.out_channels);
  fill_uniform(p.conv_b, rng, bound);
  p.gamma.assign(cfg.mid_dim, 1.0);
  p.beta.assign(cfg.mid_dim, 0.0);
  return p;
}

Tensor2D conv_block_forward(const Tensor2D& in, const Conv1DSpec& dw_spec,
                            const Conv1DSpec& pw_spec, const ConvBlockParams& p,
                            TapeTrace::Block& trace) {
  trace.in = in;
  trace.dw = conv1d(in, dw_spec, p.depthwise_w, p.depthwise_b);
  trace.pw = conv1d(trace.dw, pw_spec, p.pointwise_w, p.pointwise_b);
  trace.ln = channel_layer_norm(trace.pw, p.gamma, p.beta, kTapeLayerNormEps);
  return gelu(trace.ln);
}

Tensor2D fc_block_forward(const Tensor2D& in, const Conv1DSpec& spec, const FcBlockParams& p,
                          TapeTrace::Fc& trace) {
  trace.in = in;
  trace.conv = conv1d(in, spec, p.conv_w, p.conv_b);
  trace.ln = channel_layer_norm(trace.conv, p.gamma, p.beta, kTapeLayerNormEps);
  return gelu(trace.ln);
}

/// Returns the gradient w.r.t. the block input and fills `grads`.
Tensor2D conv_block_vjp(const TapeTrace::Block& trace, const Conv1DSpec& dw_spec,
                        const Conv1DSpec& pw_spec, const ConvBlockParams& p,
                        const Tensor2D& grad_block_out, ConvBlockParams& grads) {
  const Tensor2D grad_ln = gelu_vjp(trace.ln, grad_block_out);
  LayerNormGrads ng = channel_layer_norm_vjp(trace.pw, p.gamma, p.beta, kTapeLayerNormEps, grad_ln);
  grads.gamma = std::move(ng.gamma);
  grads.beta = std::move(ng.beta);
  Conv1DGrads pg = conv1d_vjp(trace.dw, pw_spec, p.pointwise_w, ng.input);
  grads.pointwise_w = std::move(pg.weight);
  grads.pointwise_b = std::move(pg.bias);
  Conv1DGrads dg = conv1d_vjp(trace.in, dw_spec, p.depthwise_w, pg.input);
  grads.depthwise_w = std::move(dg.weight);
  grads.depthwise_b = std::move(dg.bias);
  return dg.input;
}

Tensor2D fc_block_vjp(const TapeTrace::Fc& trace, const Conv1DSpec& spec, const FcBlockParams& p,
                      const Tensor2D& grad_block_out, FcBlockParams& grads) {
  const Tensor2D grad_ln = gelu_vjp(trace.ln, grad_block_out);
  LayerNormGrads ng = channel_layer_norm_vjp(trace.conv, p.gamma, p.beta, kTapeLayerNormEps, grad_ln);
  grads.gamma = std::move(ng.gamma);
  grads.beta = std::move(ng.beta);
  Conv1DGrads cg = conv1d_vjp(trace.in, spec, p.conv_w, ng.input);
  grads.conv_w = std::move(cg.weight);
  grads.conv_b = std::move(cg.bias);
  return cg.input;
}

void zero_like(ConvBlockParams& p) {
  p.depthwise_w = Tensor2D(p.depthwise_w.rows(), p.depthwise_w.cols());
  p.depthwise_b.assign(p.depthwise_b.size(), 0.0);
  p.pointwise_w = Tensor2D(p.pointwise_w.rows(), p.pointwise_w.cols());
  p.pointwise_b.assign(p.pointwise_b.size(), 0.0);
  p.gamma.assign(p.gamma.size(), 0.0);
  p.beta.assign(p.beta.size(), 0.0);
}

void zero_param_grads(TapeParams& g) {
  g.linear_input_w = Tensor2D(g.linear_input_w.rows(), g.linear_input_w.cols());
  g.linear_input_b.assign(g.linear_input_b.size(), 0.0);
  zero_like(g.down1);
  zero_like(g.down2);
  g.fc.conv_w = Tensor2D(g.fc.conv_w.rows(), g.fc.conv_w.cols());
  g.fc.conv_b.assign(g.fc.conv_b.size(), 0.0);
  g.fc.gamma.assign(g.fc.gamma.size(), 0.0);
  g.fc.beta.assign(g.fc.beta.size(), 0.0);
  zero_like(g.conv2);
  zero_like(g.conv1);
  g.linear_output_w = Tensor2D(g.linear_output_w.rows(), g.linear_output_w.cols());
  g.linear_output_b.assign(g.linear_output_b.size(), 0.0);
}

}  // namespace

TapeParams tape_init(const TapeConfig& config, std::uint64_t seed) {
  config.validate();
  SplitMix64 rng(hash_combine(seed, 0x7461706521ULL));

  TapeParams p;
  const double li_bound = 1.0 / std::sqrt(static_cast<double>(config.input_dim));
  p.linear_input_w = Tensor2D(config.mid_dim, config.input_dim);
  fill_uniform(p.linear_input_w, rng, li_bound);
  p.linear_input_b.resize(config.mid_dim);
  fill_uniform(p.linear_input_b, rng, li_bound);

  p.down1 = init_conv_block(config, config.down_depthwise_spec(), rng);
  p.down2 = init_conv_block(config, config.down_depthwise_spec(), rng);
  p.fc = init_fc_block(config, rng);
  p.conv2 = init_conv_block(config, config.refine_depthwise_spec(), rng);
  p.conv1 = init_conv_block(config, config.refine_depthwise_spec(), rng);

  // The whole adapter vanishes at step 0: output head starts at zero.
  p.linear_output_w = Tensor2D(config.output_dim, config.mid_dim, 0.0);
  p.linear_output_b.assign(config.output_dim, 0.0);
  return p;
}

Tensor2D tape_forward_cached(const Tensor2D& v_q, const TapeConfig& config,
                             const TapeParams& params, TapeTrace& trace) {
  config.validate();
  config.validate_length(v_q.rows());
  if (v_q.cols() != config.input_dim)
    throw std::invalid_argument("tape_forward: input has " + std::to_string(v_q.cols()) +
                                " channels, config expects " + std::to_string(config.input_dim));

  trace.input = v_q;
  const Tensor2D stem_rows = linear(v_q, params.linear_input_w, params.linear_input_b);
  trace.stem = stem_rows.transposed();                       // mid x L
  trace.level1 = avg_pool1d(trace.stem, config.merge_len);   // mid x L1

  const Conv1DSpec down_dw = config.down_depthwise_spec();
  const Conv1DSpec pw = config.pointwise_spec();
  const Conv1DSpec refine_dw = config.refine_depthwise_spec();

  const Tensor2D out1 = conv_block_forward(trace.level1, down_dw, pw, params.down1, trace.down1);
  const Tensor2D out2 = conv_block_forward(out1, down_dw, pw, params.down2, trace.down2);
  const Tensor2D fc_out = fc_block_forward(out2, config.fc_conv_spec(), params.fc, trace.fc);

  trace.merged2 = add(upsample_nearest(fc_out, config.sample_rate), out1);
  const Tensor2D c2_out = conv_block_forward(trace.merged2, refine_dw, pw, params.conv2, trace.conv2);

  trace.merged1 = add(upsample_nearest(c2_out, config.sample_rate), trace.level1);
  const Tensor2D c1_out = conv_block_forward(trace.merged1, refine_dw, pw, params.conv1, trace.conv1);

  trace.head_in = c1_out.transposed();  // L1 x mid
  return linear(trace.head_in, params.linear_output_w, params.linear_output_b);
}

Tensor2D tape_forward(const Tensor2D& v_q, const TapeConfig& config, const TapeParams& params) {
  TapeTrace trace;
  return tape_forward_cached(v_q, config, params, trace);
}

TapeGrads tape_vjp(const TapeConfig& config, const TapeParams& params, const TapeTrace& trace,
                   const Tensor2D& grad_out) {
  const Conv1DSpec down_dw = config.down_depthwise_spec();
  const Conv1DSpec pw = config.pointwise_spec();
  const Conv1DSpec refine_dw = config.refine_depthwise_spec();
  const Conv1DSpec fc_spec = config.fc_conv_spec();

  TapeGrads g;
  g.params.frozen = params.frozen;

  LinearGrads head = linear_vjp(trace.head_in, params.linear_output_w, grad_out);
  g.params.linear_output_w = std::move(head.weight);
  g.params.linear_output_b = std::move(head.bias);

  const Tensor2D grad_c1_out = head.input.transposed();  // mid x L1
  const Tensor2D grad_merged1 =
      conv_block_vjp(trace.conv1, refine_dw, pw, params.conv1, grad_c1_out, g.params.conv1);

  // merged1 = upsample(conv2 out) + level1
  const Tensor2D grad_c2_out = upsample_nearest_vjp(grad_merged1, config.sample_rate);
  const Tensor2D grad_merged2 =
      conv_block_vjp(trace.conv2, refine_dw, pw, params.conv2, grad_c2_out, g.params.conv2);

  // merged2 = upsample(fc out) + down1 out
  const Tensor2D grad_fc_out = upsample_nearest_vjp(grad_merged2, config.sample_rate);
  const Tensor2D grad_out2 = fc_block_vjp(trace.fc, fc_spec, params.fc, grad_fc_out, g.params.fc);

  const Tensor2D grad_out1_conv =
      conv_block_vjp(trace.down2, down_dw, pw, params.down2, grad_out2, g.params.down2);
  const Tensor2D grad_out1 = add(grad_out1_conv, grad_merged2);

  const Tensor2D grad_level1_conv =
      conv_block_vjp(trace.down1, down_dw, pw, params.down1, grad_out1, g.params.down1);
  const Tensor2D grad_level1 = add(grad_level1_conv, grad_merged1);

  const Tensor2D grad_stem = avg_pool1d_vjp(grad_level1, config.merge_len);
  LinearGrads stem = linear_vjp(trace.input, params.linear_input_w, grad_stem.transposed());
  g.params.linear_input_w = std::move(stem.weight);
  g.params.linear_input_b = std::move(stem.bias);
  g.input = std::move(stem.input);

  if (params.frozen) zero_param_grads(g.params);
  return g;
}

Tensor2D fuse(const Tensor2D& v_l, const Tensor2D& v_t) {
  if (!v_l.same_shape(v_t))
    throw std::invalid_argument("fuse: shape mismatch " + v_l.shape_str() + " vs " + v_t.shape_str());
  return add(v_l, v_t);
}

}  // namespace longvid
