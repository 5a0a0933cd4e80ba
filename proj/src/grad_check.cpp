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

#include "longvid/grad_check.hpp"

#include <cmath>
#include <stdexcept>

namespace longvid {

namespace {

double sum_elements(const Tensor2D& t) {
  double acc = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) acc += t.data()[i];
  if (!std::isfinite(acc)) throw std::runtime_error("finite_diff_check: non-finite forward value");
  return acc;
}

}  // namespace

double finite_diff_check(const ForwardFn& forward, const SumGradFn& grad,
                         std::vector<Tensor2D> inputs, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_check: h must be > 0");

  const std::vector<Tensor2D> analytic = grad(inputs);
  if (analytic.size() != inputs.size())
    throw std::invalid_argument("finite_diff_check: gradient count != input count");

  double max_rel_err = 0.0;
  for (std::size_t n = 0; n < inputs.size(); ++n) {
    if (!analytic[n].same_shape(inputs[n]))
      throw std::invalid_argument("finite_diff_check: gradient shape mismatch for input " +
                                  std::to_string(n));
    for (std::size_t i = 0; i < inputs[n].size(); ++i) {
      const double saved = inputs[n].data()[i];
      inputs[n].data()[i] = saved + h;
      const double f_plus = sum_elements(forward(inputs));
      inputs[n].data()[i] = saved - h;
      const double f_minus = sum_elements(forward(inputs));
      inputs[n].data()[i] = saved;

      const double numeric = (f_plus - f_minus) / (2.0 * h);
      const double a = analytic[n].data()[i];
      if (!std::isfinite(numeric) || !std::isfinite(a))
        throw std::runtime_error("finite_diff_check: non-finite gradient value");
      const double rel = std::fabs(a - numeric) / std::max(1.0, std::fabs(numeric));
      if (rel > max_rel_err) max_rel_err = rel;
    }
  }
  return max_rel_err;
}

}  // namespace longvid
