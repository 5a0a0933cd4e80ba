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

#ifndef LONGVID_GRAD_CHECK_HPP_
#define LONGVID_GRAD_CHECK_HPP_

#include <functional>
#include <vector>

#include "longvid/tensor.hpp"

namespace longvid {

/// Forward map from a set of input tensors to one output tensor. The
/// checked scalar is the plain sum of the output elements.
using ForwardFn = std::function<Tensor2D(const std::vector<Tensor2D>&)>;

/// Analytic gradient of sum(forward(inputs)) with respect to every input,
/// i.e. the VJP pulled back through an all-ones cotangent.
using SumGradFn = std::function<std::vector<Tensor2D>(const std::vector<Tensor2D>&)>;

/// Central-difference check of `grad` against (f(x+h) - f(x-h)) / 2h,
/// element by element over every input tensor. Returns the max over
/// elements of |analytic - numeric| / max(1, |numeric|). Throws
/// std::runtime_error when any evaluation produces a non-finite value.
double finite_diff_check(const ForwardFn& forward, const SumGradFn& grad,
                         std::vector<Tensor2D> inputs, double h);

}  // namespace longvid

#endif  // LONGVID_GRAD_CHECK_HPP_
