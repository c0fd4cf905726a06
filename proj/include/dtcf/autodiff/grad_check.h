// Copyright (c) 2026 DTCF Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DTCF_AUTODIFF_GRAD_CHECK_H_
#define DTCF_AUTODIFF_GRAD_CHECK_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dtcf/autodiff/tensor.h"

namespace dtcf::ad {

using ScalarFn = std::function<Tensor<double>(const std::vector<Tensor<double>>&)>;

struct GradCheckOptions {
  double eps = 1e-6;
  // Checks at most this many coordinates per input (chosen with `seed`);
  // 0 checks every coordinate.
  int64_t max_coords_per_input = 0;
  uint64_t seed = 0;
  // Lower bound of the relative-error denominator.
  double denominator_floor = 1e-12;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  size_t worst_input = 0;
  int64_t worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  int64_t coords_checked = 0;

  bool Passed(double tolerance) const { return max_rel_error < tolerance; }
  std::string Describe() const;
};

// Compares reverse-mode gradients of the scalar `f(inputs)` with central
// differences. The inputs are perturbed in place and restored; `f` must read
// them on every call. Error per coordinate is
// |analytic - numeric| / max(|analytic|, |numeric|, floor).
// Throws NumericError naming the coordinate when either gradient is NaN.
GradCheckResult GradCheck(const ScalarFn& f, std::vector<Tensor<double>> inputs,
                          const GradCheckOptions& options = {});

GradCheckResult GradCheck(const std::function<Tensor<double>(const Tensor<double>&)>& f,
                          Tensor<double> x, double eps);

}  // namespace dtcf::ad

#endif  // DTCF_AUTODIFF_GRAD_CHECK_H_
