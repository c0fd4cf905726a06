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

#include "dtcf/autodiff/grad_check.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "dtcf/base/error.h"

namespace dtcf::ad {

std::string GradCheckResult::Describe() const {
  std::ostringstream os;
  os.precision(6);
  os << "max_rel_error=" << max_rel_error << " worst=input" << worst_input
     << "[" << worst_index << "] analytic=" << worst_analytic
     << " numeric=" << worst_numeric << " coords=" << coords_checked;
  return os.str();
}

namespace {

std::vector<int64_t> PickCoordinates(int64_t size, int64_t limit,
                                     std::mt19937_64& rng) {
  std::vector<int64_t> coords(size);
  std::iota(coords.begin(), coords.end(), 0);
  if (limit > 0 && limit < size) {
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(limit);
    std::sort(coords.begin(), coords.end());
  }
  return coords;
}

double Evaluate(const ScalarFn& f, const std::vector<Tensor<double>>& inputs) {
  NoGradGuard guard;
  Tensor<double> y = f(inputs);
  if (y.size() != 1) throw DimensionError("grad check function must return a scalar");
  return y.item();
}

}  // namespace

GradCheckResult GradCheck(const ScalarFn& f, std::vector<Tensor<double>> inputs,
                          const GradCheckOptions& options) {
  for (auto& t : inputs) {
    t.set_requires_grad(true);
    t.ZeroGrad();
  }
  Tensor<double> y = f(inputs);
  Backward(y);

  GradCheckResult result;
  std::mt19937_64 rng(options.seed);
  for (size_t k = 0; k < inputs.size(); ++k) {
    Tensor<double>& x = inputs[k];
    std::vector<double> analytic(x.size(), 0.0);
    if (x.has_grad()) analytic.assign(x.grad().begin(), x.grad().end());
    auto values = x.mutable_data();
    for (int64_t i : PickCoordinates(x.size(), options.max_coords_per_input, rng)) {
      const double saved = values[i];
      values[i] = saved + options.eps;
      const double up = Evaluate(f, inputs);
      values[i] = saved - options.eps;
      const double down = Evaluate(f, inputs);
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * options.eps);
      const double a = analytic[i];
      if (std::isnan(a) || std::isnan(numeric)) {
        throw NumericError("NaN gradient at input " + std::to_string(k) +
                           " coordinate " + std::to_string(i));
      }
      const double denom =
          std::max({std::abs(a), std::abs(numeric), options.denominator_floor});
      const double err = std::abs(a - numeric) / denom;
      ++result.coords_checked;
      if (result.worst_index < 0 || err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_input = k;
        result.worst_index = i;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

GradCheckResult GradCheck(const std::function<Tensor<double>(const Tensor<double>&)>& f,
                          Tensor<double> x, double eps) {
  GradCheckOptions options;
  options.eps = eps;
  return GradCheck(
      [&f](const std::vector<Tensor<double>>& in) { return f(in[0]); }, {x},
      options);
}

}  // namespace dtcf::ad
