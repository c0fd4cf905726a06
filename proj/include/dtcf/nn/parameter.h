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

#ifndef DTCF_NN_PARAMETER_H_
#define DTCF_NN_PARAMETER_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dtcf/autodiff/tensor.h"

namespace dtcf::nn {

template <typename T>
struct NamedTensor {
  std::string name;
  ad::Tensor<T> tensor;
};

template <typename T>
using NamedTensors = std::vector<NamedTensor<T>>;

template <typename T>
int64_t TotalElements(const NamedTensors<T>& tensors) {
  int64_t total = 0;
  for (const auto& t : tensors) total += t.tensor.size();
  return total;
}

// U(-bound, bound) trainable tensor.
template <typename T>
ad::Tensor<T> UniformParameter(const ad::Shape& shape, double bound,
                               std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<T> data(ad::NumElements(shape));
  for (auto& v : data) v = static_cast<T>(dist(rng));
  return ad::Tensor<T>::FromData(shape, std::move(data), true);
}

// He-uniform: bound sqrt(6 / fan_in).
double HeUniformBound(int64_t fan_in);
// Xavier-uniform: bound sqrt(6 / (fan_in + fan_out)).
double XavierUniformBound(int64_t fan_in, int64_t fan_out);

}  // namespace dtcf::nn

#endif  // DTCF_NN_PARAMETER_H_
