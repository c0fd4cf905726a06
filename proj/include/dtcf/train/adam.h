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

// Adam with decoupled weight decay:
//
//   p <- p - lr wd p
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
//   p <- p - lr m_hat / (sqrt(v_hat) + eps)

#ifndef DTCF_TRAIN_ADAM_H_
#define DTCF_TRAIN_ADAM_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dtcf/autodiff/tensor.h"
#include "dtcf/model/checkpoint.h"
#include "dtcf/nn/parameter.h"

namespace dtcf::train {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
class Adam {
 public:
  Adam() = default;
  Adam(nn::NamedTensors<T> params, AdamOptions options = {});

  // Uses the accumulated gradient of every parameter (zero when none).
  // Throws NumericError naming the parameter on a non-finite gradient,
  // before any parameter is modified.
  void Step(double lr, double weight_decay);
  void ZeroGrad();

  int64_t step_count() const { return step_; }
  const nn::NamedTensors<T>& params() const { return params_; }
  const std::vector<ad::Tensor<T>>& first_moments() const { return m_; }
  const std::vector<ad::Tensor<T>>& second_moments() const { return v_; }

  // Moments are stored as "<prefix>m.<name>" and "<prefix>v.<name>", the
  // step count under the config key "<prefix>step".
  void Save(const std::string& prefix, model::Checkpoint* ckpt) const;
  void Load(const std::string& prefix, const model::Checkpoint& ckpt);

 private:
  nn::NamedTensors<T> params_;
  std::vector<ad::Tensor<T>> m_, v_;
  AdamOptions options_;
  int64_t step_ = 0;
};

}  // namespace dtcf::train

#endif  // DTCF_TRAIN_ADAM_H_
