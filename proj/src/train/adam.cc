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

#include "dtcf/train/adam.h"

#include <cmath>

#include "dtcf/base/error.h"
#include "dtcf/base/key_values.h"

namespace dtcf::train {

template <typename T>
Adam<T>::Adam(nn::NamedTensors<T> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  if (!(options_.beta1 >= 0.0 && options_.beta1 < 1.0 && options_.beta2 >= 0.0 &&
        options_.beta2 < 1.0 && options_.eps > 0.0)) {
    throw ConfigError("Adam needs 0 <= beta < 1 and eps > 0");
  }
  for (const auto& p : params_) {
    m_.push_back(ad::Tensor<T>::Zeros(p.tensor.shape()));
    v_.push_back(ad::Tensor<T>::Zeros(p.tensor.shape()));
  }
}

template <typename T>
void Adam<T>::Step(double lr, double weight_decay) {
  for (const auto& p : params_) {
    for (T g : p.tensor.grad()) {
      if (!std::isfinite(static_cast<double>(g))) {
        throw NumericError("non-finite gradient in parameter '" + p.name + "'");
      }
    }
  }
  ++step_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const double shrink = 1.0 - lr * weight_decay;
  for (size_t i = 0; i < params_.size(); ++i) {
    ad::Tensor<T> p = params_[i].tensor;
    auto value = p.mutable_data();
    auto grad = p.grad();
    auto m = m_[i].mutable_data();
    auto v = v_[i].mutable_data();
    for (size_t j = 0; j < value.size(); ++j) {
      const double g = grad.empty() ? 0.0 : static_cast<double>(grad[j]);
      const double mj = b1 * m[j] + (1.0 - b1) * g;
      const double vj = b2 * v[j] + (1.0 - b2) * g * g;
      m[j] = static_cast<T>(mj);
      v[j] = static_cast<T>(vj);
      const double delta = lr * (mj / c1) / (std::sqrt(vj / c2) + options_.eps);
      value[j] = static_cast<T>(shrink * value[j] - delta);
    }
  }
}

template <typename T>
void Adam<T>::ZeroGrad() {
  for (auto& p : params_) p.tensor.ZeroGrad();
}

template <typename T>
void Adam<T>::Save(const std::string& prefix, model::Checkpoint* ckpt) const {
  for (size_t i = 0; i < params_.size(); ++i) {
    ckpt->Put(prefix + "m." + params_[i].name, m_[i]);
    ckpt->Put(prefix + "v." + params_[i].name, v_[i]);
  }
  ckpt->config()[prefix + "step"] = std::to_string(step_);
}

template <typename T>
void Adam<T>::Load(const std::string& prefix, const model::Checkpoint& ckpt) {
  for (size_t i = 0; i < params_.size(); ++i) {
    ckpt.Get(prefix + "m." + params_[i].name, &m_[i]);
    ckpt.Get(prefix + "v." + params_[i].name, &v_[i]);
  }
  const auto it = ckpt.config().find(prefix + "step");
  if (it == ckpt.config().end()) throw DataError("checkpoint lacks '" + prefix + "step'");
  step_ = ParseInt(prefix + "step", it->second);
}

template class Adam<float>;
template class Adam<double>;

}  // namespace dtcf::train
