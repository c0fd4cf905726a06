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

#include "dtcf/nn/layers.h"

#include <cmath>
#include <vector>

#include "dtcf/base/error.h"

namespace dtcf::nn {

using ad::Shape;
using ad::Tensor;

double HeUniformBound(int64_t fan_in) {
  return std::sqrt(6.0 / static_cast<double>(fan_in));
}

double XavierUniformBound(int64_t fan_in, int64_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

template <typename T>
Conv2dLayer<T>::Conv2dLayer(int64_t in_channels, int64_t out_channels,
                            int kernel_h, int kernel_w,
                            const ad::Conv2dOptions& options, bool bias,
                            std::mt19937_64& rng)
    : options_(options) {
  if (in_channels < 1 || out_channels < 1 || kernel_h < 1 || kernel_w < 1) {
    throw ConfigError("conv layer dimensions must be positive");
  }
  kernels_ = UniformParameter<T>({out_channels, in_channels, kernel_h, kernel_w},
                                 HeUniformBound(in_channels * kernel_h * kernel_w),
                                 rng);
  if (bias) bias_ = Tensor<T>::Zeros({out_channels}, true);
}

template <typename T>
Tensor<T> Conv2dLayer<T>::Forward(const Tensor<T>& x) const {
  if (x.rank() >= 3 && x.dim(-3) != in_channels()) {
    throw DimensionError("conv layer expects " + std::to_string(in_channels()) +
                         " input channels, got " + std::to_string(x.dim(-3)));
  }
  Tensor<T> y = ad::Conv2d(x, kernels_, options_);
  if (!bias_.defined()) return y;
  Shape bshape(y.rank(), 1);
  bshape[y.rank() - 3] = out_channels();
  return ad::Add(y, ad::Reshape(bias_, bshape));
}

template <typename T>
void Conv2dLayer<T>::CollectParameters(const std::string& prefix,
                                       NamedTensors<T>* out) const {
  out->push_back({prefix + "weight", kernels_});
  if (bias_.defined()) out->push_back({prefix + "bias", bias_});
}

template <typename T>
BatchNorm2d<T>::BatchNorm2d(int64_t channels, double momentum, double epsilon)
    : momentum_(momentum), epsilon_(epsilon) {
  if (channels < 1) throw ConfigError("batch norm needs at least one channel");
  if (!(epsilon > 0.0)) throw ConfigError("batch norm epsilon must be positive");
  if (!(momentum >= 0.0 && momentum <= 1.0)) {
    throw ConfigError("batch norm momentum must lie in [0, 1]");
  }
  gamma_ = Tensor<T>::Full({channels}, T(1), true);
  beta_ = Tensor<T>::Zeros({channels}, true);
  running_mean_ = Tensor<T>::Zeros({channels});
  running_var_ = Tensor<T>::Full({channels}, T(1));
}

template <typename T>
Tensor<T> BatchNorm2d<T>::Forward(const Tensor<T>& x) {
  if (x.rank() != 3 && x.rank() != 4) {
    throw DimensionError("batch norm expects [N, C, H, W] or [C, H, W], got " +
                         ad::ShapeToString(x.shape()));
  }
  const int64_t batch = x.rank() == 4 ? x.dim(0) : 1;
  const int64_t channels = x.dim(-3);
  const int64_t plane = x.dim(-2) * x.dim(-1);
  if (channels != this->channels()) {
    throw DimensionError("batch norm expects " + std::to_string(this->channels()) +
                         " channels, got " + std::to_string(channels));
  }
  if (training_ && batch < 2) {
    throw ConfigError("batch norm in training mode needs a batch of at least 2");
  }
  const int64_t count = batch * plane;
  const auto& xv = x.data();
  const auto& gamma = gamma_.data();
  const auto& beta = beta_.data();

  std::vector<T> mean(channels), inv_std(channels);
  if (training_) {
    auto rm = running_mean_.mutable_data();
    auto rv = running_var_.mutable_data();
    for (int64_t c = 0; c < channels; ++c) {
      double sum = 0.0;
      for (int64_t n = 0; n < batch; ++n) {
        const T* p = xv.data() + (n * channels + c) * plane;
        for (int64_t i = 0; i < plane; ++i) sum += p[i];
      }
      const double mu = sum / count;
      double sq = 0.0;
      for (int64_t n = 0; n < batch; ++n) {
        const T* p = xv.data() + (n * channels + c) * plane;
        for (int64_t i = 0; i < plane; ++i) sq += (p[i] - mu) * (p[i] - mu);
      }
      const double var = sq / count;
      mean[c] = static_cast<T>(mu);
      inv_std[c] = static_cast<T>(1.0 / std::sqrt(var + epsilon_));
      rm[c] = static_cast<T>((1.0 - momentum_) * rm[c] + momentum_ * mu);
      rv[c] = static_cast<T>((1.0 - momentum_) * rv[c] +
                             momentum_ * sq / static_cast<double>(count - 1));
    }
  } else {
    const auto& rm = running_mean_.data();
    const auto& rv = running_var_.data();
    for (int64_t c = 0; c < channels; ++c) {
      if (rv[c] < T(0)) throw NumericError("negative running variance");
      mean[c] = rm[c];
      inv_std[c] = static_cast<T>(1.0 / std::sqrt(static_cast<double>(rv[c]) + epsilon_));
    }
  }

  std::vector<T> xhat(xv.size()), out(xv.size());
  for (int64_t n = 0; n < batch; ++n) {
    for (int64_t c = 0; c < channels; ++c) {
      const int64_t base = (n * channels + c) * plane;
      for (int64_t i = 0; i < plane; ++i) {
        const T h = (xv[base + i] - mean[c]) * inv_std[c];
        xhat[base + i] = h;
        out[base + i] = gamma[c] * h + beta[c];
      }
    }
  }

  const bool batch_stats = training_;
  return Tensor<T>::MakeResult(
      x.shape(), std::move(out), {x, gamma_, beta_}, "batch_norm",
      [=, xhat = std::move(xhat), inv_std = std::move(inv_std)](ad::Node<T>& self) {
        const auto& g = self.grad;
        const auto& gam = self.inputs[1]->value;
        std::vector<double> sum_g(channels, 0.0), sum_gx(channels, 0.0);
        for (int64_t n = 0; n < batch; ++n) {
          for (int64_t c = 0; c < channels; ++c) {
            const int64_t base = (n * channels + c) * plane;
            for (int64_t i = 0; i < plane; ++i) {
              sum_g[c] += g[base + i];
              sum_gx[c] += g[base + i] * xhat[base + i];
            }
          }
        }
        if (self.inputs[1]->requires_grad) {
          auto& gg = self.inputs[1]->GradBuffer();
          for (int64_t c = 0; c < channels; ++c) gg[c] += static_cast<T>(sum_gx[c]);
        }
        if (self.inputs[2]->requires_grad) {
          auto& gb = self.inputs[2]->GradBuffer();
          for (int64_t c = 0; c < channels; ++c) gb[c] += static_cast<T>(sum_g[c]);
        }
        if (!self.inputs[0]->requires_grad) return;
        auto& gx = self.inputs[0]->GradBuffer();
        for (int64_t n = 0; n < batch; ++n) {
          for (int64_t c = 0; c < channels; ++c) {
            const int64_t base = (n * channels + c) * plane;
            const T scale = gam[c] * inv_std[c];
            if (!batch_stats) {
              for (int64_t i = 0; i < plane; ++i) gx[base + i] += scale * g[base + i];
              continue;
            }
            const T mean_g = static_cast<T>(sum_g[c] / count);
            const T mean_gx = static_cast<T>(sum_gx[c] / count);
            for (int64_t i = 0; i < plane; ++i) {
              gx[base + i] += scale * (g[base + i] - mean_g - xhat[base + i] * mean_gx);
            }
          }
        }
      });
}

template <typename T>
void BatchNorm2d<T>::CollectParameters(const std::string& prefix,
                                       NamedTensors<T>* out) const {
  out->push_back({prefix + "gamma", gamma_});
  out->push_back({prefix + "beta", beta_});
}

template <typename T>
void BatchNorm2d<T>::CollectBuffers(const std::string& prefix,
                                    NamedTensors<T>* out) const {
  out->push_back({prefix + "running_mean", running_mean_});
  out->push_back({prefix + "running_var", running_var_});
}

template <typename T>
Linear<T>::Linear(int64_t in_features, int64_t out_features, bool bias,
                  std::mt19937_64& rng) {
  if (in_features < 1 || out_features < 1) {
    throw ConfigError("linear layer dimensions must be positive");
  }
  weight_ = UniformParameter<T>({out_features, in_features},
                                XavierUniformBound(in_features, out_features), rng);
  if (bias) bias_ = Tensor<T>::Zeros({out_features}, true);
}

template <typename T>
Tensor<T> Linear<T>::Forward(const Tensor<T>& x) const {
  if ((x.rank() != 1 && x.rank() != 2) || x.dim(-1) != in_features()) {
    throw DimensionError("linear layer expects [" + std::to_string(in_features()) +
                         "] or [N, " + std::to_string(in_features()) + "], got " +
                         ad::ShapeToString(x.shape()));
  }
  const bool vector = x.rank() == 1;
  Tensor<T> rows = vector ? ad::Reshape(x, {1, x.dim(0)}) : x;
  Tensor<T> y = ad::MatMul(rows, weight_, false, true);
  if (bias_.defined()) y = ad::Add(y, ad::Reshape(bias_, {1, out_features()}));
  return vector ? ad::Reshape(y, {out_features()}) : y;
}

template <typename T>
void Linear<T>::CollectParameters(const std::string& prefix,
                                  NamedTensors<T>* out) const {
  out->push_back({prefix + "weight", weight_});
  if (bias_.defined()) out->push_back({prefix + "bias", bias_});
}

template class Conv2dLayer<float>;
template class Conv2dLayer<double>;
template class BatchNorm2d<float>;
template class BatchNorm2d<double>;
template class Linear<float>;
template class Linear<double>;

}  // namespace dtcf::nn
