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

#ifndef DTCF_NN_LAYERS_H_
#define DTCF_NN_LAYERS_H_

#include <cstdint>
#include <random>
#include <string>

#include "dtcf/autodiff/ops.h"
#include "dtcf/autodiff/tensor.h"
#include "dtcf/nn/parameter.h"

namespace dtcf::nn {

// 2-D convolution with He-uniform kernels and an optional zero-initialized
// per-channel bias.
template <typename T>
class Conv2dLayer {
 public:
  Conv2dLayer() = default;
  Conv2dLayer(int64_t in_channels, int64_t out_channels, int kernel_h,
              int kernel_w, const ad::Conv2dOptions& options, bool bias,
              std::mt19937_64& rng);

  // x: [Cin, H, W] or [N, Cin, H, W].
  ad::Tensor<T> Forward(const ad::Tensor<T>& x) const;

  void CollectParameters(const std::string& prefix, NamedTensors<T>* out) const;

  int64_t in_channels() const { return kernels_.dim(1); }
  int64_t out_channels() const { return kernels_.dim(0); }
  const ad::Conv2dOptions& options() const { return options_; }
  ad::Tensor<T>& kernels() { return kernels_; }
  ad::Tensor<T>& bias() { return bias_; }
  bool has_bias() const { return bias_.defined(); }

 private:
  ad::Tensor<T> kernels_;  // [Cout, Cin, kh, kw]
  ad::Tensor<T> bias_;     // [Cout] or undefined
  ad::Conv2dOptions options_;
};

// Per-channel batch normalization over (N, H, W). Training mode normalizes
// with the biased batch variance and blends the unbiased variance into the
// running estimate; evaluation mode uses the running statistics only.
template <typename T>
class BatchNorm2d {
 public:
  BatchNorm2d() = default;
  explicit BatchNorm2d(int64_t channels, double momentum = 0.1,
                       double epsilon = 1e-5);

  // x: [N, C, H, W]; [C, H, W] is accepted in evaluation mode. Training mode
  // needs N >= 2.
  ad::Tensor<T> Forward(const ad::Tensor<T>& x);

  void set_training(bool training) { training_ = training; }
  bool training() const { return training_; }

  void CollectParameters(const std::string& prefix, NamedTensors<T>* out) const;
  void CollectBuffers(const std::string& prefix, NamedTensors<T>* out) const;

  int64_t channels() const { return gamma_.size(); }
  double momentum() const { return momentum_; }
  double epsilon() const { return epsilon_; }
  ad::Tensor<T>& gamma() { return gamma_; }
  ad::Tensor<T>& beta() { return beta_; }
  ad::Tensor<T>& running_mean() { return running_mean_; }
  ad::Tensor<T>& running_var() { return running_var_; }

 private:
  ad::Tensor<T> gamma_;
  ad::Tensor<T> beta_;
  ad::Tensor<T> running_mean_;
  ad::Tensor<T> running_var_;
  double momentum_ = 0.1;
  double epsilon_ = 1e-5;
  bool training_ = true;
};

// y = W x + b with Xavier-uniform W [out, in].
template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(int64_t in_features, int64_t out_features, bool bias,
         std::mt19937_64& rng);

  // x: [in] or [N, in].
  ad::Tensor<T> Forward(const ad::Tensor<T>& x) const;

  void CollectParameters(const std::string& prefix, NamedTensors<T>* out) const;

  int64_t in_features() const { return weight_.dim(1); }
  int64_t out_features() const { return weight_.dim(0); }
  ad::Tensor<T>& weight() { return weight_; }
  ad::Tensor<T>& bias() { return bias_; }

 private:
  ad::Tensor<T> weight_;
  ad::Tensor<T> bias_;
};

}  // namespace dtcf::nn

#endif  // DTCF_NN_LAYERS_H_
