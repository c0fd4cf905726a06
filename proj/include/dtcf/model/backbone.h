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

// Quarter-width ResNet34 speaker embedding network.
//
//   feats [N, T, 80]
//   -> stem   conv3x3(1 -> 32) + BN + ReLU           [N, 32, T, 80]
//   -> stage1 3 blocks, 32 ch,  stride (1,1)         [N, 32, T, 80]
//   -> stage2 4 blocks, 64 ch,  stride (1,2)         [N, 64, T, 40]
//   -> stage3 6 blocks, 128 ch, stride (2,2)         [N, 128, T/2, 20]
//   -> stage4 3 blocks, 256 ch, stride (2,2)         [N, 256, T/4, 10]
//   -> attentive statistics pooling                  [N, 5120]
//   -> linear                                        [N, 512]
//
// Every residual block carries the configured attention module between its
// second BN and the skip addition.

#ifndef DTCF_MODEL_BACKBONE_H_
#define DTCF_MODEL_BACKBONE_H_

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dtcf/attention/attention.h"
#include "dtcf/autodiff/tensor.h"
#include "dtcf/base/key_values.h"
#include "dtcf/nn/layers.h"
#include "dtcf/nn/parameter.h"

namespace dtcf::model {

inline constexpr int64_t kMinFrames = 8;

struct StageStride {
  int time = 1;
  int freq = 1;
  bool operator==(const StageStride&) const = default;
};

struct BackboneConfig {
  std::vector<int64_t> widths = {32, 64, 128, 256};
  std::vector<int64_t> blocks = {3, 4, 6, 3};
  std::vector<StageStride> strides = {{1, 1}, {1, 2}, {2, 2}, {2, 2}};
  attention::AttentionKind attention = attention::AttentionKind::kDtcf;
  int64_t reduction = 8;
  bool attention_bias = false;
  int64_t feat_dim = 80;
  int64_t asp_hidden = 128;
  int64_t embed_dim = 512;

  // Widths [4, 8, 16, 32], one block per stage.
  static BackboneConfig Toy();

  void Validate() const;
  int64_t FinalFreqBins() const;
  int64_t FinalFrames(int64_t frames) const;
  // 2 * C_last * F_last.
  int64_t PooledDim() const;

  void ToKeyValues(KeyValues* kv) const;
  // Reads the keys listed by ModelKeys(); missing keys keep their defaults.
  static BackboneConfig FromKeyValues(const KeyValues& kv);
  static const std::vector<std::string>& ModelKeys();

  bool operator==(const BackboneConfig&) const = default;
};

template <typename T>
class ResidualBlock {
 public:
  ResidualBlock() = default;
  ResidualBlock(int64_t in_channels, int64_t out_channels, StageStride stride,
                const BackboneConfig& config, std::mt19937_64& rng);

  // x: [N, Cin, T, F] -> [N, Cout, T', F'].
  ad::Tensor<T> Forward(const ad::Tensor<T>& x);

  void set_training(bool training);
  void CollectParameters(const std::string& prefix, nn::NamedTensors<T>* out) const;
  void CollectBuffers(const std::string& prefix, nn::NamedTensors<T>* out) const;

  bool has_downsample() const { return has_downsample_; }
  attention::AttentionKind attention_kind() const { return kind_; }
  nn::Conv2dLayer<T>& conv1() { return conv1_; }
  nn::Conv2dLayer<T>& conv2() { return conv2_; }
  nn::BatchNorm2d<T>& bn1() { return bn1_; }
  nn::BatchNorm2d<T>& bn2() { return bn2_; }
  attention::SeBlock<T>& se() { return se_; }
  attention::DtcfBlock<T>& dtcf() { return dtcf_; }

 private:
  nn::Conv2dLayer<T> conv1_, conv2_, down_conv_;
  nn::BatchNorm2d<T> bn1_, bn2_, down_bn_;
  bool has_downsample_ = false;
  attention::AttentionKind kind_ = attention::AttentionKind::kNone;
  attention::SeBlock<T> se_;
  attention::DtcfBlock<T> dtcf_;
};

template <typename T>
class Backbone {
 public:
  Backbone() = default;
  Backbone(const BackboneConfig& config, std::mt19937_64& rng);

  // feats: [T, F] or [N, T, F]. Returns the last stage map [N, C, T', F'].
  // When `trace` is given it receives the stem output and every stage output.
  ad::Tensor<T> Forward(const ad::Tensor<T>& feats,
                        std::vector<ad::Tensor<T>>* trace = nullptr);

  void set_training(bool training);
  void CollectParameters(const std::string& prefix, nn::NamedTensors<T>* out) const;
  void CollectBuffers(const std::string& prefix, nn::NamedTensors<T>* out) const;

  std::vector<std::vector<ResidualBlock<T>>>& stages() { return stages_; }

 private:
  BackboneConfig config_;
  nn::Conv2dLayer<T> stem_conv_;
  nn::BatchNorm2d<T> stem_bn_;
  std::vector<std::vector<ResidualBlock<T>>> stages_;
};

// Attentive statistics pooling over frames.
//   alpha_t = softmax_t(v . tanh(W h_t + b)),  h_t = x[:, :, t, :] flattened
//   mean = sum_t alpha_t h_t
//   std  = sqrt(sum_t alpha_t (h_t - mean)^2 + 1e-9)
template <typename T>
class AspHead {
 public:
  static constexpr double kStdFloor = 1e-9;

  AspHead() = default;
  AspHead(int64_t channels, int64_t freq_bins, int64_t hidden, std::mt19937_64& rng);

  // x: [N, C, T, F] -> [N, 2 C F].
  ad::Tensor<T> Forward(const ad::Tensor<T>& x) const;
  // Frame weights [N, T].
  ad::Tensor<T> FrameWeights(const ad::Tensor<T>& x) const;

  void CollectParameters(const std::string& prefix, nn::NamedTensors<T>* out) const;

  int64_t input_dim() const { return w_.dim(1); }
  ad::Tensor<T>& w() { return w_; }
  ad::Tensor<T>& b() { return b_; }
  ad::Tensor<T>& v() { return v_; }

 private:
  ad::Tensor<T> Frames(const ad::Tensor<T>& x) const;
  ad::Tensor<T> Weights(const ad::Tensor<T>& frames) const;

  ad::Tensor<T> w_;  // [H, D]
  ad::Tensor<T> b_;  // [H]
  ad::Tensor<T> v_;  // [H]
};

template <typename T>
class SpeakerNet {
 public:
  SpeakerNet() = default;
  SpeakerNet(const BackboneConfig& config, uint64_t seed);

  // feats: [T, F] or [N, T, F] -> [N, embed_dim].
  ad::Tensor<T> Embed(const ad::Tensor<T>& feats);

  void set_training(bool training);
  bool training() const { return training_; }

  nn::NamedTensors<T> Parameters() const;
  nn::NamedTensors<T> Buffers() const;
  int64_t ParameterCount() const { return nn::TotalElements(Parameters()); }

  const BackboneConfig& config() const { return config_; }
  Backbone<T>& backbone() { return backbone_; }
  AspHead<T>& asp() { return asp_; }
  nn::Linear<T>& embedding() { return embedding_; }

 private:
  BackboneConfig config_;
  Backbone<T> backbone_;
  AspHead<T> asp_;
  nn::Linear<T> embedding_;
  bool training_ = true;
};

// Sum of attention parameters over all residual blocks of `config`.
int64_t AttentionParameterTotal(const BackboneConfig& config);

}  // namespace dtcf::model

#endif  // DTCF_MODEL_BACKBONE_H_
