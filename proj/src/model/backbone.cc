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

#include "dtcf/model/backbone.h"

#include "dtcf/autodiff/ops.h"
#include "dtcf/base/error.h"

namespace dtcf::model {

using ad::Shape;
using ad::Tensor;
using attention::AttentionKind;

namespace {

ad::Conv2dOptions Conv3x3(StageStride stride) {
  return {stride.time, stride.freq, 1, 1};
}

std::string FormatStrides(const std::vector<StageStride>& strides) {
  std::string out;
  for (size_t i = 0; i < strides.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(strides[i].time) + "x" + std::to_string(strides[i].freq);
  }
  return out;
}

std::vector<StageStride> ParseStrides(const std::string& key, const std::string& value) {
  std::vector<StageStride> out;
  size_t pos = 0;
  while (pos <= value.size()) {
    size_t comma = value.find(',', pos);
    if (comma == std::string::npos) comma = value.size();
    const std::string item = value.substr(pos, comma - pos);
    const size_t x = item.find('x');
    if (x == std::string::npos) {
      throw ConfigError("key '" + key + "': stride '" + item + "' is not TxF");
    }
    out.push_back({static_cast<int>(ParseInt(key, item.substr(0, x))),
                   static_cast<int>(ParseInt(key, item.substr(x + 1)))});
    pos = comma + 1;
  }
  return out;
}

}  // namespace

BackboneConfig BackboneConfig::Toy() {
  BackboneConfig c;
  c.widths = {4, 8, 16, 32};
  c.blocks = {1, 1, 1, 1};
  return c;
}

void BackboneConfig::Validate() const {
  if (widths.empty() || widths.size() != blocks.size() ||
      widths.size() != strides.size()) {
    throw ConfigError("widths, blocks and strides must list the same number of stages");
  }
  for (size_t s = 0; s < widths.size(); ++s) {
    if (widths[s] < 1 || blocks[s] < 1) {
      throw ConfigError("stage " + std::to_string(s + 1) +
                        " needs a positive width and block count");
    }
    if (strides[s].time < 1 || strides[s].freq < 1) {
      throw ConfigError("stage strides must be positive");
    }
    if (attention != AttentionKind::kNone) {
      attention::ReducedChannels(widths[s], reduction);
    }
  }
  if (reduction < 1) throw ConfigError("reduction must be positive");
  if (feat_dim < 1 || asp_hidden < 1 || embed_dim < 1) {
    throw ConfigError("feat_dim, asp_hidden and embed_dim must be positive");
  }
  if (FinalFreqBins() < 1) throw ConfigError("strides leave no frequency bins");
}

int64_t BackboneConfig::FinalFreqBins() const {
  int64_t f = feat_dim;
  for (const auto& s : strides) f = ad::ConvOutputSize(f, 3, s.freq, 1);
  return f;
}

int64_t BackboneConfig::FinalFrames(int64_t frames) const {
  for (const auto& s : strides) frames = ad::ConvOutputSize(frames, 3, s.time, 1);
  return frames;
}

int64_t BackboneConfig::PooledDim() const {
  return 2 * widths.back() * FinalFreqBins();
}

const std::vector<std::string>& BackboneConfig::ModelKeys() {
  static const std::vector<std::string> keys = {
      "widths",         "blocks",   "strides",    "attention", "reduction",
      "attention_bias", "feat_dim", "asp_hidden", "embed_dim"};
  return keys;
}

void BackboneConfig::ToKeyValues(KeyValues* kv) const {
  (*kv)["widths"] = JoinInts(widths);
  (*kv)["blocks"] = JoinInts(blocks);
  (*kv)["strides"] = FormatStrides(strides);
  (*kv)["attention"] = attention::AttentionKindName(attention);
  (*kv)["reduction"] = std::to_string(reduction);
  (*kv)["attention_bias"] = attention_bias ? "true" : "false";
  (*kv)["feat_dim"] = std::to_string(feat_dim);
  (*kv)["asp_hidden"] = std::to_string(asp_hidden);
  (*kv)["embed_dim"] = std::to_string(embed_dim);
}

BackboneConfig BackboneConfig::FromKeyValues(const KeyValues& kv) {
  BackboneConfig c;
  auto get = [&kv](const std::string& key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (auto* v = get("widths")) c.widths = ParseIntList("widths", *v);
  if (auto* v = get("blocks")) c.blocks = ParseIntList("blocks", *v);
  if (auto* v = get("strides")) c.strides = ParseStrides("strides", *v);
  if (auto* v = get("attention")) c.attention = attention::ParseAttentionKind(*v);
  if (auto* v = get("reduction")) c.reduction = ParseInt("reduction", *v);
  if (auto* v = get("attention_bias")) c.attention_bias = ParseBool("attention_bias", *v);
  if (auto* v = get("feat_dim")) c.feat_dim = ParseInt("feat_dim", *v);
  if (auto* v = get("asp_hidden")) c.asp_hidden = ParseInt("asp_hidden", *v);
  if (auto* v = get("embed_dim")) c.embed_dim = ParseInt("embed_dim", *v);
  c.Validate();
  return c;
}

template <typename T>
ResidualBlock<T>::ResidualBlock(int64_t in_channels, int64_t out_channels,
                                StageStride stride, const BackboneConfig& config,
                                std::mt19937_64& rng)
    : conv1_(in_channels, out_channels, 3, 3, Conv3x3(stride), false, rng),
      conv2_(out_channels, out_channels, 3, 3, Conv3x3({1, 1}), false, rng),
      bn1_(out_channels),
      bn2_(out_channels),
      kind_(config.attention) {
  if (stride.time != 1 || stride.freq != 1 || in_channels != out_channels) {
    has_downsample_ = true;
    down_conv_ = nn::Conv2dLayer<T>(in_channels, out_channels, 1, 1,
                                    {stride.time, stride.freq, 0, 0}, false, rng);
    down_bn_ = nn::BatchNorm2d<T>(out_channels);
  }
  if (kind_ == AttentionKind::kSe) {
    se_ = attention::SeBlock<T>(out_channels, config.reduction,
                                config.attention_bias, rng);
  } else if (kind_ == AttentionKind::kDtcf) {
    dtcf_ = attention::DtcfBlock<T>(out_channels, config.reduction,
                                    config.attention_bias, rng);
  }
}

template <typename T>
Tensor<T> ResidualBlock<T>::Forward(const Tensor<T>& x) {
  Tensor<T> y = ad::Relu(bn1_.Forward(conv1_.Forward(x)));
  y = bn2_.Forward(conv2_.Forward(y));
  if (kind_ == AttentionKind::kSe) {
    y = attention::SeApply(y, se_);
  } else if (kind_ == AttentionKind::kDtcf) {
    y = attention::DtcfApply(y, dtcf_);
  }
  Tensor<T> skip = has_downsample_ ? down_bn_.Forward(down_conv_.Forward(x)) : x;
  if (skip.shape() != y.shape()) {
    throw DimensionError("residual path " + ad::ShapeToString(y.shape()) +
                         " does not match skip path " + ad::ShapeToString(skip.shape()));
  }
  return ad::Relu(ad::Add(y, skip));
}

template <typename T>
void ResidualBlock<T>::set_training(bool training) {
  bn1_.set_training(training);
  bn2_.set_training(training);
  if (has_downsample_) down_bn_.set_training(training);
}

template <typename T>
void ResidualBlock<T>::CollectParameters(const std::string& prefix,
                                         nn::NamedTensors<T>* out) const {
  conv1_.CollectParameters(prefix + "conv1.", out);
  bn1_.CollectParameters(prefix + "bn1.", out);
  conv2_.CollectParameters(prefix + "conv2.", out);
  bn2_.CollectParameters(prefix + "bn2.", out);
  if (has_downsample_) {
    down_conv_.CollectParameters(prefix + "down.conv.", out);
    down_bn_.CollectParameters(prefix + "down.bn.", out);
  }
  if (kind_ == AttentionKind::kSe) se_.CollectParameters(prefix + "se.", out);
  if (kind_ == AttentionKind::kDtcf) dtcf_.CollectParameters(prefix + "dtcf.", out);
}

template <typename T>
void ResidualBlock<T>::CollectBuffers(const std::string& prefix,
                                      nn::NamedTensors<T>* out) const {
  bn1_.CollectBuffers(prefix + "bn1.", out);
  bn2_.CollectBuffers(prefix + "bn2.", out);
  if (has_downsample_) down_bn_.CollectBuffers(prefix + "down.bn.", out);
}

template <typename T>
Backbone<T>::Backbone(const BackboneConfig& config, std::mt19937_64& rng)
    : config_(config) {
  config_.Validate();
  stem_conv_ = nn::Conv2dLayer<T>(1, config_.widths[0], 3, 3, Conv3x3({1, 1}),
                                  false, rng);
  stem_bn_ = nn::BatchNorm2d<T>(config_.widths[0]);
  int64_t in = config_.widths[0];
  for (size_t s = 0; s < config_.widths.size(); ++s) {
    std::vector<ResidualBlock<T>> stage;
    for (int64_t b = 0; b < config_.blocks[s]; ++b) {
      const StageStride stride = b == 0 ? config_.strides[s] : StageStride{1, 1};
      stage.emplace_back(in, config_.widths[s], stride, config_, rng);
      in = config_.widths[s];
    }
    stages_.push_back(std::move(stage));
  }
}

template <typename T>
Tensor<T> Backbone<T>::Forward(const Tensor<T>& feats, std::vector<Tensor<T>>* trace) {
  if (feats.rank() != 2 && feats.rank() != 3) {
    throw DimensionError("features must be [T, F] or [N, T, F], got " +
                         ad::ShapeToString(feats.shape()));
  }
  if (feats.dim(-1) != config_.feat_dim) {
    throw DimensionError("features have " + std::to_string(feats.dim(-1)) +
                         " bins, model expects " + std::to_string(config_.feat_dim));
  }
  if (feats.dim(-2) < kMinFrames) {
    throw DimensionError("utterance of " + std::to_string(feats.dim(-2)) +
                         " frames is shorter than the minimum of " +
                         std::to_string(kMinFrames));
  }
  const int64_t batch = feats.rank() == 3 ? feats.dim(0) : 1;
  Tensor<T> x = ad::Reshape(feats, {batch, 1, feats.dim(-2), feats.dim(-1)});
  x = ad::Relu(stem_bn_.Forward(stem_conv_.Forward(x)));
  if (trace) trace->push_back(x);
  for (auto& stage : stages_) {
    for (auto& block : stage) x = block.Forward(x);
    if (trace) trace->push_back(x);
  }
  return x;
}

template <typename T>
void Backbone<T>::set_training(bool training) {
  stem_bn_.set_training(training);
  for (auto& stage : stages_) {
    for (auto& block : stage) block.set_training(training);
  }
}

template <typename T>
void Backbone<T>::CollectParameters(const std::string& prefix,
                                    nn::NamedTensors<T>* out) const {
  stem_conv_.CollectParameters(prefix + "stem.conv.", out);
  stem_bn_.CollectParameters(prefix + "stem.bn.", out);
  for (size_t s = 0; s < stages_.size(); ++s) {
    for (size_t b = 0; b < stages_[s].size(); ++b) {
      stages_[s][b].CollectParameters(
          prefix + "stage" + std::to_string(s + 1) + "." + std::to_string(b) + ".", out);
    }
  }
}

template <typename T>
void Backbone<T>::CollectBuffers(const std::string& prefix,
                                 nn::NamedTensors<T>* out) const {
  stem_bn_.CollectBuffers(prefix + "stem.bn.", out);
  for (size_t s = 0; s < stages_.size(); ++s) {
    for (size_t b = 0; b < stages_[s].size(); ++b) {
      stages_[s][b].CollectBuffers(
          prefix + "stage" + std::to_string(s + 1) + "." + std::to_string(b) + ".", out);
    }
  }
}

template <typename T>
AspHead<T>::AspHead(int64_t channels, int64_t freq_bins, int64_t hidden,
                    std::mt19937_64& rng) {
  const int64_t dim = channels * freq_bins;
  w_ = nn::UniformParameter<T>({hidden, dim}, nn::XavierUniformBound(dim, hidden), rng);
  b_ = Tensor<T>::Zeros({hidden}, true);
  v_ = nn::UniformParameter<T>({hidden}, nn::XavierUniformBound(hidden, 1), rng);
}

template <typename T>
Tensor<T> AspHead<T>::Frames(const Tensor<T>& x) const {
  if (x.rank() != 4) {
    throw DimensionError("pooling expects [N, C, T, F], got " +
                         ad::ShapeToString(x.shape()));
  }
  const int64_t n = x.dim(0), c = x.dim(1), t = x.dim(2), f = x.dim(3);
  if (t < 1) throw DimensionError("pooling needs at least one frame");
  if (c * f != input_dim()) {
    throw DimensionError("pooling expects C*F = " + std::to_string(input_dim()) +
                         ", got " + std::to_string(c * f));
  }
  return ad::Reshape(ad::Permute(x, {0, 2, 1, 3}), {n, t, c * f});
}

template <typename T>
Tensor<T> AspHead<T>::Weights(const Tensor<T>& frames) const {
  const int64_t n = frames.dim(0), t = frames.dim(1), d = frames.dim(2);
  const int64_t h = w_.dim(0);
  Tensor<T> rows = ad::Reshape(frames, {n * t, d});
  Tensor<T> hidden = ad::Tanh(
      ad::Add(ad::MatMul(rows, w_, false, true), ad::Reshape(b_, {1, h})));
  Tensor<T> scores = ad::MatMul(hidden, ad::Reshape(v_, {h, 1}));
  return ad::Softmax(ad::Reshape(scores, {n, t, 1}), 1);
}

template <typename T>
Tensor<T> AspHead<T>::FrameWeights(const Tensor<T>& x) const {
  Tensor<T> alpha = Weights(Frames(x));
  return ad::Reshape(alpha, {alpha.dim(0), alpha.dim(1)});
}

template <typename T>
Tensor<T> AspHead<T>::Forward(const Tensor<T>& x) const {
  Tensor<T> frames = Frames(x);
  Tensor<T> alpha = Weights(frames);
  const int64_t n = frames.dim(0), d = frames.dim(2);
  Tensor<T> mean = ad::Sum(ad::Mul(alpha, frames), 1, true);
  Tensor<T> centered = ad::Sub(frames, mean);
  Tensor<T> var = ad::Sum(ad::Mul(alpha, ad::Square(centered)), 1);
  Tensor<T> stddev = ad::Sqrt(ad::AddScalar(var, static_cast<T>(kStdFloor)));
  return ad::Concat(ad::Reshape(mean, {n, d}), stddev, 1);
}

template <typename T>
void AspHead<T>::CollectParameters(const std::string& prefix,
                                   nn::NamedTensors<T>* out) const {
  out->push_back({prefix + "w", w_});
  out->push_back({prefix + "b", b_});
  out->push_back({prefix + "v", v_});
}

template <typename T>
SpeakerNet<T>::SpeakerNet(const BackboneConfig& config, uint64_t seed)
    : config_(config) {
  config_.Validate();
  std::mt19937_64 rng(seed);
  backbone_ = Backbone<T>(config_, rng);
  asp_ = AspHead<T>(config_.widths.back(), config_.FinalFreqBins(),
                    config_.asp_hidden, rng);
  embedding_ = nn::Linear<T>(config_.PooledDim(), config_.embed_dim, true, rng);
}

template <typename T>
Tensor<T> SpeakerNet<T>::Embed(const Tensor<T>& feats) {
  return embedding_.Forward(asp_.Forward(backbone_.Forward(feats)));
}

template <typename T>
void SpeakerNet<T>::set_training(bool training) {
  training_ = training;
  backbone_.set_training(training);
}

template <typename T>
nn::NamedTensors<T> SpeakerNet<T>::Parameters() const {
  nn::NamedTensors<T> out;
  backbone_.CollectParameters("backbone.", &out);
  asp_.CollectParameters("asp.", &out);
  embedding_.CollectParameters("embedding.", &out);
  return out;
}

template <typename T>
nn::NamedTensors<T> SpeakerNet<T>::Buffers() const {
  nn::NamedTensors<T> out;
  backbone_.CollectBuffers("backbone.", &out);
  return out;
}

int64_t AttentionParameterTotal(const BackboneConfig& config) {
  int64_t total = 0;
  for (size_t s = 0; s < config.widths.size(); ++s) {
    total += config.blocks[s] *
             attention::AttentionParamCount(config.attention, config.widths[s],
                                            config.reduction, config.attention_bias);
  }
  return total;
}

template class ResidualBlock<float>;
template class ResidualBlock<double>;
template class Backbone<float>;
template class Backbone<double>;
template class AspHead<float>;
template class AspHead<double>;
template class SpeakerNet<float>;
template class SpeakerNet<double>;

}  // namespace dtcf::model
