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

#include "dtcf/attention/attention.h"

#include <vector>

#include "dtcf/autodiff/ops.h"
#include "dtcf/base/error.h"

namespace dtcf::attention {

using ad::Shape;
using ad::Tensor;

AttentionKind ParseAttentionKind(std::string_view name) {
  if (name == "none") return AttentionKind::kNone;
  if (name == "se") return AttentionKind::kSe;
  if (name == "dtcf") return AttentionKind::kDtcf;
  throw ConfigError("unknown attention kind '" + std::string(name) +
                    "' (expected none, se or dtcf)");
}

std::string AttentionKindName(AttentionKind kind) {
  switch (kind) {
    case AttentionKind::kNone:
      return "none";
    case AttentionKind::kSe:
      return "se";
    case AttentionKind::kDtcf:
      return "dtcf";
  }
  return "none";
}

int64_t ReducedChannels(int64_t channels, int64_t reduction) {
  if (channels < 1 || reduction < 1) {
    throw ConfigError("attention needs channels >= 1 and reduction >= 1");
  }
  if (channels < reduction) return 1;
  if (channels % reduction != 0) {
    throw ConfigError("channels " + std::to_string(channels) +
                      " not divisible by reduction " + std::to_string(reduction));
  }
  return channels / reduction;
}

namespace {

template <typename T>
Tensor<T> HeUniform(int64_t rows, int64_t cols, std::mt19937_64& rng) {
  return nn::UniformParameter<T>({rows, cols}, nn::HeUniformBound(cols), rng);
}

// Applies w [Cout, Cin] as a 1x1 convolution to x [N, Cin, P], adding the
// optional bias [Cout]. Returns [N, Cout, P].
template <typename T>
Tensor<T> ChannelMix(const Tensor<T>& w, const Tensor<T>& bias,
                     const Tensor<T>& x) {
  const int64_t batch = x.dim(0), cin = x.dim(1), positions = x.dim(2);
  const int64_t cout = w.dim(0);
  if (w.dim(1) != cin) {
    throw DimensionError("attention weight " + ad::ShapeToString(w.shape()) +
                         " does not match " + std::to_string(cin) + " channels");
  }
  Tensor<T> y = ad::Conv2d(ad::Reshape(x, {batch, cin, 1, positions}),
                           ad::Reshape(w, {cout, cin, 1, 1}));
  y = ad::Reshape(y, {batch, cout, positions});
  if (bias.defined()) y = ad::Add(y, ad::Reshape(bias, {1, cout, 1}));
  return y;
}

// Adds a leading batch axis when `x` has rank `unbatched_rank`.
template <typename T>
Tensor<T> Batched(const Tensor<T>& x, int unbatched_rank) {
  if (x.rank() == unbatched_rank) {
    Shape s = x.shape();
    s.insert(s.begin(), 1);
    return ad::Reshape(x, s);
  }
  if (x.rank() != unbatched_rank + 1) {
    throw DimensionError("attention input of rank " + std::to_string(x.rank()) +
                         " (expected " + std::to_string(unbatched_rank) + " or " +
                         std::to_string(unbatched_rank + 1) + ")");
  }
  return x;
}

template <typename T>
Tensor<T> Unbatched(const Tensor<T>& x, bool drop) {
  if (!drop) return x;
  return ad::Reshape(x, Shape(x.shape().begin() + 1, x.shape().end()));
}

template <typename T>
void CheckFeatureMap(const Tensor<T>& x, int64_t channels) {
  if (x.rank() != 3 && x.rank() != 4) {
    throw DimensionError("feature map must be [C, T, F] or [N, C, T, F], got " +
                         ad::ShapeToString(x.shape()));
  }
  if (x.dim(-2) < 1 || x.dim(-1) < 1) {
    throw DimensionError("feature map has an empty time or frequency axis");
  }
  if (channels > 0 && x.dim(-3) != channels) {
    throw DimensionError("feature map has " + std::to_string(x.dim(-3)) +
                         " channels, block expects " + std::to_string(channels));
  }
}

}  // namespace

template <typename T>
SeBlock<T>::SeBlock(int64_t channels, int64_t reduction, bool bias,
                    std::mt19937_64& rng)
    : reduction_(reduction) {
  const int64_t reduced = ReducedChannels(channels, reduction);
  w1_ = HeUniform<T>(reduced, channels, rng);
  w2_ = HeUniform<T>(channels, reduced, rng);
  if (bias) {
    b1_ = Tensor<T>::Zeros({reduced}, true);
    b2_ = Tensor<T>::Zeros({channels}, true);
  }
}

template <typename T>
void SeBlock<T>::CollectParameters(const std::string& prefix,
                                   nn::NamedTensors<T>* out) const {
  out->push_back({prefix + "w1", w1_});
  out->push_back({prefix + "w2", w2_});
  if (b1_.defined()) {
    out->push_back({prefix + "b1", b1_});
    out->push_back({prefix + "b2", b2_});
  }
}

template <typename T>
DtcfBlock<T>::DtcfBlock(int64_t channels, int64_t reduction, bool bias,
                        std::mt19937_64& rng)
    : reduction_(reduction) {
  const int64_t reduced = ReducedChannels(channels, reduction);
  w1_ = HeUniform<T>(reduced, channels, rng);
  w2_ = HeUniform<T>(channels, reduced, rng);
  w3_ = HeUniform<T>(channels, reduced, rng);
  if (bias) {
    b1_ = Tensor<T>::Zeros({reduced}, true);
    b2_ = Tensor<T>::Zeros({channels}, true);
    b3_ = Tensor<T>::Zeros({channels}, true);
  }
}

template <typename T>
void DtcfBlock<T>::CollectParameters(const std::string& prefix,
                                     nn::NamedTensors<T>* out) const {
  out->push_back({prefix + "w1", w1_});
  out->push_back({prefix + "w2", w2_});
  out->push_back({prefix + "w3", w3_});
  if (b1_.defined()) {
    out->push_back({prefix + "b1", b1_});
    out->push_back({prefix + "b2", b2_});
    out->push_back({prefix + "b3", b3_});
  }
}

template <typename T>
Tensor<T> SeSqueeze(const Tensor<T>& x) {
  CheckFeatureMap(x, 0);
  return ad::Mean(ad::Mean(x, -1), -1);
}

template <typename T>
Tensor<T> SeMask(const Tensor<T>& xc, const SeBlock<T>& block) {
  const bool single = xc.rank() == 1;
  Tensor<T> v = Batched(xc, 1);
  if (v.dim(1) != block.channels()) {
    throw DimensionError("SE input has " + std::to_string(v.dim(1)) +
                         " channels, block expects " +
                         std::to_string(block.channels()));
  }
  v = ad::Reshape(v, {v.dim(0), v.dim(1), 1});
  Tensor<T> hidden = ad::Relu(ChannelMix(block.w1(), block.b1(), v));
  Tensor<T> mask = ad::Sigmoid(ChannelMix(block.w2(), block.b2(), hidden));
  mask = ad::Reshape(mask, {mask.dim(0), mask.dim(1)});
  return Unbatched(mask, single);
}

template <typename T>
Tensor<T> SeApply(const Tensor<T>& x, const SeBlock<T>& block) {
  CheckFeatureMap(x, block.channels());
  Tensor<T> mask = SeMask(SeSqueeze(x), block);
  Shape gate = x.shape();
  gate[gate.size() - 1] = 1;
  gate[gate.size() - 2] = 1;
  return ad::Mul(x, ad::Reshape(mask, gate));
}

template <typename T>
DtcfProfiles<T> DtcfPool(const Tensor<T>& x) {
  CheckFeatureMap(x, 0);
  return {ad::Mean(x, -2), ad::Mean(x, -1)};
}

template <typename T>
Tensor<T> DtcfEncode(const Tensor<T>& freq, const Tensor<T>& time,
                     const DtcfBlock<T>& block) {
  if (freq.rank() != time.rank()) {
    throw DimensionError("frequency and time profiles differ in rank");
  }
  const bool single = freq.rank() == 2;
  Tensor<T> f = Batched(freq, 2);
  Tensor<T> t = Batched(time, 2);
  if (f.dim(1) != block.channels() || t.dim(1) != block.channels()) {
    throw DimensionError("profile channels do not match the DTCF block");
  }
  Tensor<T> joint = ad::Concat(f, t, -1);
  return Unbatched(ad::Relu(ChannelMix(block.w1(), block.b1(), joint)), single);
}

template <typename T>
DtcfMaskPair<T> DtcfMasks(const Tensor<T>& encoded, const DtcfBlock<T>& block,
                          int64_t freq_bins) {
  const bool single = encoded.rank() == 2;
  Tensor<T> e = Batched(encoded, 2);
  if (e.dim(1) != block.reduced_channels()) {
    throw DimensionError("encoding has " + std::to_string(e.dim(1)) +
                         " channels, block expects " +
                         std::to_string(block.reduced_channels()));
  }
  auto [freq_part, time_part] = ad::Split(e, -1, freq_bins);
  DtcfMaskPair<T> masks;
  masks.time = Unbatched(ad::Sigmoid(ChannelMix(block.w2(), block.b2(), time_part)),
                         single);
  masks.freq = Unbatched(ad::Sigmoid(ChannelMix(block.w3(), block.b3(), freq_part)),
                         single);
  return masks;
}

template <typename T>
Tensor<T> Recalibrate(const Tensor<T>& x, const Tensor<T>& time_mask,
                      const Tensor<T>& freq_mask) {
  CheckFeatureMap(x, 0);
  const bool single = x.rank() == 3;
  const int64_t batch = single ? 1 : x.dim(0);
  const int64_t channels = x.dim(-3), frames = x.dim(-2), bins = x.dim(-1);
  const Shape want_time = single ? Shape{channels, frames} : Shape{batch, channels, frames};
  const Shape want_freq = single ? Shape{channels, bins} : Shape{batch, channels, bins};
  if (time_mask.shape() != want_time || freq_mask.shape() != want_freq) {
    throw DimensionError("mask shapes " + ad::ShapeToString(time_mask.shape()) + ", " +
                         ad::ShapeToString(freq_mask.shape()) +
                         " do not match feature map " + ad::ShapeToString(x.shape()));
  }
  const int64_t groups = batch * channels;
  const auto& xv = x.data();
  const auto& mt = time_mask.data();
  const auto& mf = freq_mask.data();
  std::vector<T> out(xv.size());
  for (int64_t g = 0; g < groups; ++g) {
    for (int64_t t = 0; t < frames; ++t) {
      const int64_t row = (g * frames + t) * bins;
      for (int64_t f = 0; f < bins; ++f) {
        out[row + f] = xv[row + f] * mt[g * frames + t] * mf[g * bins + f];
      }
    }
  }
  return Tensor<T>::MakeResult(
      x.shape(), std::move(out), {x, time_mask, freq_mask}, "recalibrate",
      [groups, frames, bins](ad::Node<T>& self) {
        const auto& g = self.grad;
        const auto& xin = self.inputs[0]->value;
        const auto& tm = self.inputs[1]->value;
        const auto& fm = self.inputs[2]->value;
        T* gx = self.inputs[0]->requires_grad ? self.inputs[0]->GradBuffer().data() : nullptr;
        T* gt = self.inputs[1]->requires_grad ? self.inputs[1]->GradBuffer().data() : nullptr;
        T* gf = self.inputs[2]->requires_grad ? self.inputs[2]->GradBuffer().data() : nullptr;
        for (int64_t k = 0; k < groups; ++k) {
          for (int64_t t = 0; t < frames; ++t) {
            const int64_t row = (k * frames + t) * bins;
            const T tv = tm[k * frames + t];
            T acc_t = 0;
            for (int64_t f = 0; f < bins; ++f) {
              const T fv = fm[k * bins + f];
              const T gv = g[row + f];
              if (gx) gx[row + f] += gv * tv * fv;
              acc_t += gv * xin[row + f] * fv;
              if (gf) gf[k * bins + f] += gv * xin[row + f] * tv;
            }
            if (gt) gt[k * frames + t] += acc_t;
          }
        }
      });
}

template <typename T>
Tensor<T> DtcfApply(const Tensor<T>& x, const DtcfBlock<T>& block) {
  CheckFeatureMap(x, block.channels());
  DtcfProfiles<T> pooled = DtcfPool(x);
  Tensor<T> encoded = DtcfEncode(pooled.freq, pooled.time, block);
  DtcfMaskPair<T> masks = DtcfMasks(encoded, block, x.dim(-1));
  return Recalibrate(x, masks.time, masks.freq);
}

template <typename T>
int64_t ParamCount(const SeBlock<T>& block) {
  return AttentionParamCount(AttentionKind::kSe, block.channels(),
                             block.reduction(), block.has_bias());
}

template <typename T>
int64_t ParamCount(const DtcfBlock<T>& block) {
  return AttentionParamCount(AttentionKind::kDtcf, block.channels(),
                             block.reduction(), block.has_bias());
}

int64_t AttentionParamCount(AttentionKind kind, int64_t channels,
                            int64_t reduction, bool bias) {
  if (kind == AttentionKind::kNone) return 0;
  const int64_t reduced = ReducedChannels(channels, reduction);
  if (kind == AttentionKind::kSe) {
    return 2 * channels * reduced + (bias ? reduced + channels : 0);
  }
  return 3 * channels * reduced + (bias ? reduced + 2 * channels : 0);
}

#define DTCF_INSTANTIATE_ATTENTION(T)                                          \
  template class SeBlock<T>;                                                   \
  template class DtcfBlock<T>;                                                 \
  template Tensor<T> SeSqueeze(const Tensor<T>&);                              \
  template Tensor<T> SeMask(const Tensor<T>&, const SeBlock<T>&);              \
  template Tensor<T> SeApply(const Tensor<T>&, const SeBlock<T>&);             \
  template DtcfProfiles<T> DtcfPool(const Tensor<T>&);                         \
  template Tensor<T> DtcfEncode(const Tensor<T>&, const Tensor<T>&,            \
                                const DtcfBlock<T>&);                          \
  template DtcfMaskPair<T> DtcfMasks(const Tensor<T>&, const DtcfBlock<T>&,    \
                                     int64_t);                                 \
  template Tensor<T> Recalibrate(const Tensor<T>&, const Tensor<T>&,           \
                                 const Tensor<T>&);                            \
  template Tensor<T> DtcfApply(const Tensor<T>&, const DtcfBlock<T>&);         \
  template int64_t ParamCount(const SeBlock<T>&);                              \
  template int64_t ParamCount(const DtcfBlock<T>&);

DTCF_INSTANTIATE_ATTENTION(float)
DTCF_INSTANTIATE_ATTENTION(double)

#undef DTCF_INSTANTIATE_ATTENTION

}  // namespace dtcf::attention
