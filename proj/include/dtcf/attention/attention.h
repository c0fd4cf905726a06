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

// Channel attention over C x T x F feature maps.
//
// Squeeze-and-excitation (SE) gates every channel with one factor computed
// from the global time-frequency average. The duality temporal-channel-
// frequency (DTCF) block keeps the two marginal profiles instead: the
// per-frame frequency mean (C x T) and the per-bin time mean (C x F) are
// concatenated, passed through a shared 1x1 channel reduction, split again,
// and expanded by two separate 1x1 convolutions into a time-channel mask and
// a frequency-channel mask. The feature map is rescaled by both masks.
//
// Every function accepts a single map [C, T, F] or a batch [N, C, T, F];
// derived tensors carry the same optional leading batch axis.

#ifndef DTCF_ATTENTION_ATTENTION_H_
#define DTCF_ATTENTION_ATTENTION_H_

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "dtcf/autodiff/tensor.h"
#include "dtcf/nn/parameter.h"

namespace dtcf::attention {

enum class AttentionKind { kNone, kSe, kDtcf };

AttentionKind ParseAttentionKind(std::string_view name);
std::string AttentionKindName(AttentionKind kind);

// C' = C / r, clamped to 1 when C < r. Throws ConfigError when C >= r and C
// is not a multiple of r.
int64_t ReducedChannels(int64_t channels, int64_t reduction);

template <typename T>
class SeBlock {
 public:
  SeBlock() = default;
  SeBlock(int64_t channels, int64_t reduction, bool bias, std::mt19937_64& rng);

  void CollectParameters(const std::string& prefix,
                         nn::NamedTensors<T>* out) const;

  int64_t channels() const { return w1_.dim(1); }
  int64_t reduced_channels() const { return w1_.dim(0); }
  int64_t reduction() const { return reduction_; }
  bool has_bias() const { return b1_.defined(); }

  ad::Tensor<T>& w1() { return w1_; }  // [C', C]
  ad::Tensor<T>& w2() { return w2_; }  // [C, C']
  ad::Tensor<T>& b1() { return b1_; }
  ad::Tensor<T>& b2() { return b2_; }
  const ad::Tensor<T>& w1() const { return w1_; }
  const ad::Tensor<T>& w2() const { return w2_; }
  const ad::Tensor<T>& b1() const { return b1_; }
  const ad::Tensor<T>& b2() const { return b2_; }

 private:
  ad::Tensor<T> w1_, w2_, b1_, b2_;
  int64_t reduction_ = 8;
};

template <typename T>
class DtcfBlock {
 public:
  DtcfBlock() = default;
  DtcfBlock(int64_t channels, int64_t reduction, bool bias,
            std::mt19937_64& rng);

  void CollectParameters(const std::string& prefix,
                         nn::NamedTensors<T>* out) const;

  int64_t channels() const { return w1_.dim(1); }
  int64_t reduced_channels() const { return w1_.dim(0); }
  int64_t reduction() const { return reduction_; }
  bool has_bias() const { return b1_.defined(); }

  ad::Tensor<T>& w1() { return w1_; }  // [C', C] shared encoder
  ad::Tensor<T>& w2() { return w2_; }  // [C, C'] time branch
  ad::Tensor<T>& w3() { return w3_; }  // [C, C'] frequency branch
  ad::Tensor<T>& b1() { return b1_; }
  ad::Tensor<T>& b2() { return b2_; }
  ad::Tensor<T>& b3() { return b3_; }
  const ad::Tensor<T>& w1() const { return w1_; }
  const ad::Tensor<T>& w2() const { return w2_; }
  const ad::Tensor<T>& w3() const { return w3_; }
  const ad::Tensor<T>& b1() const { return b1_; }
  const ad::Tensor<T>& b2() const { return b2_; }
  const ad::Tensor<T>& b3() const { return b3_; }

 private:
  ad::Tensor<T> w1_, w2_, w3_, b1_, b2_, b3_;
  int64_t reduction_ = 8;
};

// Global average over time and frequency: [.., C, T, F] -> [.., C].
template <typename T>
ad::Tensor<T> SeSqueeze(const ad::Tensor<T>& x);

// sigmoid(W2 relu(W1 xc)): [.., C] -> [.., C].
template <typename T>
ad::Tensor<T> SeMask(const ad::Tensor<T>& xc, const SeBlock<T>& block);

// x scaled per channel by its SE mask; same shape as x.
template <typename T>
ad::Tensor<T> SeApply(const ad::Tensor<T>& x, const SeBlock<T>& block);

template <typename T>
struct DtcfProfiles {
  ad::Tensor<T> freq;  // [.., C, F], mean over time
  ad::Tensor<T> time;  // [.., C, T], mean over frequency
};

template <typename T>
DtcfProfiles<T> DtcfPool(const ad::Tensor<T>& x);

// relu(W1 [freq, time]) with W1 applied as a 1x1 convolution over channels.
// Columns are ordered frequency bins first, then frames:
// [.., C, F], [.., C, T] -> [.., C', F + T].
template <typename T>
ad::Tensor<T> DtcfEncode(const ad::Tensor<T>& freq, const ad::Tensor<T>& time,
                         const DtcfBlock<T>& block);

template <typename T>
struct DtcfMaskPair {
  ad::Tensor<T> time;  // [.., C, T], sigmoid(W2 x_time)
  ad::Tensor<T> freq;  // [.., C, F], sigmoid(W3 x_freq)
};

// Splits the encoding after `freq_bins` columns and expands both parts.
template <typename T>
DtcfMaskPair<T> DtcfMasks(const ad::Tensor<T>& encoded, const DtcfBlock<T>& block,
                          int64_t freq_bins);

// out[c, t, f] = x[c, t, f] * time_mask[c, t] * freq_mask[c, f], evaluated
// left to right in one fused pass.
template <typename T>
ad::Tensor<T> Recalibrate(const ad::Tensor<T>& x, const ad::Tensor<T>& time_mask,
                          const ad::Tensor<T>& freq_mask);

template <typename T>
ad::Tensor<T> DtcfApply(const ad::Tensor<T>& x, const DtcfBlock<T>& block);

// SE: 2 C C' (+ C' + C with bias). DTCF: 3 C C' (+ C' + 2 C with bias).
template <typename T>
int64_t ParamCount(const SeBlock<T>& block);
template <typename T>
int64_t ParamCount(const DtcfBlock<T>& block);

// Parameter count of one block of the given kind; 0 for kNone.
int64_t AttentionParamCount(AttentionKind kind, int64_t channels,
                            int64_t reduction, bool bias);

}  // namespace dtcf::attention

#endif  // DTCF_ATTENTION_ATTENTION_H_
