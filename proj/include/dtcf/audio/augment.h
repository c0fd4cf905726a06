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

// Time and frequency band masking of log-mel features.

#ifndef DTCF_AUDIO_AUGMENT_H_
#define DTCF_AUDIO_AUGMENT_H_

#include <random>

#include "dtcf/autodiff/tensor.h"

namespace dtcf::audio {

struct AugmentConfig {
  int time_masks = 1;
  int max_time_width = 10;  // frames
  int freq_masks = 1;
  int max_freq_width = 8;  // bins

  void Validate() const;
};

// feats [L, F]. Each mask draws a width uniformly in [0, max] and a start
// uniformly among valid positions, then fills the band with the mean of the
// unmasked input. Throws ConfigError when a maximum width is not below the
// corresponding dimension.
ad::Tensor<float> SpecAugment(const ad::Tensor<float>& feats, const AugmentConfig& config,
                              std::mt19937_64& rng);

}  // namespace dtcf::audio

#endif  // DTCF_AUDIO_AUGMENT_H_
