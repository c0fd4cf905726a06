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

#include "dtcf/audio/augment.h"

#include <string>
#include <vector>

#include "dtcf/base/error.h"

namespace dtcf::audio {

namespace {

int64_t UniformInt(std::mt19937_64& rng, int64_t lo, int64_t hi) {
  return std::uniform_int_distribution<int64_t>(lo, hi)(rng);
}

}  // namespace

void AugmentConfig::Validate() const {
  if (time_masks < 0 || freq_masks < 0) throw ConfigError("mask counts must be >= 0");
  if (max_time_width < 0 || max_freq_width < 0) {
    throw ConfigError("mask widths must be >= 0");
  }
}

ad::Tensor<float> SpecAugment(const ad::Tensor<float>& feats, const AugmentConfig& config,
                              std::mt19937_64& rng) {
  config.Validate();
  if (feats.rank() != 2) throw DimensionError("SpecAugment expects [L, F] features");
  const int64_t frames = feats.dim(0), bins = feats.dim(1);
  if (config.time_masks > 0 && config.max_time_width >= frames) {
    throw ConfigError("max_time_width " + std::to_string(config.max_time_width) +
                      " must be below the frame count " + std::to_string(frames));
  }
  if (config.freq_masks > 0 && config.max_freq_width >= bins) {
    throw ConfigError("max_freq_width " + std::to_string(config.max_freq_width) +
                      " must be below the bin count " + std::to_string(bins));
  }
  std::vector<float> out = feats.ToVector();
  if (config.time_masks == 0 && config.freq_masks == 0) {
    return ad::Tensor<float>::FromData(feats.shape(), std::move(out));
  }
  double sum = 0.0;
  for (float v : out) sum += v;
  const float mean = static_cast<float>(sum / static_cast<double>(out.size()));
  for (int m = 0; m < config.time_masks; ++m) {
    const int64_t width = UniformInt(rng, 0, config.max_time_width);
    const int64_t start = UniformInt(rng, 0, frames - width);
    for (int64_t t = start; t < start + width; ++t) {
      for (int64_t f = 0; f < bins; ++f) out[t * bins + f] = mean;
    }
  }
  for (int m = 0; m < config.freq_masks; ++m) {
    const int64_t width = UniformInt(rng, 0, config.max_freq_width);
    const int64_t start = UniformInt(rng, 0, bins - width);
    for (int64_t t = 0; t < frames; ++t) {
      for (int64_t f = start; f < start + width; ++f) out[t * bins + f] = mean;
    }
  }
  return ad::Tensor<float>::FromData(feats.shape(), std::move(out));
}

}  // namespace dtcf::audio
