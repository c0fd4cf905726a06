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

// Training configuration: every model and training knob as a flat key.

#ifndef DTCF_TRAIN_CONFIG_H_
#define DTCF_TRAIN_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dtcf/audio/augment.h"
#include "dtcf/base/key_values.h"
#include "dtcf/model/backbone.h"
#include "dtcf/train/schedule.h"

namespace dtcf::train {

struct TrainConfig {
  model::BackboneConfig model;
  std::string train_manifest;
  int64_t batch_size = 32;
  int64_t max_steps = 2000;
  int64_t crop_frames = 200;
  double weight_decay = 2e-5;
  uint64_t seed = 0;
  Triangular2Schedule schedule;
  double aam_scale = 30.0;
  double aam_margin = 0.2;
  // The margin ramps linearly from 0 to aam_margin over these steps.
  int64_t margin_warmup_steps = 200;
  audio::AugmentConfig augment;
  // 0 writes only the final checkpoint.
  int64_t checkpoint_every = 0;

  void Validate() const;
  KeyValues ToKeyValues() const;
  // Throws ConfigError naming the first unknown key or bad value.
  static TrainConfig FromKeyValues(const KeyValues& kv);
  static const std::vector<std::string>& Keys();

  double MarginAt(int64_t step) const;
};

}  // namespace dtcf::train

#endif  // DTCF_TRAIN_CONFIG_H_
