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

#include "dtcf/train/config.h"

#include <algorithm>

#include "dtcf/base/error.h"

namespace dtcf::train {

namespace {

const std::vector<std::string>& TrainKeys() {
  static const std::vector<std::string> keys = {
      "train_manifest", "batch_size",     "max_steps",      "crop_frames",
      "weight_decay",   "seed",           "base_lr",        "max_lr",
      "step_size",      "aam_scale",      "aam_margin",     "margin_warmup_steps", "time_masks",
      "max_time_width", "freq_masks",     "max_freq_width", "checkpoint_every"};
  return keys;
}

}  // namespace

const std::vector<std::string>& TrainConfig::Keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> all = model::BackboneConfig::ModelKeys();
    for (const auto& k : TrainKeys()) all.push_back(k);
    return all;
  }();
  return keys;
}

void TrainConfig::Validate() const {
  model.Validate();
  schedule.Validate();
  augment.Validate();
  if (batch_size < 2) throw ConfigError("batch_size must be at least 2 for batch norm");
  if (max_steps < 0) throw ConfigError("max_steps must be >= 0");
  if (crop_frames < model::kMinFrames) {
    throw ConfigError("crop_frames must be at least " + std::to_string(model::kMinFrames));
  }
  if (augment.time_masks > 0 && augment.max_time_width >= crop_frames) {
    throw ConfigError("max_time_width must be below crop_frames");
  }
  if (augment.freq_masks > 0 && augment.max_freq_width >= model.feat_dim) {
    throw ConfigError("max_freq_width must be below feat_dim");
  }
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (!(aam_scale > 0.0)) throw ConfigError("aam_scale must be positive");
  if (!(aam_margin >= 0.0 && aam_margin < 1.5707963267948966)) {
    throw ConfigError("aam_margin must lie in [0, pi/2)");
  }
  if (margin_warmup_steps < 0) throw ConfigError("margin_warmup_steps must be >= 0");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
}

KeyValues TrainConfig::ToKeyValues() const {
  KeyValues kv;
  model.ToKeyValues(&kv);
  kv["train_manifest"] = train_manifest;
  kv["batch_size"] = std::to_string(batch_size);
  kv["max_steps"] = std::to_string(max_steps);
  kv["crop_frames"] = std::to_string(crop_frames);
  kv["weight_decay"] = FormatDouble(weight_decay);
  kv["seed"] = std::to_string(seed);
  kv["base_lr"] = FormatDouble(schedule.base_lr);
  kv["max_lr"] = FormatDouble(schedule.max_lr);
  kv["step_size"] = std::to_string(schedule.step_size);
  kv["aam_scale"] = FormatDouble(aam_scale);
  kv["aam_margin"] = FormatDouble(aam_margin);
  kv["margin_warmup_steps"] = std::to_string(margin_warmup_steps);
  kv["time_masks"] = std::to_string(augment.time_masks);
  kv["max_time_width"] = std::to_string(augment.max_time_width);
  kv["freq_masks"] = std::to_string(augment.freq_masks);
  kv["max_freq_width"] = std::to_string(augment.max_freq_width);
  kv["checkpoint_every"] = std::to_string(checkpoint_every);
  return kv;
}

double TrainConfig::MarginAt(int64_t step) const {
  if (margin_warmup_steps == 0 || step >= margin_warmup_steps) return aam_margin;
  return aam_margin * static_cast<double>(step) / static_cast<double>(margin_warmup_steps);
}

TrainConfig TrainConfig::FromKeyValues(const KeyValues& kv) {
  const auto& keys = Keys();
  for (const auto& [key, value] : kv) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  TrainConfig c;
  c.model = model::BackboneConfig::FromKeyValues(kv);
  auto get = [&kv](const std::string& key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  auto get_int = [&](const std::string& key, auto* dst) {
    if (auto* v = get(key)) *dst = static_cast<std::remove_reference_t<decltype(*dst)>>(ParseInt(key, *v));
  };
  auto get_double = [&](const std::string& key, double* dst) {
    if (auto* v = get(key)) *dst = ParseDouble(key, *v);
  };
  if (auto* v = get("train_manifest")) c.train_manifest = *v;
  get_int("batch_size", &c.batch_size);
  get_int("max_steps", &c.max_steps);
  get_int("crop_frames", &c.crop_frames);
  get_double("weight_decay", &c.weight_decay);
  if (auto* v = get("seed")) {
    const int64_t seed = ParseInt("seed", *v);
    if (seed < 0) throw ConfigError("config key 'seed' must be >= 0");
    c.seed = static_cast<uint64_t>(seed);
  }
  get_double("base_lr", &c.schedule.base_lr);
  get_double("max_lr", &c.schedule.max_lr);
  get_int("step_size", &c.schedule.step_size);
  get_double("aam_scale", &c.aam_scale);
  get_double("aam_margin", &c.aam_margin);
  get_int("margin_warmup_steps", &c.margin_warmup_steps);
  get_int("time_masks", &c.augment.time_masks);
  get_int("max_time_width", &c.augment.max_time_width);
  get_int("freq_masks", &c.augment.freq_masks);
  get_int("max_freq_width", &c.augment.max_freq_width);
  get_int("checkpoint_every", &c.checkpoint_every);
  c.Validate();
  return c;
}

}  // namespace dtcf::train
