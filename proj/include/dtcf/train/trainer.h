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

// Speaker classification training with the AAM loss.
//
// Batches are a pure function of (seed, step): step k takes positions
// [k B, (k + 1) B) of an endless stream of per-epoch shuffles, so a restored
// trainer continues exactly where the original would have.

#ifndef DTCF_TRAIN_TRAINER_H_
#define DTCF_TRAIN_TRAINER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dtcf/audio/fbank.h"
#include "dtcf/autodiff/tensor.h"
#include "dtcf/data/manifest.h"
#include "dtcf/loss/aam.h"
#include "dtcf/model/backbone.h"
#include "dtcf/model/checkpoint.h"
#include "dtcf/train/adam.h"
#include "dtcf/train/config.h"

namespace dtcf::train {

inline constexpr double kDivergenceLoss = 1e4;
inline constexpr char kLogHeader[] = "step,lr,loss,acc";

struct LabeledFeatures {
  std::vector<std::string> utt_ids;
  std::vector<int64_t> labels;
  std::vector<std::string> speakers;  // label -> speaker id
  std::vector<ad::Tensor<float>> feats;  // [L, F] each

  int64_t num_classes() const { return static_cast<int64_t>(speakers.size()); }
  int64_t size() const { return static_cast<int64_t>(feats.size()); }
};

// Reads every waveform and computes its features. Throws DataError when a
// speaker has fewer than two utterances.
LabeledFeatures LoadLabeledFeatures(const std::vector<data::ManifestEntry>& rows,
                                    const audio::FbankConfig& fbank = {});

// `length` frames from `start`, wrapping around to the first frame.
ad::Tensor<float> CropFrames(const ad::Tensor<float>& feats, int64_t start, int64_t length);

struct Batch {
  std::vector<int64_t> items;  // indices into the data set
  std::vector<int64_t> labels;
  ad::Tensor<float> feats;  // [B, crop, F]
};

// Deterministic given (config.seed, step).
Batch MakeBatch(const LabeledFeatures& data, const TrainConfig& config, int64_t step);

struct LogRow {
  int64_t step = 0;
  double lr = 0.0;
  double loss = 0.0;
  double acc = 0.0;
};

std::string FormatLogRow(const LogRow& row);

class Trainer {
 public:
  Trainer(const TrainConfig& config, LabeledFeatures data);

  // One optimizer step. Throws DivergenceError when the loss is non-finite
  // or above kDivergenceLoss.
  LogRow Step();
  int64_t step() const { return step_; }

  // Parameters, BN statistics, AAM weights, optimizer moments, the training
  // configuration and the step count.
  model::Checkpoint Snapshot() const;
  void Restore(const model::Checkpoint& ckpt);

  // Eval-mode argmax accuracy of margin-free cosine logits over full-length
  // training utterances.
  double TrainAccuracy();

  const TrainConfig& config() const { return config_; }
  const LabeledFeatures& data() const { return data_; }
  model::SpeakerNet<float>& model() { return net_; }
  loss::AamHead<float>& head() { return head_; }

 private:
  nn::NamedTensors<float> AllParameters() const;

  TrainConfig config_;
  LabeledFeatures data_;
  model::SpeakerNet<float> net_;
  loss::AamHead<float> head_;
  Adam<float> optimizer_;
  int64_t step_ = 0;
};

struct TrainReport {
  int64_t steps = 0;
  LogRow last;
  double train_accuracy = 0.0;
  int64_t parameter_count = 0;
};

// Steps until config.max_steps, appending rows to <out_dir>/train_log.csv
// (created with a header when training starts from step 0), writing
// <out_dir>/ckpt_<step>.ckpt every checkpoint_every steps and
// <out_dir>/final.ckpt at the end.
TrainReport RunTraining(Trainer* trainer, const std::string& out_dir);

}  // namespace dtcf::train

#endif  // DTCF_TRAIN_TRAINER_H_
