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

#include "dtcf/train/trainer.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include "dtcf/audio/augment.h"
#include "dtcf/audio/wav.h"
#include "dtcf/autodiff/ops.h"
#include "dtcf/base/error.h"
#include "dtcf/base/key_values.h"

namespace dtcf::train {

namespace {

enum StreamTag : uint64_t { kShuffleStream = 1, kCropStream = 2, kInitStream = 3 };

std::mt19937_64 StreamRng(uint64_t seed, uint64_t index, StreamTag tag) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(index), static_cast<uint32_t>(index >> 32),
                    static_cast<uint32_t>(tag)};
  return std::mt19937_64(seq);
}

std::vector<int64_t> EpochOrder(int64_t n, uint64_t seed, int64_t epoch) {
  std::vector<int64_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto rng = StreamRng(seed, static_cast<uint64_t>(epoch), kShuffleStream);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

}  // namespace

LabeledFeatures LoadLabeledFeatures(const std::vector<data::ManifestEntry>& rows,
                                    const audio::FbankConfig& fbank_config) {
  if (rows.empty()) throw DataError("training manifest is empty");
  const auto index = data::SpeakerIndex(rows);
  std::map<std::string, int> counts;
  for (const auto& r : rows) ++counts[r.speaker_id];
  for (const auto& [speaker, n] : counts) {
    if (n < 2) throw DataError("speaker '" + speaker + "' has fewer than 2 utterances");
  }
  LabeledFeatures out;
  out.speakers.resize(index.size());
  for (const auto& [speaker, label] : index) out.speakers[label] = speaker;
  audio::Fbank fbank(fbank_config);
  for (const auto& r : rows) {
    out.utt_ids.push_back(r.utt_id);
    out.labels.push_back(index.at(r.speaker_id));
    out.feats.push_back(fbank.Compute(audio::ReadWav(r.path)));
  }
  return out;
}

ad::Tensor<float> CropFrames(const ad::Tensor<float>& feats, int64_t start, int64_t length) {
  if (feats.rank() != 2 || feats.dim(0) < 1) throw DimensionError("CropFrames expects [L, F]");
  const int64_t frames = feats.dim(0), bins = feats.dim(1);
  if (start < 0 || start >= frames || length < 1) {
    throw DimensionError("crop start " + std::to_string(start) + " outside " +
                         std::to_string(frames) + " frames");
  }
  std::vector<float> out(length * bins);
  auto src = feats.data();
  for (int64_t t = 0; t < length; ++t) {
    const int64_t row = (start + t) % frames;
    std::copy_n(src.begin() + row * bins, bins, out.begin() + t * bins);
  }
  return ad::Tensor<float>::FromData({length, bins}, std::move(out));
}

Batch MakeBatch(const LabeledFeatures& data, const TrainConfig& config, int64_t step) {
  const int64_t n = data.size(), b = config.batch_size, crop = config.crop_frames;
  if (n == 0) throw DataError("no training utterances");
  Batch batch;
  int64_t cached_epoch = -1;
  std::vector<int64_t> order;
  for (int64_t i = 0; i < b; ++i) {
    const int64_t pos = step * b + i;
    const int64_t epoch = pos / n;
    if (epoch != cached_epoch) {
      order = EpochOrder(n, config.seed, epoch);
      cached_epoch = epoch;
    }
    batch.items.push_back(order[pos % n]);
  }
  auto rng = StreamRng(config.seed, static_cast<uint64_t>(step), kCropStream);
  const int64_t bins = data.feats[0].dim(1);
  std::vector<float> flat;
  flat.reserve(b * crop * bins);
  for (int64_t item : batch.items) {
    const auto& feats = data.feats[item];
    const int64_t frames = feats.dim(0);
    const int64_t start =
        frames > crop ? std::uniform_int_distribution<int64_t>(0, frames - crop)(rng) : 0;
    auto cropped = audio::SpecAugment(CropFrames(feats, start, crop), config.augment, rng);
    auto values = cropped.data();
    flat.insert(flat.end(), values.begin(), values.end());
    batch.labels.push_back(data.labels[item]);
  }
  batch.feats = ad::Tensor<float>::FromData({b, crop, bins}, std::move(flat));
  return batch;
}

std::string FormatLogRow(const LogRow& row) {
  return std::to_string(row.step) + "," + FormatDouble(row.lr) + "," + FormatDouble(row.loss) +
         "," + FormatDouble(row.acc);
}

Trainer::Trainer(const TrainConfig& config, LabeledFeatures data)
    : config_(config), data_(std::move(data)), net_(config.model, config.seed) {
  config_.Validate();
  if (data_.size() == 0) throw DataError("no training utterances");
  for (const auto& f : data_.feats) {
    if (f.dim(1) != config_.model.feat_dim) {
      throw DimensionError("features have " + std::to_string(f.dim(1)) +
                           " bins, model expects " + std::to_string(config_.model.feat_dim));
    }
  }
  auto rng = StreamRng(config_.seed, 0, kInitStream);
  head_ = loss::AamHead<float>(data_.num_classes(), config_.model.embed_dim, config_.aam_scale,
                               config_.aam_margin, rng);
  optimizer_ = Adam<float>(AllParameters());
}

nn::NamedTensors<float> Trainer::AllParameters() const {
  auto params = net_.Parameters();
  head_.CollectParameters("head.", &params);
  return params;
}

LogRow Trainer::Step() {
  const Batch batch = MakeBatch(data_, config_, step_);
  net_.set_training(true);
  head_.set_margin(config_.MarginAt(step_));
  optimizer_.ZeroGrad();
  LogRow row;
  row.step = step_;
  row.lr = config_.schedule.LrAt(step_);
  ad::Tensor<float> loss;
  try {
    const auto emb = net_.Embed(batch.feats);
    const auto logits = loss::AamLogits(emb, batch.labels, head_);
    row.acc = loss::Accuracy(logits, batch.labels);
    loss = loss::CrossEntropy(logits, batch.labels);
  } catch (const NumericError& e) {
    throw DivergenceError("step " + std::to_string(step_) + ": " + e.what());
  }
  row.loss = loss.item();
  if (!std::isfinite(row.loss) || row.loss > kDivergenceLoss) {
    throw DivergenceError("step " + std::to_string(step_) + ": loss " +
                          FormatDouble(row.loss) + " diverged");
  }
  try {
    ad::Backward(loss);
    optimizer_.Step(row.lr, config_.weight_decay);
  } catch (const NumericError& e) {
    throw DivergenceError("step " + std::to_string(step_) + ": " + e.what());
  }
  ++step_;
  return row;
}

model::Checkpoint Trainer::Snapshot() const {
  model::Checkpoint ckpt;
  ckpt.config() = config_.ToKeyValues();
  ckpt.config()["num_classes"] = std::to_string(data_.num_classes());
  ckpt.config()["train_step"] = std::to_string(step_);
  ckpt.PutAll(net_.Parameters());
  ckpt.PutAll(net_.Buffers());
  nn::NamedTensors<float> head;
  head_.CollectParameters("head.", &head);
  ckpt.PutAll(head);
  optimizer_.Save("adam.", &ckpt);
  return ckpt;
}

void Trainer::Restore(const model::Checkpoint& ckpt) {
  const auto model_config = model::BackboneConfig::FromKeyValues(ckpt.config());
  if (!(model_config == config_.model)) {
    throw DataError("checkpoint model configuration differs from the training configuration");
  }
  ckpt.GetAll(net_.Parameters());
  ckpt.GetAll(net_.Buffers());
  nn::NamedTensors<float> head;
  head_.CollectParameters("head.", &head);
  ckpt.GetAll(head);
  optimizer_.Load("adam.", ckpt);
  const auto it = ckpt.config().find("train_step");
  if (it == ckpt.config().end()) throw DataError("checkpoint lacks 'train_step'");
  step_ = ParseInt("train_step", it->second);
}

double Trainer::TrainAccuracy() {
  const bool was_training = net_.training();
  net_.set_training(false);
  ad::NoGradGuard guard;
  int64_t correct = 0;
  for (int64_t i = 0; i < data_.size(); ++i) {
    const auto cos = loss::CosineMatrix(net_.Embed(data_.feats[i]), head_.weight());
    const auto values = cos.data();
    const auto best = std::max_element(values.begin(), values.end()) - values.begin();
    correct += best == data_.labels[i];
  }
  net_.set_training(was_training);
  return static_cast<double>(correct) / static_cast<double>(data_.size());
}

TrainReport RunTraining(Trainer* trainer, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());
  const fs::path log_path = fs::path(out_dir) / "train_log.csv";
  const bool fresh = trainer->step() == 0 || !fs::exists(log_path);
  std::ofstream log(log_path, fresh ? std::ios::trunc : std::ios::app);
  if (!log) throw IoError("cannot write " + log_path.string());
  if (fresh) log << kLogHeader << "\n";
  const auto& config = trainer->config();
  TrainReport report;
  while (trainer->step() < config.max_steps) {
    LogRow row;
    try {
      row = trainer->Step();
    } catch (const DivergenceError&) {
      log.flush();
      throw;
    }
    log << FormatLogRow(row) << "\n";
    report.last = row;
    if (config.checkpoint_every > 0 && trainer->step() % config.checkpoint_every == 0) {
      trainer->Snapshot().Write(
          (fs::path(out_dir) / ("ckpt_" + std::to_string(trainer->step()) + ".ckpt")).string());
    }
  }
  log.flush();
  if (!log) throw IoError("failed writing " + log_path.string());
  trainer->Snapshot().Write((fs::path(out_dir) / "final.ckpt").string());
  report.steps = trainer->step();
  report.train_accuracy = trainer->TrainAccuracy();
  report.parameter_count = trainer->model().ParameterCount();
  return report;
}

}  // namespace dtcf::train
