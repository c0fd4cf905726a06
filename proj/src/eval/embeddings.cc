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

#include "dtcf/eval/embeddings.h"

#include <fstream>
#include <sstream>

#include "dtcf/audio/wav.h"
#include "dtcf/autodiff/tensor.h"
#include "dtcf/base/error.h"
#include "dtcf/base/key_values.h"

namespace dtcf::eval {

namespace {

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

void WriteEmbeddings(const std::string& path, const EmbeddingStore& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  const size_t dim = store.empty() ? 0 : store.begin()->second.values.size();
  out << "utt_id,speaker_id";
  for (size_t d = 0; d < dim; ++d) out << ",e" << d;
  out << "\n";
  for (const auto& [utt, emb] : store) {
    if (emb.values.size() != dim) throw DataError("embedding '" + utt + "' has a different dimension");
    out << utt << "," << emb.speaker_id;
    for (double v : emb.values) out << "," << FormatDouble(v);
    out << "\n";
  }
  out.flush();
  if (!out) throw IoError("failed writing " + path);
}

EmbeddingStore ReadEmbeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("utt_id,speaker_id", 0) != 0) {
    throw IoError(path + ": missing header utt_id,speaker_id,...");
  }
  const size_t dim = SplitCsv(line).size() - 2;
  EmbeddingStore store;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = SplitCsv(line);
    if (fields.size() != dim + 2 || fields[0].empty()) {
      throw IoError(path + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(dim + 2) + " fields");
    }
    StoredEmbedding emb;
    emb.speaker_id = fields[1];
    emb.values.reserve(dim);
    for (size_t d = 0; d < dim; ++d) {
      try {
        emb.values.push_back(ParseDouble("e" + std::to_string(d), fields[d + 2]));
      } catch (const ConfigError& e) {
        throw IoError(path + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    if (!store.emplace(fields[0], std::move(emb)).second) {
      throw DataError(path + ": duplicate utterance id '" + fields[0] + "'");
    }
  }
  return store;
}

ScoreSet ScoreTrials(const EmbeddingStore& store, const std::vector<data::Trial>& trials) {
  ScoreSet set;
  auto find = [&store](const std::string& id) -> const std::vector<double>& {
    const auto it = store.find(id);
    if (it == store.end()) throw DataError("trial utterance '" + id + "' has no embedding");
    return it->second.values;
  };
  for (const auto& t : trials) set.Add(CosineScore(find(t.enroll), find(t.test)), t.target);
  return set;
}

void WriteScores(const std::string& path, const std::vector<data::Trial>& trials,
                 const ScoreSet& scores) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "enroll,test,label,score\n";
  for (size_t i = 0; i < trials.size(); ++i) {
    out << trials[i].enroll << "," << trials[i].test << ","
        << (trials[i].target ? "target" : "nontarget") << "," << FormatDouble(scores.scores[i])
        << "\n";
  }
  out.flush();
  if (!out) throw IoError("failed writing " + path);
}

model::SpeakerNet<float> LoadSpeakerNet(const model::Checkpoint& ckpt) {
  model::SpeakerNet<float> net(model::BackboneConfig::FromKeyValues(ckpt.config()), 0);
  ckpt.GetAll(net.Parameters());
  ckpt.GetAll(net.Buffers());
  net.set_training(false);
  return net;
}

EmbeddingStore ExtractEmbeddings(model::SpeakerNet<float>* net,
                                 const std::vector<data::ManifestEntry>& rows,
                                 const audio::FbankConfig& fbank_config) {
  audio::Fbank fbank(fbank_config);
  const bool was_training = net->training();
  net->set_training(false);
  ad::NoGradGuard guard;
  EmbeddingStore store;
  for (const auto& r : rows) {
    const auto emb = net->Embed(fbank.Compute(audio::ReadWav(r.path)));
    StoredEmbedding stored{r.speaker_id, {}};
    for (float v : emb.data()) stored.values.push_back(v);
    if (!store.emplace(r.utt_id, std::move(stored)).second) {
      throw DataError("duplicate utterance id '" + r.utt_id + "'");
    }
  }
  net->set_training(was_training);
  return store;
}

}  // namespace dtcf::eval
