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

// Embedding store, CSV exchange and trial scoring.
//
//   embedding CSV: header `utt_id,speaker_id,e0,...,e{D-1}`, rows sorted by
//                  utt_id, values in shortest round-trip decimal form.
//   score CSV:     header `enroll,test,label,score`.

#ifndef DTCF_EVAL_EMBEDDINGS_H_
#define DTCF_EVAL_EMBEDDINGS_H_

#include <map>
#include <string>
#include <vector>

#include "dtcf/audio/fbank.h"
#include "dtcf/data/manifest.h"
#include "dtcf/eval/metrics.h"
#include "dtcf/model/backbone.h"
#include "dtcf/model/checkpoint.h"

namespace dtcf::eval {

struct StoredEmbedding {
  std::string speaker_id;
  std::vector<double> values;
};

// Keyed and therefore ordered by utterance id.
using EmbeddingStore = std::map<std::string, StoredEmbedding>;

void WriteEmbeddings(const std::string& path, const EmbeddingStore& store);
// Throws IoError on malformed rows, DataError on duplicate ids or ragged
// dimensions.
EmbeddingStore ReadEmbeddings(const std::string& path);

// One cosine score per trial, in trial order. Throws DataError naming the
// first id missing from the store.
ScoreSet ScoreTrials(const EmbeddingStore& store, const std::vector<data::Trial>& trials);

void WriteScores(const std::string& path, const std::vector<data::Trial>& trials,
                 const ScoreSet& scores);

// Builds the network described by the checkpoint configuration and loads its
// parameters and batch-norm statistics. The result is in eval mode.
model::SpeakerNet<float> LoadSpeakerNet(const model::Checkpoint& ckpt);

// Eval-mode embedding of every manifest row over its full length.
EmbeddingStore ExtractEmbeddings(model::SpeakerNet<float>* net,
                                 const std::vector<data::ManifestEntry>& rows,
                                 const audio::FbankConfig& fbank = {});

}  // namespace dtcf::eval

#endif  // DTCF_EVAL_EMBEDDINGS_H_
