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

// Corpus file formats.
//
//   manifest CSV: header `utt_id,speaker_id,path`, one utterance per row;
//                 relative paths resolve against the manifest's directory.
//   trial list:   `enroll_utt test_utt label`, label in {target, nontarget}.

#ifndef DTCF_DATA_MANIFEST_H_
#define DTCF_DATA_MANIFEST_H_

#include <map>
#include <string>
#include <vector>

namespace dtcf::data {

struct ManifestEntry {
  std::string utt_id;
  std::string speaker_id;
  std::string path;
};

struct Trial {
  std::string enroll;
  std::string test;
  bool target = false;
};

void WriteManifest(const std::string& path, const std::vector<ManifestEntry>& rows);
// Paths in the result are resolved to be usable from the working directory.
std::vector<ManifestEntry> ReadManifest(const std::string& path);

void WriteTrials(const std::string& path, const std::vector<Trial>& trials);
std::vector<Trial> ReadTrials(const std::string& path);

// Sorted distinct speaker ids mapped to 0..K-1.
std::map<std::string, int64_t> SpeakerIndex(const std::vector<ManifestEntry>& rows);

}  // namespace dtcf::data

#endif  // DTCF_DATA_MANIFEST_H_
