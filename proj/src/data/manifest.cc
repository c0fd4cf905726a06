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

#include "dtcf/data/manifest.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dtcf/base/error.h"

namespace dtcf::data {

namespace {

std::ofstream OpenOut(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

std::ifstream OpenIn(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

void StripCr(std::string* line) {
  if (!line->empty() && line->back() == '\r') line->pop_back();
}

}  // namespace

void WriteManifest(const std::string& path, const std::vector<ManifestEntry>& rows) {
  auto out = OpenOut(path);
  out << "utt_id,speaker_id,path\n";
  for (const auto& r : rows) out << r.utt_id << ',' << r.speaker_id << ',' << r.path << '\n';
  if (!out) throw IoError("failed writing " + path);
}

std::vector<ManifestEntry> ReadManifest(const std::string& path) {
  auto in = OpenIn(path);
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  std::vector<ManifestEntry> rows;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    StripCr(&line);
    if (line.empty()) continue;
    if (line_no == 1 && line == "utt_id,speaker_id,path") continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos) {
      throw IoError(path + ":" + std::to_string(line_no) + ": expected utt_id,speaker_id,path");
    }
    ManifestEntry e{line.substr(0, c1), line.substr(c1 + 1, c2 - c1 - 1), line.substr(c2 + 1)};
    if (e.utt_id.empty() || e.speaker_id.empty() || e.path.empty()) {
      throw IoError(path + ":" + std::to_string(line_no) + ": empty field");
    }
    if (!seen.insert(e.utt_id).second) {
      throw DataError(path + ": duplicate utterance id '" + e.utt_id + "'");
    }
    if (std::filesystem::path(e.path).is_relative()) e.path = (base / e.path).string();
    rows.push_back(std::move(e));
  }
  return rows;
}

void WriteTrials(const std::string& path, const std::vector<Trial>& trials) {
  auto out = OpenOut(path);
  for (const auto& t : trials) {
    out << t.enroll << ' ' << t.test << ' ' << (t.target ? "target" : "nontarget") << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

std::vector<Trial> ReadTrials(const std::string& path) {
  auto in = OpenIn(path);
  std::vector<Trial> trials;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    StripCr(&line);
    if (line.empty()) continue;
    std::istringstream fields(line);
    Trial t;
    std::string label, extra;
    if (!(fields >> t.enroll >> t.test >> label) || (fields >> extra)) {
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": expected 'enroll test target|nontarget'");
    }
    if (label == "target") {
      t.target = true;
    } else if (label != "nontarget") {
      throw IoError(path + ":" + std::to_string(line_no) + ": unknown label '" + label + "'");
    }
    trials.push_back(std::move(t));
  }
  return trials;
}

std::map<std::string, int64_t> SpeakerIndex(const std::vector<ManifestEntry>& rows) {
  std::set<std::string> ids;
  for (const auto& r : rows) ids.insert(r.speaker_id);
  std::map<std::string, int64_t> index;
  for (const auto& id : ids) index.emplace(id, static_cast<int64_t>(index.size()));
  return index;
}

}  // namespace dtcf::data
