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

#include "dtcf/audio/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "dtcf/base/error.h"

namespace dtcf::audio {

namespace {

template <typename V>
void Put(std::vector<char>* buf, V v) {
  const char* p = reinterpret_cast<const char*>(&v);
  buf->insert(buf->end(), p, p + sizeof(V));
}

template <typename V>
V Get(const std::vector<char>& buf, size_t pos) {
  V v;
  std::memcpy(&v, buf.data() + pos, sizeof(V));
  return v;
}

}  // namespace

void WriteWav(const std::string& path, const Waveform& wav) {
  const uint32_t data_bytes = static_cast<uint32_t>(wav.samples.size() * 2);
  std::vector<char> buf;
  buf.reserve(44 + data_bytes);
  buf.insert(buf.end(), {'R', 'I', 'F', 'F'});
  Put<uint32_t>(&buf, 36 + data_bytes);
  buf.insert(buf.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  Put<uint32_t>(&buf, 16);
  Put<uint16_t>(&buf, 1);  // PCM
  Put<uint16_t>(&buf, 1);  // mono
  Put<uint32_t>(&buf, static_cast<uint32_t>(wav.sample_rate));
  Put<uint32_t>(&buf, static_cast<uint32_t>(wav.sample_rate * 2));
  Put<uint16_t>(&buf, 2);
  Put<uint16_t>(&buf, 16);
  buf.insert(buf.end(), {'d', 'a', 't', 'a'});
  Put<uint32_t>(&buf, data_bytes);
  for (float s : wav.samples) {
    const double clipped = std::clamp(static_cast<double>(s), -1.0, 1.0);
    Put<int16_t>(&buf, static_cast<int16_t>(std::lround(clipped * 32767.0)));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing " + path);
}

Waveform ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0) {
    throw IoError(path + " is not a RIFF/WAVE file");
  }
  Waveform wav;
  bool have_fmt = false;
  size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const std::string id(buf.data() + pos, 4);
    const uint32_t size = Get<uint32_t>(buf, pos + 4);
    const size_t body = pos + 8;
    if (body + size > buf.size()) throw IoError(path + ": truncated '" + id + "' chunk");
    if (id == "fmt ") {
      if (size < 16) throw IoError(path + ": short fmt chunk");
      const auto format = Get<uint16_t>(buf, body);
      const auto channels = Get<uint16_t>(buf, body + 2);
      const auto bits = Get<uint16_t>(buf, body + 14);
      if (format != 1 || channels != 1 || bits != 16) {
        throw IoError(path + ": only 16-bit PCM mono is supported");
      }
      wav.sample_rate = static_cast<int>(Get<uint32_t>(buf, body + 4));
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw IoError(path + ": data chunk before fmt chunk");
      wav.samples.resize(size / 2);
      for (size_t i = 0; i < wav.samples.size(); ++i) {
        wav.samples[i] = static_cast<float>(Get<int16_t>(buf, body + 2 * i) / 32767.0);
      }
      return wav;
    }
    pos = body + size + (size & 1);
  }
  throw IoError(path + ": no data chunk");
}

}  // namespace dtcf::audio
