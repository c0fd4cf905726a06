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

#ifndef DTCF_AUDIO_WAV_H_
#define DTCF_AUDIO_WAV_H_

#include <string>
#include <vector>

namespace dtcf::audio {

struct Waveform {
  std::vector<float> samples;  // mono, nominally in [-1, 1]
  int sample_rate = 16000;

  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// 16-bit PCM mono RIFF/WAVE. Samples are clipped to [-1, 1] and scaled by
// 32767 with rounding.
void WriteWav(const std::string& path, const Waveform& wav);
Waveform ReadWav(const std::string& path);

}  // namespace dtcf::audio

#endif  // DTCF_AUDIO_WAV_H_
