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

// Deterministic synthetic speakers.
//
// An utterance is a harmonic source with a slowly varying F0 contour,
// shaped by a spectral envelope made of three Gaussian resonances at the
// speaker's formants and a dB/octave tilt, plus low-level white noise. The
// result is peak-normalized to 0.9.

#ifndef DTCF_AUDIO_SYNTH_H_
#define DTCF_AUDIO_SYNTH_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dtcf/audio/wav.h"

namespace dtcf::audio {

struct SyntheticSpeakerSpec {
  std::string speaker_id;
  std::array<double, 3> formants = {500.0, 1500.0, 2500.0};  // Hz, increasing
  double f0_min = 100.0;
  double f0_max = 140.0;
  double tilt_db_per_octave = -6.0;
  uint64_t seed = 0;

  void Validate(int sample_rate) const;
};

// duration in [1, 10] seconds.
Waveform SynthUtterance(const SyntheticSpeakerSpec& spec, double duration,
                        uint64_t utt_seed, int sample_rate = 16000);

// n speakers drawn from `seed`, formant triples pairwise separated by at
// least `kFormantSeparation` in log-frequency on some formant.
std::vector<SyntheticSpeakerSpec> DrawSpeakers(int n, uint64_t seed);
inline constexpr double kFormantSeparation = 0.12;

struct CorpusOptions {
  int speakers = 10;
  int utts_per_speaker = 20;
  uint64_t seed = 0;
  double duration = 2.0;
  double heldout_fraction = 0.2;
  int sample_rate = 16000;
};

struct CorpusSummary {
  int speakers = 0;
  int utterances = 0;
  int train_utterances = 0;
  int heldout_utterances = 0;
  int trials = 0;
};

// Writes <dir>/wav/*.wav, <dir>/manifest.csv (every utterance),
// <dir>/train.csv and <dir>/heldout.csv (per-speaker split, the last
// utterances of each speaker held out) and <dir>/trials.txt (held-out pairs,
// equal target and nontarget counts, no self pairs).
CorpusSummary SynthCorpus(const CorpusOptions& options, const std::string& dir);

}  // namespace dtcf::audio

#endif  // DTCF_AUDIO_SYNTH_H_
