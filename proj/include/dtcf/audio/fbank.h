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

// Log mel filterbank features.
//
// Frames of `window` samples every `hop` samples (no padding, so
// L = 1 + floor((N - window) / hop)), Hamming window, power spectrum of a
// real FFT of the next power of two, triangular filters equally spaced on
// mel = 2595 log10(1 + f / 700) between low_hz and high_hz, then
// log(energy + log_floor).

#ifndef DTCF_AUDIO_FBANK_H_
#define DTCF_AUDIO_FBANK_H_

#include <cstdint>
#include <vector>

#include "dtcf/audio/wav.h"
#include "dtcf/autodiff/tensor.h"

namespace dtcf::audio {

struct FbankConfig {
  int sample_rate = 16000;
  int n_mels = 80;
  double window_ms = 25.0;
  double hop_ms = 10.0;
  double low_hz = 20.0;
  double high_hz = 0.0;  // 0 selects the Nyquist frequency
  double log_floor = 1e-10;

  int WindowSamples() const;
  int HopSamples() const;
  int FftSize() const;
  double HighHz() const;
  void Validate() const;
};

double HzToMel(double hz);
double MelToHz(double mel);

// Number of frames for `num_samples` samples; 0 when shorter than a window.
int64_t NumFrames(int64_t num_samples, const FbankConfig& config);

class Fbank {
 public:
  explicit Fbank(const FbankConfig& config = {});
  ~Fbank();
  Fbank(const Fbank&) = delete;
  Fbank& operator=(const Fbank&) = delete;

  // [L, n_mels]. Throws ConfigError on a sample-rate mismatch and
  // DimensionError when the waveform is shorter than one window.
  ad::Tensor<float> Compute(const Waveform& wav) const;

  // Filter weights [n_mels][fft_size / 2 + 1].
  const std::vector<std::vector<double>>& filters() const { return filters_; }
  // Center frequency of every filter in Hz.
  const std::vector<double>& centers() const { return centers_; }
  const FbankConfig& config() const { return config_; }

 private:
  FbankConfig config_;
  std::vector<double> window_;
  std::vector<std::vector<double>> filters_;
  std::vector<double> centers_;
  struct Plan;
  Plan* plan_ = nullptr;
};

}  // namespace dtcf::audio

#endif  // DTCF_AUDIO_FBANK_H_
