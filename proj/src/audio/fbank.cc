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

#include "dtcf/audio/fbank.h"

#include <fftw3.h>

#include <cmath>
#include <numbers>

#include "dtcf/base/error.h"

namespace dtcf::audio {

int FbankConfig::WindowSamples() const {
  return static_cast<int>(std::lround(sample_rate * window_ms / 1000.0));
}

int FbankConfig::HopSamples() const {
  return static_cast<int>(std::lround(sample_rate * hop_ms / 1000.0));
}

int FbankConfig::FftSize() const {
  int n = 1;
  while (n < WindowSamples()) n <<= 1;
  return n;
}

double FbankConfig::HighHz() const {
  return high_hz > 0.0 ? high_hz : sample_rate / 2.0;
}

void FbankConfig::Validate() const {
  if (sample_rate <= 0) throw ConfigError("sample rate must be positive");
  if (n_mels < 1) throw ConfigError("n_mels must be at least 1");
  if (!(HopSamples() > 0 && WindowSamples() > HopSamples())) {
    throw ConfigError("fbank needs window > hop > 0");
  }
  if (!(low_hz >= 0.0 && low_hz < HighHz() && HighHz() <= sample_rate / 2.0)) {
    throw ConfigError("fbank frequency range must satisfy 0 <= low < high <= Nyquist");
  }
  if (!(log_floor > 0.0)) throw ConfigError("log floor must be positive");
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

int64_t NumFrames(int64_t num_samples, const FbankConfig& config) {
  const int64_t win = config.WindowSamples();
  if (num_samples < win) return 0;
  return 1 + (num_samples - win) / config.HopSamples();
}

struct Fbank::Plan {
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;
};

Fbank::Fbank(const FbankConfig& config) : config_(config) {
  config_.Validate();
  const int win = config_.WindowSamples();
  const int nfft = config_.FftSize();
  const int bins = nfft / 2 + 1;
  window_.resize(win);
  for (int i = 0; i < win; ++i) {
    window_[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (win - 1));
  }
  const double mel_lo = HzToMel(config_.low_hz);
  const double mel_hi = HzToMel(config_.HighHz());
  const int m = config_.n_mels;
  std::vector<double> edges(m + 2);
  for (int i = 0; i < m + 2; ++i) {
    edges[i] = MelToHz(mel_lo + (mel_hi - mel_lo) * i / (m + 1));
  }
  filters_.assign(m, std::vector<double>(bins, 0.0));
  centers_.resize(m);
  for (int j = 0; j < m; ++j) {
    const double left = edges[j], center = edges[j + 1], right = edges[j + 2];
    centers_[j] = center;
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * config_.sample_rate / nfft;
      if (f > left && f < right) {
        filters_[j][k] = f <= center ? (f - left) / (center - left)
                                     : (right - f) / (right - center);
      }
    }
  }
  plan_ = new Plan;
  plan_->in = fftw_alloc_real(nfft);
  plan_->out = fftw_alloc_complex(bins);
  plan_->plan = fftw_plan_dft_r2c_1d(nfft, plan_->in, plan_->out, FFTW_ESTIMATE);
}

Fbank::~Fbank() {
  if (!plan_) return;
  fftw_destroy_plan(plan_->plan);
  fftw_free(plan_->in);
  fftw_free(plan_->out);
  delete plan_;
}

ad::Tensor<float> Fbank::Compute(const Waveform& wav) const {
  if (wav.sample_rate != config_.sample_rate) {
    throw ConfigError("waveform sample rate " + std::to_string(wav.sample_rate) +
                      " does not match fbank rate " + std::to_string(config_.sample_rate));
  }
  const int64_t frames = NumFrames(static_cast<int64_t>(wav.samples.size()), config_);
  if (frames < 1) {
    throw DimensionError("waveform of " + std::to_string(wav.samples.size()) +
                         " samples is shorter than one analysis window");
  }
  const int win = config_.WindowSamples(), hop = config_.HopSamples();
  const int nfft = config_.FftSize(), bins = nfft / 2 + 1, m = config_.n_mels;
  std::vector<float> out(frames * m);
  std::vector<double> power(bins);
  for (int64_t t = 0; t < frames; ++t) {
    const float* src = wav.samples.data() + t * hop;
    for (int i = 0; i < win; ++i) {
      if (!std::isfinite(src[i])) throw NumericError("non-finite audio sample");
      plan_->in[i] = src[i] * window_[i];
    }
    for (int i = win; i < nfft; ++i) plan_->in[i] = 0.0;
    fftw_execute(plan_->plan);
    for (int k = 0; k < bins; ++k) {
      power[k] = plan_->out[k][0] * plan_->out[k][0] + plan_->out[k][1] * plan_->out[k][1];
    }
    for (int j = 0; j < m; ++j) {
      double e = 0.0;
      for (int k = 0; k < bins; ++k) e += filters_[j][k] * power[k];
      out[t * m + j] = static_cast<float>(std::log(e + config_.log_floor));
    }
  }
  return ad::Tensor<float>::FromData({frames, m}, std::move(out));
}

}  // namespace dtcf::audio
