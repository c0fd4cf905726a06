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

#include "dtcf/audio/synth.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>

#include "dtcf/base/error.h"
#include "dtcf/data/manifest.h"

namespace dtcf::audio {

namespace {

constexpr std::array<double, 3> kBandwidths = {100.0, 140.0, 180.0};
constexpr int kControlBlock = 80;

std::mt19937_64 SeededRng(uint64_t a, uint64_t b) {
  std::seed_seq seq{static_cast<uint32_t>(a), static_cast<uint32_t>(a >> 32),
                    static_cast<uint32_t>(b), static_cast<uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

double Envelope(double f, const std::array<double, 3>& formants, double tilt) {
  double res = 0.02;
  for (int i = 0; i < 3; ++i) {
    const double d = (f - formants[i]) / kBandwidths[i];
    res += std::exp(-0.5 * d * d);
  }
  return res * std::pow(10.0, tilt * std::log2(f / 100.0) / 20.0);
}

std::string Numbered(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%03d", prefix, i);
  return buf;
}

}  // namespace

void SyntheticSpeakerSpec::Validate(int sample_rate) const {
  if (!(formants[0] > 0.0 && formants[0] < formants[1] && formants[1] < formants[2] &&
        formants[2] < sample_rate / 2.0)) {
    throw ConfigError("formants of " + speaker_id +
                      " must be strictly increasing and below Nyquist");
  }
  if (!(f0_min > 0.0 && f0_min <= f0_max && f0_max < sample_rate / 4.0)) {
    throw ConfigError("invalid F0 range for " + speaker_id);
  }
}

Waveform SynthUtterance(const SyntheticSpeakerSpec& spec, double duration,
                        uint64_t utt_seed, int sample_rate) {
  spec.Validate(sample_rate);
  if (!(duration >= 1.0 && duration <= 10.0)) {
    throw ConfigError("utterance duration must lie in [1, 10] seconds");
  }
  std::mt19937_64 rng = SeededRng(spec.seed, utt_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  std::array<double, 3> formants = spec.formants;
  for (auto& f : formants) f *= 1.0 + uniform(-0.03, 0.03);
  const double f0_base = uniform(spec.f0_min, spec.f0_max);
  const double f0_rate = uniform(2.0, 5.0), f0_phase = uniform(0.0, 2 * std::numbers::pi);
  const double am_rate = uniform(3.0, 6.0), am_phase = uniform(0.0, 2 * std::numbers::pi);
  const double nyquist = sample_rate / 2.0;
  const int harmonics = static_cast<int>(0.95 * nyquist / spec.f0_min);
  std::vector<std::complex<double>> offsets(harmonics);
  for (auto& c : offsets) c = std::polar(1.0, uniform(0.0, 2 * std::numbers::pi));

  const int64_t n = std::llround(duration * sample_rate);
  std::vector<double> signal(n, 0.0);
  std::vector<double> amp(harmonics);
  std::complex<double> z(1.0, 0.0);
  double sum_sq = 0.0;
  for (int64_t start = 0; start < n; start += kControlBlock) {
    const double t = static_cast<double>(start) / sample_rate;
    const double f0 = std::clamp(
        f0_base * (1.0 + 0.05 * std::sin(2 * std::numbers::pi * f0_rate * t + f0_phase)),
        spec.f0_min, spec.f0_max);
    const double loud = std::sin(2 * std::numbers::pi * am_rate * t + am_phase);
    const double gain = 0.4 + 0.6 * loud * loud;
    for (int h = 0; h < harmonics; ++h) {
      const double f = (h + 1) * f0;
      amp[h] = f < 0.95 * nyquist ? gain * Envelope(f, formants, spec.tilt_db_per_octave) : 0.0;
    }
    const std::complex<double> step = std::polar(1.0, 2 * std::numbers::pi * f0 / sample_rate);
    const int64_t end = std::min<int64_t>(n, start + kControlBlock);
    for (int64_t i = start; i < end; ++i) {
      z *= step;
      std::complex<double> zh = z;
      double s = 0.0;
      for (int h = 0; h < harmonics; ++h) {
        s += amp[h] * (zh * offsets[h]).imag();
        zh *= z;
      }
      signal[i] = s;
      sum_sq += s * s;
    }
    z /= std::abs(z);
  }
  const double rms = std::sqrt(sum_sq / n);
  std::normal_distribution<double> noise(0.0, 0.005);
  double peak = 0.0;
  for (auto& s : signal) {
    s = (rms > 0.0 ? 0.1 * s / rms : 0.0) + noise(rng);
    peak = std::max(peak, std::abs(s));
  }
  Waveform wav;
  wav.sample_rate = sample_rate;
  wav.samples.resize(n);
  const double norm = peak > 0.0 ? 0.9 / peak : 1.0;
  for (int64_t i = 0; i < n; ++i) wav.samples[i] = static_cast<float>(signal[i] * norm);
  return wav;
}

std::vector<SyntheticSpeakerSpec> DrawSpeakers(int n, uint64_t seed) {
  if (n < 2) throw ConfigError("need at least 2 speakers, got " + std::to_string(n));
  std::mt19937_64 rng = SeededRng(seed, 0x5eed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  std::vector<SyntheticSpeakerSpec> specs;
  int attempts = 0;
  while (static_cast<int>(specs.size()) < n) {
    if (++attempts > 200000) {
      throw ConfigError("cannot draw " + std::to_string(n) +
                        " speakers with separated formants");
    }
    SyntheticSpeakerSpec s;
    s.formants[0] = uniform(300.0, 900.0);
    s.formants[1] = uniform(std::max(s.formants[0] + 300.0, 900.0), 2400.0);
    s.formants[2] = uniform(std::max(s.formants[1] + 300.0, 2400.0), 3600.0);
    const double center = uniform(85.0, 240.0);
    s.f0_min = center * 0.9;
    s.f0_max = center * 1.1;
    s.tilt_db_per_octave = uniform(-9.0, -3.0);
    s.seed = rng();
    bool separated = true;
    for (const auto& other : specs) {
      double gap = 0.0;
      for (int i = 0; i < 3; ++i) {
        gap = std::max(gap, std::abs(std::log(s.formants[i] / other.formants[i])));
      }
      if (gap < kFormantSeparation) {
        separated = false;
        break;
      }
    }
    if (!separated) continue;
    s.speaker_id = Numbered("spk", static_cast<int>(specs.size()));
    specs.push_back(s);
  }
  return specs;
}

CorpusSummary SynthCorpus(const CorpusOptions& options, const std::string& dir) {
  if (options.utts_per_speaker < 1) throw ConfigError("need at least 1 utterance per speaker");
  if (!(options.heldout_fraction >= 0.0 && options.heldout_fraction < 1.0)) {
    throw ConfigError("held-out fraction must lie in [0, 1)");
  }
  const auto specs = DrawSpeakers(options.speakers, options.seed);
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "wav", ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());

  const int utts = options.utts_per_speaker;
  const int held = static_cast<int>(std::lround(utts * options.heldout_fraction));
  std::vector<data::ManifestEntry> all, train, heldout;
  std::vector<std::vector<std::string>> held_ids(specs.size());
  for (size_t s = 0; s < specs.size(); ++s) {
    for (int u = 0; u < utts; ++u) {
      const std::string utt = specs[s].speaker_id + "_" + Numbered("utt", u);
      const std::string rel = "wav/" + utt + ".wav";
      WriteWav((fs::path(dir) / rel).string(),
               SynthUtterance(specs[s], options.duration, static_cast<uint64_t>(u),
                              options.sample_rate));
      data::ManifestEntry e{utt, specs[s].speaker_id, rel};
      all.push_back(e);
      if (u >= utts - held) {
        heldout.push_back(e);
        held_ids[s].push_back(utt);
      } else {
        train.push_back(e);
      }
    }
  }
  data::WriteManifest((fs::path(dir) / "manifest.csv").string(), all);
  data::WriteManifest((fs::path(dir) / "train.csv").string(), train);
  data::WriteManifest((fs::path(dir) / "heldout.csv").string(), heldout);

  std::vector<data::Trial> targets, nontargets;
  for (const auto& ids : held_ids) {
    for (size_t i = 0; i < ids.size(); ++i) {
      for (size_t j = i + 1; j < ids.size(); ++j) targets.push_back({ids[i], ids[j], true});
    }
  }
  for (size_t a = 0; a < held_ids.size(); ++a) {
    for (size_t b = a + 1; b < held_ids.size(); ++b) {
      for (const auto& x : held_ids[a]) {
        for (const auto& y : held_ids[b]) nontargets.push_back({x, y, false});
      }
    }
  }
  std::mt19937_64 rng = SeededRng(options.seed, 0x7e1a15);
  std::shuffle(nontargets.begin(), nontargets.end(), rng);
  nontargets.resize(std::min(nontargets.size(), targets.size()));
  std::vector<data::Trial> trials;
  for (size_t i = 0; i < targets.size(); ++i) {
    trials.push_back(targets[i]);
    if (i < nontargets.size()) trials.push_back(nontargets[i]);
  }
  data::WriteTrials((fs::path(dir) / "trials.txt").string(), trials);

  CorpusSummary summary;
  summary.speakers = static_cast<int>(specs.size());
  summary.utterances = static_cast<int>(all.size());
  summary.train_utterances = static_cast<int>(train.size());
  summary.heldout_utterances = static_cast<int>(heldout.size());
  summary.trials = static_cast<int>(trials.size());
  return summary;
}

}  // namespace dtcf::audio
