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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dtcf/attention/attention.h"
#include "dtcf/audio/synth.h"
#include "dtcf/autodiff/tensor.h"
#include "dtcf/base/key_values.h"
#include "dtcf/cli/commands.h"
#include "dtcf/data/manifest.h"
#include "dtcf/eval/embeddings.h"
#include "dtcf/eval/metrics.h"
#include "dtcf/loss/aam.h"
#include "dtcf/model/backbone.h"
#include "dtcf/model/checkpoint.h"
#include "dtcf/train/config.h"
#include "dtcf/train/schedule.h"
#include "dtcf/train/trainer.h"

namespace dtcf::acceptance {
namespace {

namespace fs = std::filesystem;
using ad::Tensor;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Accumulates failed checks with a short reason.
class Checker {
 public:
  void Expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    failed_ |= !ok;
  }
  void Note(const std::string& text) { notes_ += (notes_.empty() ? "" : " ") + text; }
  Outcome Done() const {
    Outcome o{!failed_, notes_};
    for (const auto& f : failures_) o.detail += " [" + f + "]";
    return o;
  }

 private:
  bool failed_ = false;
  std::vector<std::string> failures_;
  std::string notes_;
};

std::string Fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

Tensor<double> RandomMap(const ad::Shape& shape, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> data(ad::NumElements(shape));
  for (auto& v : data) v = dist(rng);
  return Tensor<double>::FromData(shape, std::move(data));
}

void Randomize(Tensor<double>& t, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& v : t.mutable_data()) v = dist(rng);
}

// x'[c, t, f] = x[c, pt[t], pf[f]].
Tensor<double> Permute(const Tensor<double>& x, const std::vector<int64_t>& pt,
                       const std::vector<int64_t>& pf) {
  const int64_t C = x.dim(0), T = x.dim(1), F = x.dim(2);
  std::vector<double> out(x.size());
  for (int64_t c = 0; c < C; ++c) {
    for (int64_t t = 0; t < T; ++t) {
      for (int64_t f = 0; f < F; ++f) out[(c * T + t) * F + f] = x.at({c, pt[t], pf[f]});
    }
  }
  return Tensor<double>::FromData(x.shape(), std::move(out));
}

std::vector<int64_t> Identity(int64_t n) {
  std::vector<int64_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

std::vector<int64_t> Shuffled(int64_t n, std::mt19937_64& rng) {
  auto p = Identity(n);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

attention::DtcfMaskPair<double> DtcfMasksOf(const Tensor<double>& x,
                                            const attention::DtcfBlock<double>& b) {
  auto p = attention::DtcfPool(x);
  return attention::DtcfMasks(attention::DtcfEncode(p.freq, p.time, b), b, x.dim(2));
}

Outcome GradientFidelity() {
  Checker check;
  struct Case {
    attention::AttentionKind kind;
    cli::BlockShape shape;
  };
  const Case cases[] = {{attention::AttentionKind::kSe, {16, 20, 10}},
                        {attention::AttentionKind::kDtcf, {8, 12, 10}}};
  for (const auto& c : cases) {
    const auto start = Clock::now();
    const auto r = cli::AttentionGradCheck(c.kind, c.shape, 0);
    const double secs = Seconds(start);
    const std::string name = attention::AttentionKindName(c.kind);
    check.Note(name + ":err=" + Fmt(r.max_rel_error) + ",t=" + Fmt(secs) + "s");
    check.Expect(r.max_rel_error < cli::kGradCheckTolerance, name + " error above 1e-6");
    check.Expect(secs < 60.0, name + " slower than 60 s");
  }
  return check.Done();
}

Outcome Equivariance() {
  Checker check;
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  auto diff = [&](double a, double b) {
    worst = std::max(worst, std::abs(a - b));
    return std::abs(a - b) <= 1e-12;
  };
  for (int k = 0; k < 50; ++k) {
    const int64_t C = 8 * std::uniform_int_distribution<int64_t>(1, 3)(rng);
    const int64_t T = std::uniform_int_distribution<int64_t>(3, 16)(rng);
    const int64_t F = std::uniform_int_distribution<int64_t>(3, 12)(rng);
    attention::DtcfBlock<double> dtcf(C, 8, k % 2 == 1, rng);
    attention::SeBlock<double> se(C, 8, k % 2 == 1, rng);
    for (auto* t : {&dtcf.w1(), &dtcf.w2(), &dtcf.w3(), &se.w1(), &se.w2()}) Randomize(*t, rng);
    if (k % 2 == 1) {
      for (auto* t : {&dtcf.b1(), &dtcf.b2(), &dtcf.b3(), &se.b1(), &se.b2()}) Randomize(*t, rng);
    }
    const auto x = RandomMap({C, T, F}, rng);
    const auto pt = Shuffled(T, rng), pf = Shuffled(F, rng);
    const auto base = DtcfMasksOf(x, dtcf);
    const auto by_time = DtcfMasksOf(Permute(x, pt, Identity(F)), dtcf);
    const auto by_freq = DtcfMasksOf(Permute(x, Identity(T), pf), dtcf);
    bool ok = true;
    for (int64_t c = 0; c < C; ++c) {
      for (int64_t t = 0; t < T; ++t) {
        ok &= diff(by_time.time.at({c, t}), base.time.at({c, pt[t]}));
        ok &= diff(by_freq.time.at({c, t}), base.time.at({c, t}));
      }
      for (int64_t f = 0; f < F; ++f) {
        ok &= diff(by_time.freq.at({c, f}), base.freq.at({c, f}));
        ok &= diff(by_freq.freq.at({c, f}), base.freq.at({c, pf[f]}));
      }
    }
    check.Expect(ok, "dtcf case " + std::to_string(k));
    const auto se_base = attention::SeMask(attention::SeSqueeze(x), se);
    const auto se_moved = attention::SeMask(attention::SeSqueeze(Permute(x, pt, pf)), se);
    bool se_ok = true;
    for (int64_t c = 0; c < C; ++c) se_ok &= diff(se_moved.at({c}), se_base.at({c}));
    check.Expect(se_ok, "se case " + std::to_string(k));
  }
  check.Note("cases=50 max_dev=" + Fmt(worst));
  return check.Done();
}

Outcome ParameterAccounting() {
  Checker check;
  std::mt19937_64 rng(3);
  for (int64_t C : {32, 64, 128, 256}) {
    const int64_t Cr = C / 8;
    attention::DtcfBlock<double> dtcf(C, 8, false, rng);
    attention::SeBlock<double> se(C, 8, false, rng);
    nn::NamedTensors<double> dp, sp;
    dtcf.CollectParameters("d.", &dp);
    se.CollectParameters("s.", &sp);
    check.Expect(nn::TotalElements(dp) == 3 * C * Cr, "dtcf C=" + std::to_string(C));
    check.Expect(attention::ParamCount(dtcf) == 3 * C * Cr, "dtcf count C=" + std::to_string(C));
    check.Expect(nn::TotalElements(sp) == 2 * C * Cr, "se C=" + std::to_string(C));
    check.Expect(attention::ParamCount(se) == 2 * C * Cr, "se count C=" + std::to_string(C));
  }
  const model::SpeakerNet<float> net(model::BackboneConfig{}, 0);
  const int64_t total = net.ParameterCount();
  check.Note("full_model_parameters=" + std::to_string(total));
  check.Expect(total >= 8100000 && total <= 9900000, "full model outside 9M +-10%");
  return check.Done();
}

std::string ShapeText(const ad::Shape& s) {
  std::string out = "(";
  for (size_t i = 1; i < s.size(); ++i) out += (i > 1 ? "," : "") + std::to_string(s[i]);
  return out + ")";
}

Outcome ShapeTrace() {
  Checker check;
  model::SpeakerNet<float> net(model::BackboneConfig{}, 1);
  net.set_training(false);
  ad::NoGradGuard no_grad;
  std::mt19937_64 rng(4);
  std::normal_distribution<float> dist;
  std::vector<float> feats(200 * 80);
  for (auto& v : feats) v = dist(rng);
  const auto x = Tensor<float>::FromData({1, 200, 80}, std::move(feats));
  std::vector<Tensor<float>> trace;
  const auto last = net.backbone().Forward(x, &trace);
  const std::vector<ad::Shape> expected = {{1, 32, 200, 80},
                                           {1, 32, 200, 80},
                                           {1, 64, 200, 40},
                                           {1, 128, 100, 20},
                                           {1, 256, 50, 10}};
  std::string path;
  check.Expect(trace.size() == expected.size(), "trace length");
  for (size_t i = 1; i < std::min(trace.size(), expected.size()); ++i) {
    path += (i > 1 ? "->" : "") + ShapeText(trace[i].shape());
    check.Expect(trace[i].shape() == expected[i], "stage " + std::to_string(i));
  }
  check.Expect(trace.empty() || trace[0].shape() == expected[0], "stem");
  const auto pooled = net.asp().Forward(last);
  const auto emb = net.embedding().Forward(pooled);
  check.Expect(pooled.shape() == ad::Shape({1, 5120}), "pooling width");
  check.Expect(emb.shape() == ad::Shape({1, 512}), "embedding width");
  check.Note(path + "->" + std::to_string(pooled.dim(1)) + "->" + std::to_string(emb.dim(1)));
  return check.Done();
}

struct Rates {
  double far, frr;
};

Rates CountRates(const eval::ScoreSet& set, double t) {
  int64_t nt = 0, nn = 0, miss = 0, fa = 0;
  for (size_t i = 0; i < set.scores.size(); ++i) {
    if (set.targets[i]) {
      ++nt;
      miss += set.scores[i] < t;
    } else {
      ++nn;
      fa += set.scores[i] >= t;
    }
  }
  return {static_cast<double>(fa) / static_cast<double>(nn),
          static_cast<double>(miss) / static_cast<double>(nt)};
}

eval::EerResult SweepEer(const eval::ScoreSet& set) {
  const std::set<double> distinct(set.scores.begin(), set.scores.end());
  const std::vector<double> ts(distinct.begin(), distinct.end());
  for (size_t i = 0; i < ts.size(); ++i) {
    const Rates r = CountRates(set, ts[i]);
    if (r.far > r.frr) continue;
    if (r.far == r.frr || i == 0) return {r.far, ts[i]};
    const Rates p = CountRates(set, ts[i - 1]);
    const double before = p.far - p.frr, after = r.far - r.frr;
    const double w = before / (before - after);
    return {p.far + w * (r.far - p.far), ts[i - 1] + w * (ts[i] - ts[i - 1])};
  }
  const Rates r = CountRates(set, ts.back());
  const double before = r.far - r.frr;
  const double w = before / (before + 1.0);
  return {r.far + w * (0.0 - r.far), ts.back()};
}

eval::DcfResult SweepMinDcf(const eval::ScoreSet& set, const eval::DcfParams& p) {
  const double inf = std::numeric_limits<double>::infinity();
  const std::set<double> distinct(set.scores.begin(), set.scores.end());
  std::vector<double> ts = {-inf};
  ts.insert(ts.end(), distinct.begin(), distinct.end());
  ts.push_back(inf);
  const double norm = std::min(p.c_miss * p.p_target, p.c_fa * (1.0 - p.p_target));
  eval::DcfResult best{inf, 0.0};
  for (double t : ts) {
    const Rates r = CountRates(set, t);
    const double d =
        (p.c_miss * r.frr * p.p_target + p.c_fa * r.far * (1.0 - p.p_target)) / norm;
    if (d < best.min_dcf) best = {d, t};
  }
  return best;
}

Outcome MetricOracles() {
  Checker check;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> dist;
  std::bernoulli_distribution coin(0.5);
  const eval::DcfParams params;
  for (int k = 0; k < 20; ++k) {
    const bool ties = k % 2 == 1;
    eval::ScoreSet set;
    for (int i = 0; i < 1000; ++i) {
      const bool target = i < 2 ? i == 0 : coin(rng);
      double s = dist(rng) + (target ? 1.5 : 0.0);
      if (ties) s = std::round(s * 10.0) / 10.0;
      set.Add(s, target);
    }
    const auto eer = eval::ComputeEer(set);
    const auto ref = SweepEer(set);
    check.Expect(eer.eer == ref.eer && eer.threshold == ref.threshold,
                 "eer set " + std::to_string(k));
    const auto dcf = eval::ComputeMinDcf(set, params);
    const auto dref = SweepMinDcf(set, params);
    check.Expect(dcf.min_dcf == dref.min_dcf && dcf.threshold == dref.threshold,
                 "minDCF set " + std::to_string(k));
    eval::ScoreSet moved = set;
    for (auto& s : moved.scores) s = std::atan(s) * 3.0 + 7.0;
    check.Expect(eval::ComputeEer(moved).eer == eer.eer, "eer monotone " + std::to_string(k));
    check.Expect(eval::ComputeMinDcf(moved, params).min_dcf == dcf.min_dcf,
                 "minDCF monotone " + std::to_string(k));
  }
  eval::ScoreSet flat;
  for (int i = 0; i < 1000; ++i) flat.Add(0.5, i % 3 == 0);
  const double none = eval::ComputeMinDcf(flat, params).min_dcf;
  check.Expect(none == 1.0, "do-nothing minDCF " + Fmt(none));
  check.Note("sets=20x1000 do_nothing_minDcf=" + Fmt(none));
  return check.Done();
}

Outcome AamReductions() {
  Checker check;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double s = 30.0;
  double worst_m0 = 0.0;
  {
    loss::AamHead<double> head(7, 16, s, 0.0, rng);
    const auto emb = RandomMap({5, 16}, rng);
    const std::vector<int64_t> labels = {0, 3, 6, 2, 3};
    const auto logits = loss::AamLogits(emb, labels, head);
    for (int64_t n = 0; n < 5; ++n) {
      for (int64_t k = 0; k < 7; ++k) {
        long double dot = 0, ne = 0, nw = 0;
        for (int64_t d = 0; d < 16; ++d) {
          const long double e = emb.at({n, d}), w = head.weight().at({k, d});
          dot += e * w;
          ne += e * e;
          nw += w * w;
        }
        const double cos = static_cast<double>(dot / std::sqrt(ne * nw));
        worst_m0 = std::max(worst_m0, std::abs(logits.at({n, k}) - s * cos));
      }
    }
  }
  check.Expect(worst_m0 <= 1e-6, "m=0 logits deviate by " + Fmt(worst_m0));
  for (int k = 0; k < 100; ++k) {
    const int64_t K = std::uniform_int_distribution<int64_t>(2, 12)(rng);
    std::vector<double> cos(K);
    for (auto& c : cos) c = unit(rng);
    const int64_t y = std::uniform_int_distribution<int64_t>(0, K - 1)(rng);
    double m1 = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
    double m2 = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
    if (m1 > m2) std::swap(m1, m2);
    const auto c = Tensor<double>::FromData({1, K}, cos);
    const auto l1 = loss::AngularMargin(c, {y}, s, m1);
    const auto l2 = loss::AngularMargin(c, {y}, s, m2);
    bool ok = l2.at({0, y}) <= l1.at({0, y});
    for (int64_t j = 0; j < K; ++j) {
      if (j != y) ok &= l1.at({0, j}) == l2.at({0, j});
    }
    ok &= loss::CrossEntropy(l2, {y}).item() >= loss::CrossEntropy(l1, {y}).item();
    check.Expect(ok, "margin monotonicity case " + std::to_string(k));
  }
  double worst_uniform = 0.0;
  for (int64_t K : {2, 10, 1000, 5994}) {
    const auto logits = Tensor<double>::Full({3, K}, 4.25);
    const double l = loss::CrossEntropy(logits, {0, 1, K - 1}).item();
    worst_uniform = std::max(worst_uniform, std::abs(l - std::log(static_cast<double>(K))));
  }
  check.Expect(worst_uniform <= 1e-9, "uniform loss deviates by " + Fmt(worst_uniform));
  check.Note("m0_dev=" + Fmt(worst_m0) + " cases=100 lnK_dev=" + Fmt(worst_uniform));
  return check.Done();
}

// Triangular2 closed form.
double Triangular2(double base, double max, double s, double it) {
  const double cycle = std::floor(1.0 + it / (2.0 * s));
  const double x = std::abs(it / s - 2.0 * cycle + 1.0);
  return base + (max - base) * std::max(0.0, 1.0 - x) / std::pow(2.0, cycle - 1.0);
}

Outcome SchedulerClosedForm() {
  Checker check;
  for (int64_t s : {1, 7, 150, 500}) {
    train::Triangular2Schedule sched;
    sched.step_size = s;
    for (int64_t m : {0, 1, 2, 3, 5}) {
      const double got = sched.LrAt(m * s);
      const double want = Triangular2(sched.base_lr, sched.max_lr, static_cast<double>(s),
                                      static_cast<double>(m * s));
      check.Expect(std::abs(got - want) <= 1e-15,
                   "s=" + std::to_string(s) + " it=" + std::to_string(m * s));
    }
    const double peak2 = sched.base_lr + (sched.max_lr - sched.base_lr) / 2.0;
    check.Expect(std::abs(sched.LrAt(3 * s) - peak2) <= 1e-12,
                 "second peak s=" + std::to_string(s));
  }
  train::Triangular2Schedule sched;
  check.Note("lr(0,s,2s,3s,5s)=" + Fmt(sched.LrAt(0)) + "," + Fmt(sched.LrAt(500)) + "," +
             Fmt(sched.LrAt(1000)) + "," + Fmt(sched.LrAt(1500)) + "," + Fmt(sched.LrAt(2500)));
  return check.Done();
}

struct OverfitState {
  std::string corpus;
  std::unique_ptr<train::Trainer> dtcf;
};

train::TrainConfig ToyConfig(const std::string& manifest, attention::AttentionKind kind) {
  auto kv = ReadKeyValueFile(DTCF_TOY_CONFIG);
  kv["train_manifest"] = manifest;
  kv["attention"] = attention::AttentionKindName(kind);
  return train::TrainConfig::FromKeyValues(kv);
}

std::unique_ptr<train::Trainer> Overfit(const std::string& corpus, attention::AttentionKind kind,
                                        Checker* check) {
  const auto config = ToyConfig(corpus + "/train.csv", kind);
  auto data = train::LoadLabeledFeatures(data::ReadManifest(config.train_manifest));
  auto trainer = std::make_unique<train::Trainer>(config, std::move(data));
  for (int64_t i = 0; i < config.max_steps; ++i) trainer->Step();
  const std::string name = attention::AttentionKindName(kind);
  const double acc = trainer->TrainAccuracy();
  check->Expect(acc >= 0.99, name + " train accuracy " + Fmt(acc));
  std::string note = name + ":steps=" + std::to_string(config.max_steps) + ",acc=" + Fmt(acc);
  if (kind == attention::AttentionKind::kDtcf) {
    const auto store = eval::ExtractEmbeddings(&trainer->model(),
                                               data::ReadManifest(corpus + "/heldout.csv"));
    const auto set = eval::ScoreTrials(store, data::ReadTrials(corpus + "/trials.txt"));
    const double eer = eval::ComputeEer(set).eer;
    check->Expect(eer <= 0.05, name + " held-out EER " + Fmt(eer));
    note += ",eer=" + Fmt(eer) + ",minDcf=" + Fmt(eval::ComputeMinDcf(set).min_dcf);
  }
  check->Note(note);
  return trainer;
}

Outcome EndToEndOverfit(OverfitState* state) {
  Checker check;
  const auto start = Clock::now();
  const auto summary = audio::SynthCorpus(audio::CorpusOptions{}, state->corpus);
  check.Expect(summary.speakers == 10 && summary.utterances == 200, "corpus size");
  state->dtcf = Overfit(state->corpus, attention::AttentionKind::kDtcf, &check);
  Overfit(state->corpus, attention::AttentionKind::kSe, &check);
  const double secs = Seconds(start);
  check.Expect(secs < 900.0, "runtime " + Fmt(secs) + " s");
  check.Note("t=" + Fmt(secs) + "s");
  return check.Done();
}

bool SameStore(const eval::EmbeddingStore& a, const eval::EmbeddingStore& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [id, e] : a) {
    const auto it = b.find(id);
    if (it == b.end() || it->second.values.size() != e.values.size()) return false;
    if (std::memcmp(e.values.data(), it->second.values.data(),
                    e.values.size() * sizeof(e.values[0])) != 0) {
      return false;
    }
  }
  return true;
}

Outcome DeterminismAndPersistence(const OverfitState& state, const fs::path& work) {
  Checker check;
  check.Expect(state.dtcf != nullptr, "no trained model from the overfit run");
  if (state.dtcf) {
    const auto rows = data::ReadManifest(state.corpus + "/heldout.csv");
    const auto live = eval::ExtractEmbeddings(&state.dtcf->model(), rows);
    const std::string path = (work / "model.ckpt").string();
    state.dtcf->Snapshot().Write(path);
    auto loaded = eval::LoadSpeakerNet(model::Checkpoint::Read(path));
    const auto restored = eval::ExtractEmbeddings(&loaded, rows);
    check.Expect(SameStore(live, restored), "embeddings differ after checkpoint round trip");
    check.Note("embeddings=" + std::to_string(restored.size()));
  }
  auto config = ToyConfig(state.corpus + "/train.csv", attention::AttentionKind::kDtcf);
  config.max_steps = 40;
  std::string logs[2];
  for (int run = 0; run < 2; ++run) {
    const auto dir = work / ("run" + std::to_string(run));
    fs::create_directories(dir);
    train::Trainer trainer(config,
                           train::LoadLabeledFeatures(data::ReadManifest(config.train_manifest)));
    train::RunTraining(&trainer, dir.string());
    std::ifstream in(dir / "train_log.csv", std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    logs[run] = ss.str();
  }
  check.Expect(!logs[0].empty() && logs[0] == logs[1], "training logs differ");
  check.Note("log_rows=" + std::to_string(std::count(logs[0].begin(), logs[0].end(), '\n') - 1));
  return check.Done();
}

int Main() {
  const fs::path work =
      fs::temp_directory_path() / ("dtcf_acceptance_" + std::to_string(std::random_device{}()));
  fs::create_directories(work);
  OverfitState state;
  state.corpus = (work / "corpus").string();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"attention gradient fidelity", GradientFidelity},
      {"duality mask equivariance", Equivariance},
      {"parameter accounting", ParameterAccounting},
      {"shape trace", ShapeTrace},
      {"metric oracles", MetricOracles},
      {"aam reductions", AamReductions},
      {"scheduler closed form", SchedulerClosedForm},
      {"end-to-end overfit", [&] { return EndToEndOverfit(&state); }},
      {"determinism and persistence", [&] { return DeterminismAndPersistence(state, work); }},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::error_code ec;
  fs::remove_all(work, ec);
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}

}  // namespace
}  // namespace dtcf::acceptance

int main() { return dtcf::acceptance::Main(); }
