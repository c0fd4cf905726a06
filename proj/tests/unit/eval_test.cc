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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dtcf/audio/synth.h"
#include "dtcf/audio/wav.h"
#include "dtcf/base/error.h"
#include "dtcf/eval/embeddings.h"
#include "dtcf/eval/metrics.h"
#include "dtcf/model/checkpoint.h"
#include "test_util.h"

namespace dtcf::eval {
namespace {

using testing::ReadBytes;
using testing::TempDir;

struct Rates {
  double far, frr;
};

// Counts every trial against a threshold.
Rates CountRates(const ScoreSet& set, double t) {
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

EerResult BruteForceEer(const ScoreSet& set) {
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

DcfResult BruteForceMinDcf(const ScoreSet& set, const DcfParams& p) {
  const double inf = std::numeric_limits<double>::infinity();
  std::set<double> distinct(set.scores.begin(), set.scores.end());
  std::vector<double> ts = {-inf};
  ts.insert(ts.end(), distinct.begin(), distinct.end());
  ts.push_back(inf);
  const double norm = std::min(p.c_miss * p.p_target, p.c_fa * (1.0 - p.p_target));
  DcfResult best{inf, 0.0};
  for (double t : ts) {
    const Rates r = CountRates(set, t);
    const double d =
        (p.c_miss * r.frr * p.p_target + p.c_fa * r.far * (1.0 - p.p_target)) / norm;
    if (d < best.min_dcf) best = {d, t};
  }
  return best;
}

ScoreSet RandomSet(int n, std::mt19937_64& rng, bool ties) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  ScoreSet set;
  for (int i = 0; i < n; ++i) {
    const bool target = i < 2 ? i == 0 : coin(rng);
    double s = dist(rng) + (target ? 1.0 : 0.0);
    if (ties) s = std::round(s * 10.0) / 10.0;
    set.Add(s, target);
  }
  return set;
}

TEST(CosineScoreTest, BasicCases) {
  const std::vector<double> a = {1.0, 2.0, -3.0};
  EXPECT_DOUBLE_EQ(CosineScore(a, a), 1.0);
  EXPECT_DOUBLE_EQ(CosineScore(std::vector<double>{1, 0}, std::vector<double>{0, 5}), 0.0);
  EXPECT_DOUBLE_EQ(CosineScore(std::vector<double>{1, 1}, std::vector<double>{-2, -2}), -1.0);
  EXPECT_THROW(CosineScore(a, std::vector<double>{0, 0, 0}), DomainError);
  EXPECT_THROW(CosineScore(a, std::vector<double>{1, 2}), DimensionError);
}

TEST(CosineScoreTest, MatchesExtendedPrecisionOracle) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(512), b(512);
    for (auto& v : a) v = dist(rng);
    for (auto& v : b) v = dist(rng);
    long double dot = 0, na = 0, nb = 0;
    for (int i = 0; i < 512; ++i) {
      dot += static_cast<long double>(a[i]) * b[i];
      na += static_cast<long double>(a[i]) * a[i];
      nb += static_cast<long double>(b[i]) * b[i];
    }
    const double oracle = static_cast<double>(dot / std::sqrt(na * nb));
    EXPECT_NEAR(CosineScore(a, b), oracle, 1e-7);
  }
}

TEST(EerTest, PerfectAndInvertedSeparation) {
  ScoreSet set;
  set.Add(0.9, true);
  set.Add(0.8, true);
  set.Add(0.1, false);
  set.Add(0.2, false);
  EXPECT_EQ(ComputeEer(set).eer, 0.0);
  ScoreSet swapped;
  for (size_t i = 0; i < set.scores.size(); ++i) swapped.Add(set.scores[i], !set.targets[i]);
  EXPECT_EQ(ComputeEer(swapped).eer, 1.0);
}

TEST(EerTest, InterpolatesBetweenThresholds) {
  ScoreSet set;
  set.Add(0.1, true);
  set.Add(0.6, true);
  set.Add(0.3, false);
  set.Add(0.8, false);
  // t=0.3: FAR 1, FRR 0.5; t=0.6: FAR 0.5, FRR 0.5.
  const auto r = ComputeEer(set);
  EXPECT_DOUBLE_EQ(r.eer, 0.5);
  EXPECT_DOUBLE_EQ(r.threshold, 0.6);
  ScoreSet cross;
  cross.Add(1.0, true);
  cross.Add(2.0, true);
  cross.Add(3.0, true);
  cross.Add(1.5, false);
  cross.Add(2.5, false);
  // t=2: FAR 1/2, FRR 1/3; t=2.5: FAR 1/2, FRR 2/3; halfway in threshold.
  const auto c = ComputeEer(cross);
  EXPECT_DOUBLE_EQ(c.eer, 0.5);
  EXPECT_DOUBLE_EQ(c.threshold, 2.25);
}

TEST(EerTest, TiesAcceptAtThreshold) {
  ScoreSet set;
  set.Add(0.5, true);
  set.Add(0.5, false);
  set.Add(0.9, true);
  set.Add(0.1, false);
  // t=0.5: FAR 1/2 (tie accepted), FRR 0. t=0.9: FAR 0, FRR 1/2.
  const auto r = ComputeEer(set);
  EXPECT_DOUBLE_EQ(r.eer, 0.25);
  EXPECT_DOUBLE_EQ(r.threshold, 0.7);
}

TEST(EerTest, AllEqualScoresGiveHalf) {
  ScoreSet set;
  for (int i = 0; i < 10; ++i) set.Add(0.3, i % 3 == 0);
  EXPECT_DOUBLE_EQ(ComputeEer(set).eer, 0.5);
}

TEST(EerTest, MatchesBruteForceSweepExactly) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto set = RandomSet(1000, rng, trial % 2 == 1);
    const auto fast = ComputeEer(set);
    const auto slow = BruteForceEer(set);
    EXPECT_EQ(fast.eer, slow.eer) << trial;
    EXPECT_EQ(fast.threshold, slow.threshold) << trial;
    EXPECT_GE(fast.eer, 0.0);
    EXPECT_LE(fast.eer, 1.0);
  }
}

TEST(MinDcfTest, PerfectSeparationAndDoNothing) {
  ScoreSet set;
  set.Add(0.9, true);
  set.Add(0.1, false);
  EXPECT_EQ(ComputeMinDcf(set).min_dcf, 0.0);
  ScoreSet flat;
  for (int i = 0; i < 50; ++i) flat.Add(0.42, i % 5 == 0);
  const auto r = ComputeMinDcf(flat);
  EXPECT_DOUBLE_EQ(r.min_dcf, 1.0);
  EXPECT_EQ(r.threshold, std::numeric_limits<double>::infinity());
}

TEST(MinDcfTest, MatchesBruteForceSweepExactly) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto set = RandomSet(1000, rng, trial % 2 == 0);
    DcfParams p;
    if (trial >= 10) p = {0.05, 2.0, 0.5};
    const auto fast = ComputeMinDcf(set, p);
    const auto slow = BruteForceMinDcf(set, p);
    EXPECT_EQ(fast.min_dcf, slow.min_dcf) << trial;
    EXPECT_EQ(fast.threshold, slow.threshold) << trial;
  }
}

TEST(MinDcfTest, BoundedByDoNothingSystem) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const auto set = RandomSet(5 + trial, rng, trial % 3 == 0);
    const double d = ComputeMinDcf(set).min_dcf;
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0);
  }
}

TEST(MetricsTest, InvariantUnderMonotoneTransforms) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto set = RandomSet(1000, rng, trial % 2 == 0);
    const auto eer = ComputeEer(set).eer;
    const auto dcf = ComputeMinDcf(set).min_dcf;
    for (int kind = 0; kind < 2; ++kind) {
      ScoreSet t = set;
      for (auto& s : t.scores) s = kind == 0 ? 3.0 * s - 7.0 : s * s * s + s;
      EXPECT_EQ(ComputeEer(t).eer, eer);
      EXPECT_EQ(ComputeMinDcf(t).min_dcf, dcf);
    }
  }
}

TEST(MetricsTest, DegenerateSetsRejected) {
  ScoreSet targets_only;
  targets_only.Add(0.1, true);
  targets_only.Add(0.2, true);
  EXPECT_THROW(ComputeEer(targets_only), DataError);
  EXPECT_THROW(ComputeMinDcf(targets_only), DataError);
  EXPECT_THROW(ComputeEer(ScoreSet{}), DataError);
  ScoreSet nan_set;
  nan_set.Add(std::nan(""), true);
  nan_set.Add(0.0, false);
  EXPECT_THROW(ComputeEer(nan_set), DataError);
  ScoreSet ok;
  ok.Add(1.0, true);
  ok.Add(0.0, false);
  EXPECT_THROW(ComputeMinDcf(ok, {0.0, 1.0, 1.0}), ConfigError);
}

EmbeddingStore RandomStore(int n, int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> dist;
  EmbeddingStore store;
  for (int i = n - 1; i >= 0; --i) {
    StoredEmbedding e{"spk" + std::to_string(i % 3), {}};
    for (int d = 0; d < dim; ++d) e.values.push_back(dist(rng) * 1e-3);
    store["utt" + std::to_string(i)] = e;
  }
  return store;
}

TEST(ScoreTrialsTest, OrderPreservingAndNamesMissingIds) {
  std::mt19937_64 rng(6);
  const auto store = RandomStore(6, 8, rng);
  std::vector<data::Trial> trials = {
      {"utt0", "utt1", true}, {"utt2", "utt5", false}, {"utt0", "utt1", true}, {"utt4", "utt3", false}};
  const auto set = ScoreTrials(store, trials);
  ASSERT_EQ(set.scores.size(), 4u);
  EXPECT_EQ(set.scores[0], set.scores[2]);
  EXPECT_EQ(set.targets, (std::vector<bool>{true, false, true, false}));
  std::vector<data::Trial> reversed(trials.rbegin(), trials.rend());
  const auto rev = ScoreTrials(store, reversed);
  for (size_t i = 0; i < 4; ++i) EXPECT_EQ(rev.scores[i], set.scores[3 - i]);
  EXPECT_EQ(set.scores[1], CosineScore(store.at("utt2").values, store.at("utt5").values));
  try {
    ScoreTrials(store, {{"utt0", "ghost", false}});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
}

TEST(EmbeddingCsvTest, RoundTripSortedAndStable) {
  std::mt19937_64 rng(7);
  const auto store = RandomStore(12, 512, rng);
  TempDir dir("emb");
  WriteEmbeddings(dir.file("a.csv"), store);
  const auto text = ReadBytes(dir.path() / "a.csv");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 13);
  EXPECT_EQ(text.substr(0, 24), "utt_id,speaker_id,e0,e1,");
  EXPECT_NE(text.find(",e511\n"), std::string::npos);
  const auto back = ReadEmbeddings(dir.file("a.csv"));
  ASSERT_EQ(back.size(), store.size());
  for (const auto& [id, e] : store) {
    EXPECT_EQ(back.at(id).speaker_id, e.speaker_id);
    EXPECT_LT(testing::MaxAbsDiff(back.at(id).values, e.values), 1e-12);
  }
  std::vector<std::string> order;
  std::stringstream ss(text);
  std::string line;
  std::getline(ss, line);
  while (std::getline(ss, line)) order.push_back(line.substr(0, line.find(',')));
  EXPECT_TRUE(std::is_sorted(order.begin(), order.end()));
  WriteEmbeddings(dir.file("b.csv"), back);
  EXPECT_EQ(ReadBytes(dir.path() / "b.csv"), text);
}

TEST(EmbeddingCsvTest, MalformedFilesRejected) {
  TempDir dir("emb_bad");
  std::ofstream(dir.file("short.csv")) << "utt_id,speaker_id,e0,e1\nu1,s1,0.5\n";
  EXPECT_THROW(ReadEmbeddings(dir.file("short.csv")), IoError);
  std::ofstream(dir.file("text.csv")) << "utt_id,speaker_id,e0\nu1,s1,abc\n";
  EXPECT_THROW(ReadEmbeddings(dir.file("text.csv")), IoError);
  std::ofstream(dir.file("dup.csv")) << "utt_id,speaker_id,e0\nu1,s1,1\nu1,s1,2\n";
  EXPECT_THROW(ReadEmbeddings(dir.file("dup.csv")), DataError);
  std::ofstream(dir.file("hdr.csv")) << "id,e0\n";
  EXPECT_THROW(ReadEmbeddings(dir.file("hdr.csv")), IoError);
  EXPECT_THROW(ReadEmbeddings(dir.file("none.csv")), IoError);
}

TEST(ScoreCsvTest, WritesOneRowPerTrial) {
  TempDir dir("scores");
  ScoreSet set;
  set.Add(0.25, true);
  set.Add(-0.5, false);
  WriteScores(dir.file("s.csv"), {{"a", "b", true}, {"a", "c", false}}, set);
  EXPECT_EQ(ReadBytes(dir.path() / "s.csv"),
            "enroll,test,label,score\na,b,target,0.25\na,c,nontarget,-0.5\n");
}

TEST(ExtractTest, CheckpointedModelGivesIdenticalEmbeddings) {
  TempDir dir("extract");
  auto specs = audio::DrawSpeakers(2, 8);
  std::vector<data::ManifestEntry> rows;
  for (int i = 0; i < 3; ++i) {
    const auto path = dir.file("u" + std::to_string(i) + ".wav");
    audio::WriteWav(path, audio::SynthUtterance(specs[i % 2], 1.0 + 0.25 * i, i));
    rows.push_back({"u" + std::to_string(i), specs[i % 2].speaker_id, path});
  }
  model::SpeakerNet<float> net(model::BackboneConfig::Toy(), 11);
  const auto direct = ExtractEmbeddings(&net, rows);
  EXPECT_TRUE(net.training());
  ASSERT_EQ(direct.size(), 3u);
  EXPECT_EQ(direct.at("u0").values.size(), 512u);
  model::Checkpoint ckpt;
  net.config().ToKeyValues(&ckpt.config());
  ckpt.PutAll(net.Parameters());
  ckpt.PutAll(net.Buffers());
  ckpt.Write(dir.file("m.ckpt"));
  auto loaded = LoadSpeakerNet(model::Checkpoint::Read(dir.file("m.ckpt")));
  EXPECT_FALSE(loaded.training());
  const auto again = ExtractEmbeddings(&loaded, rows);
  for (const auto& [id, e] : direct) EXPECT_EQ(again.at(id).values, e.values) << id;
  WriteEmbeddings(dir.file("a.csv"), direct);
  WriteEmbeddings(dir.file("b.csv"), ExtractEmbeddings(&loaded, rows));
  EXPECT_EQ(ReadBytes(dir.path() / "a.csv"), ReadBytes(dir.path() / "b.csv"));
}

}  // namespace
}  // namespace dtcf::eval
