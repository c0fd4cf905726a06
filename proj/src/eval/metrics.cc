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

#include "dtcf/eval/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "dtcf/base/error.h"

namespace dtcf::eval {

namespace {

struct Sweep {
  std::vector<double> thresholds;  // ascending distinct scores
  std::vector<double> far;         // nontargets >= t
  std::vector<double> frr;         // targets < t
};

Sweep SweepThresholds(const ScoreSet& set) {
  set.Validate();
  std::vector<size_t> order(set.scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return set.scores[a] < set.scores[b]; });
  int64_t n_target = 0;
  for (bool t : set.targets) n_target += t;
  const int64_t n_nontarget = static_cast<int64_t>(set.targets.size()) - n_target;
  Sweep sweep;
  int64_t targets_below = 0, nontargets_below = 0;
  for (size_t i = 0; i < order.size();) {
    const double t = set.scores[order[i]];
    sweep.thresholds.push_back(t);
    sweep.far.push_back(static_cast<double>(n_nontarget - nontargets_below) /
                        static_cast<double>(n_nontarget));
    sweep.frr.push_back(static_cast<double>(targets_below) / static_cast<double>(n_target));
    for (; i < order.size() && set.scores[order[i]] == t; ++i) {
      (set.targets[order[i]] ? targets_below : nontargets_below)++;
    }
  }
  return sweep;
}

}  // namespace

double CosineScore(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("cosine of vectors with lengths " + std::to_string(a.size()) +
                         " and " + std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw DomainError("cosine of a zero-norm embedding");
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

void ScoreSet::Validate() const {
  if (scores.size() != targets.size()) throw DataError("score and label counts differ");
  bool any_target = false, any_nontarget = false;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw DataError("non-finite score");
    (targets[i] ? any_target : any_nontarget) = true;
  }
  if (!any_target || !any_nontarget) {
    throw DataError("need at least one target and one nontarget trial");
  }
}

EerResult ComputeEer(const ScoreSet& set) {
  const Sweep s = SweepThresholds(set);
  for (size_t i = 0; i < s.thresholds.size(); ++i) {
    if (s.far[i] > s.frr[i]) continue;
    if (s.far[i] == s.frr[i] || i == 0) return {s.far[i], s.thresholds[i]};
    const double before = s.far[i - 1] - s.frr[i - 1];
    const double after = s.far[i] - s.frr[i];
    const double w = before / (before - after);
    return {s.far[i - 1] + w * (s.far[i] - s.far[i - 1]),
            s.thresholds[i - 1] + w * (s.thresholds[i] - s.thresholds[i - 1])};
  }
  // FAR stays above FRR up to the largest score; the crossing is with the
  // reject-all point (FAR 0, FRR 1).
  const size_t k = s.thresholds.size() - 1;
  const double before = s.far[k] - s.frr[k];
  const double w = before / (before + 1.0);
  return {s.far[k] + w * (0.0 - s.far[k]), s.thresholds[k]};
}

void DcfParams::Validate() const {
  if (!(p_target > 0.0 && p_target < 1.0)) throw ConfigError("p_target must lie in (0, 1)");
  if (!(c_miss > 0.0 && c_fa > 0.0)) throw ConfigError("DCF costs must be positive");
}

DcfResult ComputeMinDcf(const ScoreSet& set, const DcfParams& params) {
  params.Validate();
  const Sweep s = SweepThresholds(set);
  const double norm = std::min(params.c_miss * params.p_target,
                               params.c_fa * (1.0 - params.p_target));
  auto dcf = [&](double p_miss, double p_fa) {
    return (params.c_miss * p_miss * params.p_target +
            params.c_fa * p_fa * (1.0 - params.p_target)) /
           norm;
  };
  constexpr double kInf = std::numeric_limits<double>::infinity();
  DcfResult best{dcf(0.0, 1.0), -kInf};
  for (size_t i = 0; i < s.thresholds.size(); ++i) {
    const double d = dcf(s.frr[i], s.far[i]);
    if (d < best.min_dcf) best = {d, s.thresholds[i]};
  }
  const double reject_all = dcf(1.0, 0.0);
  if (reject_all < best.min_dcf) best = {reject_all, kInf};
  return best;
}

}  // namespace dtcf::eval
