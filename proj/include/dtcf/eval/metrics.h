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

// Verification scoring and error rates.
//
// A trial is accepted when score >= threshold. For a threshold t,
//   FAR(t) = P(nontarget score >= t),  FRR(t) = P(target score < t).

#ifndef DTCF_EVAL_METRICS_H_
#define DTCF_EVAL_METRICS_H_

#include <span>
#include <vector>

namespace dtcf::eval {

// <a, b> / (|a| |b|). Throws DomainError on a zero vector and
// DimensionError on a length mismatch.
double CosineScore(std::span<const double> a, std::span<const double> b);

struct ScoreSet {
  std::vector<double> scores;
  std::vector<bool> targets;

  void Add(double score, bool target) {
    scores.push_back(score);
    targets.push_back(target);
  }
  // Throws DataError unless there is at least one target and one nontarget
  // and every score is finite.
  void Validate() const;
};

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

// Thresholds are the distinct scores. EER is FAR at the first threshold
// where FAR <= FRR, linearly interpolated with the previous threshold when
// the two rates do not meet exactly.
EerResult ComputeEer(const ScoreSet& set);

struct DcfParams {
  double p_target = 0.01;
  double c_miss = 1.0;
  double c_fa = 1.0;

  void Validate() const;
};

struct DcfResult {
  double min_dcf = 0.0;
  double threshold = 0.0;  // may be +-infinity
};

// Minimum over the distinct scores and +-infinity of
//   (c_miss P_miss p_target + c_fa P_fa (1 - p_target))
//     / min(c_miss p_target, c_fa (1 - p_target)).
// Ties keep the lowest threshold.
DcfResult ComputeMinDcf(const ScoreSet& set, const DcfParams& params = {});

}  // namespace dtcf::eval

#endif  // DTCF_EVAL_METRICS_H_
