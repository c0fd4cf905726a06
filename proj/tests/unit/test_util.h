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

#ifndef DTCF_TESTS_UNIT_TEST_UTIL_H_
#define DTCF_TESTS_UNIT_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dtcf/autodiff/tensor.h"

namespace dtcf::testing {

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("dtcf_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string ReadBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename T = double>
ad::Tensor<T> RandomTensor(const ad::Shape& shape, std::mt19937_64& rng,
                           double lo = -1.0, double hi = 1.0,
                           bool requires_grad = false) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<T> data(ad::NumElements(shape));
  for (auto& v : data) v = static_cast<T>(dist(rng));
  return ad::Tensor<T>::FromData(shape, std::move(data), requires_grad);
}

// Values bounded away from zero, for checks across relu kinks.
inline ad::Tensor<double> RandomAwayFromZero(const ad::Shape& shape,
                                             std::mt19937_64& rng,
                                             double margin = 0.05) {
  std::uniform_real_distribution<double> dist(margin, 1.0);
  std::bernoulli_distribution sign(0.5);
  std::vector<double> data(ad::NumElements(shape));
  for (auto& v : data) v = sign(rng) ? dist(rng) : -dist(rng);
  return ad::Tensor<double>::FromData(shape, std::move(data));
}

template <typename A, typename B>
double MaxAbsDiff(const std::vector<A>& a, const std::vector<B>& b) {
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(static_cast<double>(a[i]) - b[i]));
  }
  return a.size() == b.size() ? worst : 1e300;
}

// Direct single-map cross-correlation, zero padding.
inline std::vector<double> NaiveConv(const ad::Tensor<double>& x, const ad::Tensor<double>& w, int sh, int sw,
                              int ph, int pw) {
  const int64_t cin = x.dim(0), h = x.dim(1), wd = x.dim(2);
  const int64_t cout = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const int64_t oh = (h + 2 * ph - kh) / sh + 1, ow = (wd + 2 * pw - kw) / sw + 1;
  std::vector<double> y(cout * oh * ow, 0.0);
  for (int64_t o = 0; o < cout; ++o) {
    for (int64_t r = 0; r < oh; ++r) {
      for (int64_t c = 0; c < ow; ++c) {
        double acc = 0.0;
        for (int64_t i = 0; i < cin; ++i)
          for (int64_t u = 0; u < kh; ++u)
            for (int64_t v = 0; v < kw; ++v) {
              const int64_t rr = r * sh - ph + u, cc = c * sw - pw + v;
              if (rr < 0 || rr >= h || cc < 0 || cc >= wd) continue;
              acc += x.at({i, rr, cc}) * w.at({o, i, u, v});
            }
        y[(o * oh + r) * ow + c] = acc;
      }
    }
  }
  return y;
}

}  // namespace dtcf::testing

#endif  // DTCF_TESTS_UNIT_TEST_UTIL_H_
