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

#include <cmath>
#include <random>

#include "dtcf/autodiff/grad_check.h"
#include "dtcf/autodiff/ops.h"
#include "dtcf/base/error.h"
#include "dtcf/nn/layers.h"
#include "test_util.h"

namespace dtcf::nn {
namespace {

using ad::Shape;
using testing::MaxAbsDiff;
using testing::RandomTensor;
using TensorD = ad::Tensor<double>;

TEST(Conv2dLayerTest, PointwiseUnitKernelIsIdentity) {
  std::mt19937_64 rng(1);
  Conv2dLayer<double> conv(1, 1, 1, 1, {}, true, rng);
  conv.kernels().mutable_data()[0] = 1.0;
  auto x = RandomTensor({1, 3, 4}, rng);
  EXPECT_EQ(conv.Forward(x).ToVector(), x.ToVector());
}

TEST(Conv2dLayerTest, BiasOnlyGivesConstantChannels) {
  std::mt19937_64 rng(2);
  Conv2dLayer<double> conv(2, 3, 3, 3, {1, 1, 1, 1}, true, rng);
  for (auto& v : conv.kernels().mutable_data()) v = 0.0;
  conv.bias().Assign(std::vector<double>{0.5, -1.0, 2.0});
  auto y = conv.Forward(RandomTensor({2, 4, 5}, rng));
  ASSERT_EQ(y.shape(), (Shape{3, 4, 5}));
  for (int64_t c = 0; c < 3; ++c)
    for (int64_t t = 0; t < 4; ++t)
      for (int64_t f = 0; f < 5; ++f) EXPECT_EQ(y.at({c, t, f}), conv.bias().data()[c]);
}

TEST(Conv2dLayerTest, MatchesNestedLoopPlusBias) {
  std::mt19937_64 rng(3);
  Conv2dLayer<double> conv(2, 3, 3, 3, {2, 1, 1, 1}, true, rng);
  auto bias = RandomTensor({3}, rng);
  conv.bias().Assign(bias.data());
  auto x = RandomTensor({2, 7, 5}, rng);
  auto y = conv.Forward(x);
  const auto& w = conv.kernels();
  std::vector<double> expect;
  for (int64_t o = 0; o < 3; ++o)
    for (int64_t r = 0; r < 4; ++r)
      for (int64_t c = 0; c < 5; ++c) {
        double acc = bias.data()[o];
        for (int64_t i = 0; i < 2; ++i)
          for (int64_t u = 0; u < 3; ++u)
            for (int64_t v = 0; v < 3; ++v) {
              const int64_t rr = 2 * r - 1 + u, cc = c - 1 + v;
              if (rr >= 0 && rr < 7 && cc >= 0 && cc < 5) {
                acc += x.at({i, rr, cc}) * w.at({o, i, u, v});
              }
            }
        expect.push_back(acc);
      }
  EXPECT_LT(MaxAbsDiff(y.ToVector(), expect), 1e-6);
}

TEST(Conv2dLayerTest, ChannelMismatchThrows) {
  std::mt19937_64 rng(4);
  Conv2dLayer<double> conv(2, 3, 3, 3, {1, 1, 1, 1}, false, rng);
  EXPECT_THROW(conv.Forward(TensorD::Zeros({3, 4, 4})), DimensionError);
}

TEST(Conv2dLayerTest, HeUniformInitIsBounded) {
  std::mt19937_64 rng(5);
  Conv2dLayer<float> conv(8, 16, 3, 3, {1, 1, 1, 1}, false, rng);
  const double bound = std::sqrt(6.0 / 72.0);
  double peak = 0.0;
  for (float v : conv.kernels().data()) peak = std::max(peak, std::abs(double(v)));
  EXPECT_LE(peak, bound);
  EXPECT_GT(peak, 0.8 * bound);
}

// Output sizes of the quarter-width ResNet34 stages for an L = 200 input.
TEST(Conv2dLayerTest, OutputShapesFollowClosedForm) {
  struct Row {
    int64_t t, f;
    int sh, sw;
    int64_t want_t, want_f;
  };
  const Row rows[] = {{200, 80, 1, 1, 200, 80},
                      {200, 80, 1, 2, 200, 40},
                      {200, 40, 2, 2, 100, 20},
                      {100, 20, 2, 2, 50, 10}};
  std::mt19937_64 rng(6);
  for (const Row& r : rows) {
    Conv2dLayer<float> conv(1, 2, 3, 3, {r.sh, r.sw, 1, 1}, false, rng);
    auto y = conv.Forward(ad::Tensor<float>::Zeros({1, r.t, r.f}));
    EXPECT_EQ(y.dim(1), (r.t + 2 - 3) / r.sh + 1);
    EXPECT_EQ(y.dim(1), r.want_t);
    EXPECT_EQ(y.dim(2), r.want_f);
  }
}

TEST(BatchNormTest, EvalWithUnitStatsScalesByEpsilon) {
  std::mt19937_64 rng(7);
  BatchNorm2d<double> bn(3);
  bn.set_training(false);
  auto x = RandomTensor({2, 3, 4, 5}, rng);
  auto y = bn.Forward(x);
  for (int64_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(y.data()[i], x.data()[i] / std::sqrt(1.0 + 1e-5), 1e-15);
  }
}

TEST(BatchNormTest, TrainOutputIsStandardized) {
  std::mt19937_64 rng(8);
  BatchNorm2d<double> bn(4);
  auto x = RandomTensor({3, 4, 5, 6}, rng, -20, 40);
  auto y = bn.Forward(x);
  for (int64_t c = 0; c < 4; ++c) {
    double s = 0, sq = 0;
    int64_t n = 0;
    for (int64_t b = 0; b < 3; ++b)
      for (int64_t i = 0; i < 5; ++i)
        for (int64_t j = 0; j < 6; ++j) {
          const double v = y.at({b, c, i, j});
          s += v;
          sq += v * v;
          ++n;
        }
    EXPECT_NEAR(s / n, 0.0, 1e-5);
    EXPECT_NEAR(sq / n - (s / n) * (s / n), 1.0, 1e-5);
  }
}

TEST(BatchNormTest, RunningStatsFollowMomentumBlend) {
  BatchNorm2d<double> bn(1, 0.1, 1e-5);
  // Channel values {1, 2, 3, 4, 5, 6}: mean 3.5, unbiased variance 3.5.
  auto x = TensorD::FromData({2, 1, 1, 3}, {1, 2, 3, 4, 5, 6});
  bn.Forward(x);
  EXPECT_NEAR(bn.running_mean().data()[0], 0.9 * 0.0 + 0.1 * 3.5, 1e-15);
  EXPECT_NEAR(bn.running_var().data()[0], 0.9 * 1.0 + 0.1 * 3.5, 1e-15);
  bn.Forward(x);
  EXPECT_NEAR(bn.running_mean().data()[0], 0.9 * 0.35 + 0.1 * 3.5, 1e-15);
}

TEST(BatchNormTest, TrainModeRejectsSingleSample) {
  BatchNorm2d<double> bn(2);
  EXPECT_THROW(bn.Forward(TensorD::Zeros({1, 2, 3, 3})), ConfigError);
  EXPECT_THROW(bn.Forward(TensorD::Zeros({2, 3, 3})), ConfigError);
  bn.set_training(false);
  EXPECT_NO_THROW(bn.Forward(TensorD::Zeros({2, 3, 3})));
}

TEST(BatchNormTest, EvalIsPureFunctionOfInputAndStats) {
  std::mt19937_64 rng(9);
  BatchNorm2d<double> bn(3);
  bn.Forward(RandomTensor({2, 3, 4, 4}, rng));  // populate running stats
  bn.set_training(false);
  const auto mean_before = bn.running_mean().ToVector();
  auto x = RandomTensor({2, 3, 4, 4}, rng);
  auto y1 = bn.Forward(x);
  auto y2 = bn.Forward(x);
  EXPECT_EQ(y1.ToVector(), y2.ToVector());
  EXPECT_EQ(bn.running_mean().ToVector(), mean_before);
}

TEST(LinearTest, IdentityAndBias) {
  std::mt19937_64 rng(10);
  Linear<double> lin(3, 3, true, rng);
  lin.weight().Assign(std::vector<double>{1, 0, 0, 0, 1, 0, 0, 0, 1});
  auto x = RandomTensor({3}, rng);
  EXPECT_EQ(lin.Forward(x).ToVector(), x.ToVector());
  for (auto& v : lin.weight().mutable_data()) v = 0.0;
  lin.bias().Assign(std::vector<double>{1, 2, 3});
  EXPECT_EQ(lin.Forward(x).ToVector(), (std::vector<double>{1, 2, 3}));
}

TEST(LinearTest, MatchesLoopOracle) {
  std::mt19937_64 rng(11);
  Linear<double> lin(5, 4, true, rng);
  lin.bias().Assign(RandomTensor({4}, rng).data());
  auto x = RandomTensor({2, 5}, rng);
  std::vector<double> expect;
  for (int64_t n = 0; n < 2; ++n)
    for (int64_t o = 0; o < 4; ++o) {
      double acc = lin.bias().data()[o];
      for (int64_t i = 0; i < 5; ++i) acc += lin.weight().at({o, i}) * x.at({n, i});
      expect.push_back(acc);
    }
  EXPECT_LT(MaxAbsDiff(lin.Forward(x).ToVector(), expect), 1e-6);
  EXPECT_THROW(lin.Forward(TensorD::Zeros({4})), DimensionError);
}

TEST(GradCheckTest, LayersPassAt64Bit) {
  std::mt19937_64 rng(12);
  Conv2dLayer<double> conv(2, 3, 3, 3, {2, 1, 1, 1}, true, rng);
  BatchNorm2d<double> bn(3);
  bn.gamma().Assign(RandomTensor({3}, rng, 0.5, 1.5).data());
  bn.beta().Assign(RandomTensor({3}, rng).data());
  Linear<double> lin(3 * 3 * 4, 5, true, rng);
  auto x = RandomTensor({2, 2, 6, 4}, rng);
  auto probe = RandomTensor({2, 5}, rng, 0.5, 1.5);
  for (bool training : {true, false}) {
    bn.set_training(training);
    auto f = [&](const std::vector<TensorD>& in) {
      auto h = bn.Forward(conv.Forward(in[0]));
      auto e = lin.Forward(ad::Reshape(ad::Tanh(h), {2, 36}));
      return ad::SumAll(ad::Mul(ad::Sigmoid(e), probe));
    };
    std::vector<TensorD> inputs = {x, conv.kernels(), bn.gamma(), bn.beta(),
                                   lin.weight(), lin.bias()};
    // Batch statistics cancel a per-channel bias, so its true gradient is 0.
    if (!training) inputs.push_back(conv.bias());
    auto r = ad::GradCheck(f, inputs);
    EXPECT_LT(r.max_rel_error, 1e-6) << "training=" << training << " " << r.Describe();
  }
}

}  // namespace
}  // namespace dtcf::nn
