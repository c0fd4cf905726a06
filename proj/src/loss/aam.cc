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

#include "dtcf/loss/aam.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dtcf/autodiff/ops.h"
#include "dtcf/base/error.h"

namespace dtcf::loss {

using ad::Tensor;

namespace {

template <typename T>
Tensor<T> NormalizeRows(const Tensor<T>& x, const char* what) {
  const int64_t rows = x.dim(0), cols = x.dim(1);
  const auto v = x.data();
  for (int64_t r = 0; r < rows; ++r) {
    double sq = 0.0;
    for (int64_t c = 0; c < cols; ++c) sq += static_cast<double>(v[r * cols + c]) * v[r * cols + c];
    if (!(sq > 0.0)) {
      throw DomainError(std::string("zero-norm ") + what + " row " + std::to_string(r));
    }
  }
  return ad::Div(x, ad::Sqrt(ad::Sum(ad::Square(x), 1, true)));
}

void CheckLabels(const std::vector<int64_t>& labels, int64_t rows, int64_t classes) {
  if (static_cast<int64_t>(labels.size()) != rows) {
    throw DimensionError("got " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(rows) + " rows");
  }
  for (int64_t y : labels) {
    if (y < 0 || y >= classes) {
      throw DimensionError("label " + std::to_string(y) + " outside [0, " +
                           std::to_string(classes) + ")");
    }
  }
}

}  // namespace

template <typename T>
AamHead<T>::AamHead(int64_t num_classes, int64_t embed_dim, double scale,
                    double margin, std::mt19937_64& rng)
    : scale_(scale) {
  if (num_classes < 1 || embed_dim < 1) {
    throw ConfigError("AAM head needs positive class count and embedding size");
  }
  if (!(scale > 0.0)) throw ConfigError("AAM scale must be positive");
  set_margin(margin);
  weight_ = nn::UniformParameter<T>({num_classes, embed_dim},
                                    nn::XavierUniformBound(embed_dim, num_classes), rng);
}

template <typename T>
void AamHead<T>::set_margin(double margin) {
  if (!(margin >= 0.0 && margin < std::numbers::pi / 2)) {
    throw ConfigError("AAM margin must lie in [0, pi/2)");
  }
  margin_ = margin;
}

template <typename T>
void AamHead<T>::CollectParameters(const std::string& prefix,
                                   nn::NamedTensors<T>* out) const {
  out->push_back({prefix + "weight", weight_});
}

template <typename T>
Tensor<T> CosineMatrix(const Tensor<T>& emb, const Tensor<T>& weight) {
  if (emb.rank() != 2 || weight.rank() != 2 || emb.dim(1) != weight.dim(1)) {
    throw DimensionError("cosine matrix of " + ad::ShapeToString(emb.shape()) +
                         " and " + ad::ShapeToString(weight.shape()));
  }
  return ad::MatMul(NormalizeRows(emb, "embedding"), NormalizeRows(weight, "class weight"),
                    false, true);
}

template <typename T>
Tensor<T> AngularMargin(const Tensor<T>& cosines, const std::vector<int64_t>& labels,
                        double scale, double margin) {
  if (cosines.rank() != 2) throw DimensionError("cosines must be [N, K]");
  const int64_t rows = cosines.dim(0), classes = cosines.dim(1);
  CheckLabels(labels, rows, classes);
  const double cos_m = std::cos(margin), sin_m = std::sin(margin);
  const auto c = cosines.data();
  std::vector<T> out(c.size());
  // d logit_y / d cos_y for every row.
  std::vector<double> slope(rows);
  for (size_t i = 0; i < c.size(); ++i) out[i] = static_cast<T>(scale * c[i]);
  for (int64_t r = 0; r < rows; ++r) {
    const int64_t idx = r * classes + labels[r];
    const double cy = std::clamp(static_cast<double>(c[idx]), -1.0, 1.0);
    const double sin_t = std::clamp(std::sqrt(std::max(0.0, 1.0 - cy * cy)), 0.0, 1.0);
    if (std::acos(cy) + margin >= std::numbers::pi) {
      out[idx] = static_cast<T>(-scale);
      slope[r] = 0.0;
    } else {
      out[idx] = static_cast<T>(scale * (cy * cos_m - sin_t * sin_m));
      slope[r] = scale * (cos_m + (sin_t > 0.0 ? cy * sin_m / sin_t : 0.0));
    }
  }
  return Tensor<T>::MakeResult(
      cosines.shape(), std::move(out), {cosines}, "angular_margin",
      [=, slope = std::move(slope)](ad::Node<T>& self) {
        if (!self.inputs[0]->requires_grad) return;
        auto& gc = self.inputs[0]->GradBuffer();
        const auto& g = self.grad;
        for (int64_t r = 0; r < rows; ++r) {
          for (int64_t k = 0; k < classes; ++k) {
            const int64_t idx = r * classes + k;
            const double d = k == labels[r] ? slope[r] : scale;
            gc[idx] += static_cast<T>(d * g[idx]);
          }
        }
      });
}

template <typename T>
Tensor<T> AamLogits(const Tensor<T>& emb, const std::vector<int64_t>& labels,
                    const AamHead<T>& head) {
  const bool single = emb.rank() == 1;
  Tensor<T> rows = single ? ad::Reshape(emb, {1, emb.dim(0)}) : emb;
  Tensor<T> logits = AngularMargin(CosineMatrix(rows, head.weight()), labels,
                                   head.scale(), head.margin());
  return single ? ad::Reshape(logits, {head.num_classes()}) : logits;
}

template <typename T>
Tensor<T> CrossEntropy(const Tensor<T>& logits, const std::vector<int64_t>& labels) {
  const bool single = logits.rank() == 1;
  if (!single && logits.rank() != 2) throw DimensionError("logits must be [K] or [N, K]");
  const int64_t rows = single ? 1 : logits.dim(0);
  const int64_t classes = logits.dim(-1);
  CheckLabels(labels, rows, classes);
  const auto z = logits.data();
  std::vector<T> probs(z.size());
  double total = 0.0;
  for (int64_t r = 0; r < rows; ++r) {
    const T* zr = z.data() + r * classes;
    const double peak = *std::max_element(zr, zr + classes);
    double sum = 0.0;
    for (int64_t k = 0; k < classes; ++k) sum += std::exp(zr[k] - peak);
    for (int64_t k = 0; k < classes; ++k) {
      probs[r * classes + k] = static_cast<T>(std::exp(zr[k] - peak) / sum);
    }
    total += std::log(sum) - (zr[labels[r]] - peak);
  }
  return Tensor<T>::MakeResult(
      {}, {static_cast<T>(total / rows)}, {logits}, "cross_entropy",
      [=, probs = std::move(probs)](ad::Node<T>& self) {
        if (!self.inputs[0]->requires_grad) return;
        auto& gz = self.inputs[0]->GradBuffer();
        const T g = self.grad[0] / static_cast<T>(rows);
        for (int64_t r = 0; r < rows; ++r) {
          for (int64_t k = 0; k < classes; ++k) {
            const int64_t idx = r * classes + k;
            gz[idx] += g * (probs[idx] - (k == labels[r] ? T(1) : T(0)));
          }
        }
      });
}

template <typename T>
double Accuracy(const Tensor<T>& logits, const std::vector<int64_t>& labels) {
  const int64_t rows = logits.rank() == 1 ? 1 : logits.dim(0);
  const int64_t classes = logits.dim(-1);
  CheckLabels(labels, rows, classes);
  const auto z = logits.data();
  int64_t hits = 0;
  for (int64_t r = 0; r < rows; ++r) {
    const T* zr = z.data() + r * classes;
    if (std::max_element(zr, zr + classes) - zr == labels[r]) ++hits;
  }
  return static_cast<double>(hits) / rows;
}

#define DTCF_INSTANTIATE_AAM(T)                                                   \
  template class AamHead<T>;                                                      \
  template Tensor<T> CosineMatrix(const Tensor<T>&, const Tensor<T>&);            \
  template Tensor<T> AngularMargin(const Tensor<T>&, const std::vector<int64_t>&, \
                                   double, double);                               \
  template Tensor<T> AamLogits(const Tensor<T>&, const std::vector<int64_t>&,     \
                               const AamHead<T>&);                                \
  template Tensor<T> CrossEntropy(const Tensor<T>&, const std::vector<int64_t>&); \
  template double Accuracy(const Tensor<T>&, const std::vector<int64_t>&);

DTCF_INSTANTIATE_AAM(float)
DTCF_INSTANTIATE_AAM(double)

#undef DTCF_INSTANTIATE_AAM

}  // namespace dtcf::loss
