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

// Additive angular margin softmax.
//
//   cos_k  = <e / |e|, w_k / |w_k|>
//   logit_k = s cos_k                      k != y
//   logit_y = s cos(min(theta_y + m, pi))  theta_y = acos(cos_y)
//
// cos(theta + m) is evaluated as cos(theta) cos(m) - sin(theta) sin(m) with
// sin(theta) = sqrt(1 - cos^2) clamped to [0, 1].

#ifndef DTCF_LOSS_AAM_H_
#define DTCF_LOSS_AAM_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dtcf/autodiff/tensor.h"
#include "dtcf/nn/parameter.h"

namespace dtcf::loss {

template <typename T>
class AamHead {
 public:
  AamHead() = default;
  AamHead(int64_t num_classes, int64_t embed_dim, double scale, double margin,
          std::mt19937_64& rng);

  void CollectParameters(const std::string& prefix, nn::NamedTensors<T>* out) const;

  int64_t num_classes() const { return weight_.dim(0); }
  int64_t embed_dim() const { return weight_.dim(1); }
  double scale() const { return scale_; }
  double margin() const { return margin_; }
  void set_margin(double margin);
  ad::Tensor<T>& weight() { return weight_; }
  const ad::Tensor<T>& weight() const { return weight_; }

 private:
  ad::Tensor<T> weight_;  // [K, D], not stored normalized
  double scale_ = 30.0;
  double margin_ = 0.2;
};

// Row-wise cosine similarities between embeddings [N, D] and class weights
// [K, D] -> [N, K]. Throws DomainError on a zero-norm row.
template <typename T>
ad::Tensor<T> CosineMatrix(const ad::Tensor<T>& emb, const ad::Tensor<T>& weight);

// emb: [D] or [N, D]; labels: one per row. Returns [K] or [N, K].
template <typename T>
ad::Tensor<T> AamLogits(const ad::Tensor<T>& emb, const std::vector<int64_t>& labels,
                        const AamHead<T>& head);

// Scales cosines [N, K] by s and applies the margin to each row's label
// column.
template <typename T>
ad::Tensor<T> AngularMargin(const ad::Tensor<T>& cosines,
                            const std::vector<int64_t>& labels, double scale,
                            double margin);

// Mean over rows of -log softmax(logits)[label]; logits [K] or [N, K].
template <typename T>
ad::Tensor<T> CrossEntropy(const ad::Tensor<T>& logits, const std::vector<int64_t>& labels);

// Fraction of rows whose argmax equals the label.
template <typename T>
double Accuracy(const ad::Tensor<T>& logits, const std::vector<int64_t>& labels);

}  // namespace dtcf::loss

#endif  // DTCF_LOSS_AAM_H_
