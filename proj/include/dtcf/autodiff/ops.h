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

#ifndef DTCF_AUTODIFF_OPS_H_
#define DTCF_AUTODIFF_OPS_H_

#include <utility>
#include <vector>

#include "dtcf/autodiff/tensor.h"

// Differentiable operations. Every function records its backward rule when
// any operand requires gradients and grad mode is on.
namespace dtcf::ad {

// C = op(A) * op(B) for rank-2 operands. With no transposes, a is m x k and
// b is k x n.
template <typename T>
Tensor<T> MatMul(const Tensor<T>& a, const Tensor<T>& b,
                 bool transpose_a = false, bool transpose_b = false);

struct Conv2dOptions {
  int stride_h = 1;
  int stride_w = 1;
  int pad_h = 0;
  int pad_w = 0;
};

// floor((in + 2 * pad - kernel) / stride) + 1. Throws ConfigError when the
// result would be empty or the arguments are non-positive.
int64_t ConvOutputSize(int64_t in, int kernel, int stride, int pad);

// Cross-correlation (no kernel flip) of x [Cin, H, W] or [N, Cin, H, W] with
// kernels [Cout, Cin, kh, kw], zero padding.
template <typename T>
Tensor<T> Conv2d(const Tensor<T>& x, const Tensor<T>& kernels,
                 const Conv2dOptions& options = {});

// Reductions. `axis` may be negative.
template <typename T>
Tensor<T> Sum(const Tensor<T>& x, int axis, bool keepdim = false);
template <typename T>
Tensor<T> Mean(const Tensor<T>& x, int axis, bool keepdim = false);
template <typename T>
Tensor<T> SumAll(const Tensor<T>& x);
template <typename T>
Tensor<T> MeanAll(const Tensor<T>& x);

// Structural operations.
template <typename T>
Tensor<T> Concat(const Tensor<T>& a, const Tensor<T>& b, int axis);
template <typename T>
Tensor<T> Slice(const Tensor<T>& x, int axis, int64_t begin, int64_t end);
// Returns (x[..., :at, ...], x[..., at:, ...]) along `axis`.
template <typename T>
std::pair<Tensor<T>, Tensor<T>> Split(const Tensor<T>& x, int axis,
                                      int64_t at);
template <typename T>
Tensor<T> Reshape(const Tensor<T>& x, const Shape& shape);
template <typename T>
Tensor<T> Permute(const Tensor<T>& x, const std::vector<int>& order);
// Stacks equally shaped tensors along a new leading axis.
template <typename T>
Tensor<T> Stack(const std::vector<Tensor<T>>& items);
// x[index] along the leading axis.
template <typename T>
Tensor<T> Select(const Tensor<T>& x, int64_t index);

// Pointwise unary operations.
template <typename T>
Tensor<T> Relu(const Tensor<T>& x);
template <typename T>
Tensor<T> Sigmoid(const Tensor<T>& x);
template <typename T>
Tensor<T> Tanh(const Tensor<T>& x);
template <typename T>
Tensor<T> Sqrt(const Tensor<T>& x);
template <typename T>
Tensor<T> Log(const Tensor<T>& x);
template <typename T>
Tensor<T> Exp(const Tensor<T>& x);
template <typename T>
Tensor<T> Square(const Tensor<T>& x);
template <typename T>
Tensor<T> Scale(const Tensor<T>& x, T alpha);
template <typename T>
Tensor<T> AddScalar(const Tensor<T>& x, T c);

// Pointwise binary operations. Operands must have equal rank; each axis
// either matches or is 1 on one side (singleton stretching only).
Shape BroadcastShape(const Shape& a, const Shape& b);

template <typename T>
Tensor<T> Add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> Sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> Mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> Div(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> Softmax(const Tensor<T>& x, int axis);

}  // namespace dtcf::ad

#endif  // DTCF_AUTODIFF_OPS_H_
