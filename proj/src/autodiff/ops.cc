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

#include "dtcf/autodiff/ops.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dtcf/base/error.h"

namespace dtcf::ad {

namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMatrix = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMapMatrix = Eigen::Map<const RowMatrix<T>>;

// Gradient buffer of input `i` when it participates in differentiation,
// nullptr otherwise.
template <typename T>
T* InputGrad(Node<T>& self, size_t i) {
  Node<T>& in = *self.inputs[i];
  if (!in.requires_grad) return nullptr;
  return in.GradBuffer().data();
}

template <typename T>
const std::vector<T>& InputValue(const Node<T>& self, size_t i) {
  return self.inputs[i]->value;
}

// Views a tensor as [outer, len, inner] around `axis`.
struct AxisView {
  int64_t outer = 1;
  int64_t len = 1;
  int64_t inner = 1;
};

AxisView ViewAround(const Shape& shape, int axis) {
  AxisView v;
  for (int i = 0; i < axis; ++i) v.outer *= shape[i];
  v.len = shape[axis];
  for (size_t i = axis + 1; i < shape.size(); ++i) v.inner *= shape[i];
  return v;
}

std::vector<int64_t> RowMajorStrides(const Shape& shape) {
  std::vector<int64_t> strides(shape.size(), 1);
  for (int i = static_cast<int>(shape.size()) - 2; i >= 0; --i) {
    strides[i] = strides[i + 1] * shape[i + 1];
  }
  return strides;
}

// Strides of `in` when read at the indices of `out`; broadcast axes get 0.
std::vector<int64_t> BroadcastStrides(const Shape& in, const Shape& out) {
  std::vector<int64_t> strides = RowMajorStrides(in);
  for (size_t i = 0; i < in.size(); ++i) {
    if (in[i] == 1 && out[i] != 1) strides[i] = 0;
  }
  return strides;
}

// Calls fn(out_index, a_index, b_index) for every element of `out`.
template <typename Fn>
void ForEachBroadcast(const Shape& out, const std::vector<int64_t>& sa,
                      const std::vector<int64_t>& sb, Fn&& fn) {
  const int rank = static_cast<int>(out.size());
  const int64_t total = NumElements(out);
  if (total == 0) return;
  if (rank == 0) {
    fn(0, 0, 0);
    return;
  }
  std::vector<int64_t> idx(rank, 0);
  const int64_t inner = out[rank - 1];
  const int64_t ia_step = sa[rank - 1];
  const int64_t ib_step = sb[rank - 1];
  int64_t o = 0;
  while (o < total) {
    int64_t ia = 0, ib = 0;
    for (int d = 0; d < rank - 1; ++d) {
      ia += idx[d] * sa[d];
      ib += idx[d] * sb[d];
    }
    for (int64_t j = 0; j < inner; ++j, ++o) {
      fn(o, ia + j * ia_step, ib + j * ib_step);
    }
    for (int d = rank - 2; d >= 0; --d) {
      if (++idx[d] < out[d]) break;
      idx[d] = 0;
    }
  }
}

template <typename T, typename Forward, typename Backward>
Tensor<T> UnaryOp(const Tensor<T>& x, const char* name, Forward forward,
                  Backward backward_factor) {
  const auto& xv = x.data();
  std::vector<T> out(xv.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = forward(xv[i]);
  return Tensor<T>::MakeResult(
      x.shape(), std::move(out), {x}, name,
      [backward_factor](Node<T>& self) {
        T* gx = InputGrad(self, 0);
        if (!gx) return;
        const auto& xin = InputValue(self, 0);
        for (size_t i = 0; i < self.grad.size(); ++i) {
          gx[i] += self.grad[i] * backward_factor(xin[i], self.value[i]);
        }
      });
}

enum class BinaryKind { kAdd, kSub, kMul, kDiv };

const char* BinaryName(BinaryKind kind) {
  switch (kind) {
    case BinaryKind::kAdd:
      return "add";
    case BinaryKind::kSub:
      return "sub";
    case BinaryKind::kMul:
      return "mul";
    case BinaryKind::kDiv:
      return "div";
  }
  return "binary";
}

template <typename T>
Tensor<T> BinaryOp(const Tensor<T>& a, const Tensor<T>& b, BinaryKind kind) {
  const Shape out_shape = BroadcastShape(a.shape(), b.shape());
  const auto sa = BroadcastStrides(a.shape(), out_shape);
  const auto sb = BroadcastStrides(b.shape(), out_shape);
  const auto& av = a.data();
  const auto& bv = b.data();
  std::vector<T> out(NumElements(out_shape));
  if (kind == BinaryKind::kDiv) {
    for (T v : bv) {
      if (v == T(0)) throw DomainError("division by zero");
    }
  }
  ForEachBroadcast(out_shape, sa, sb, [&](int64_t o, int64_t i, int64_t j) {
    switch (kind) {
      case BinaryKind::kAdd:
        out[o] = av[i] + bv[j];
        break;
      case BinaryKind::kSub:
        out[o] = av[i] - bv[j];
        break;
      case BinaryKind::kMul:
        out[o] = av[i] * bv[j];
        break;
      case BinaryKind::kDiv:
        out[o] = av[i] / bv[j];
        break;
    }
  });
  return Tensor<T>::MakeResult(
      out_shape, std::move(out), {a, b}, BinaryName(kind),
      [out_shape, sa, sb, kind](Node<T>& self) {
        T* ga = InputGrad(self, 0);
        T* gb = InputGrad(self, 1);
        const auto& x = InputValue(self, 0);
        const auto& y = InputValue(self, 1);
        const auto& g = self.grad;
        ForEachBroadcast(out_shape, sa, sb, [&](int64_t o, int64_t i, int64_t j) {
          switch (kind) {
            case BinaryKind::kAdd:
              if (ga) ga[i] += g[o];
              if (gb) gb[j] += g[o];
              break;
            case BinaryKind::kSub:
              if (ga) ga[i] += g[o];
              if (gb) gb[j] -= g[o];
              break;
            case BinaryKind::kMul:
              if (ga) ga[i] += g[o] * y[j];
              if (gb) gb[j] += g[o] * x[i];
              break;
            case BinaryKind::kDiv:
              if (ga) ga[i] += g[o] / y[j];
              if (gb) gb[j] -= g[o] * x[i] / (y[j] * y[j]);
              break;
          }
        });
      });
}

template <typename T>
void Im2Col(const T* x, int64_t channels, int64_t height, int64_t width,
            int kh, int kw, const Conv2dOptions& opt, int64_t out_h,
            int64_t out_w, T* cols) {
  for (int64_t c = 0; c < channels; ++c) {
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj) {
        T* row = cols + ((c * kh + ki) * kw + kj) * out_h * out_w;
        for (int64_t oh = 0; oh < out_h; ++oh) {
          const int64_t ih = oh * opt.stride_h - opt.pad_h + ki;
          T* dst = row + oh * out_w;
          if (ih < 0 || ih >= height) {
            std::fill(dst, dst + out_w, T(0));
            continue;
          }
          const T* src = x + (c * height + ih) * width;
          for (int64_t ow = 0; ow < out_w; ++ow) {
            const int64_t iw = ow * opt.stride_w - opt.pad_w + kj;
            dst[ow] = (iw < 0 || iw >= width) ? T(0) : src[iw];
          }
        }
      }
    }
  }
}

template <typename T>
void Col2Im(const T* cols, int64_t channels, int64_t height, int64_t width,
            int kh, int kw, const Conv2dOptions& opt, int64_t out_h,
            int64_t out_w, T* dx) {
  for (int64_t c = 0; c < channels; ++c) {
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj) {
        const T* row = cols + ((c * kh + ki) * kw + kj) * out_h * out_w;
        for (int64_t oh = 0; oh < out_h; ++oh) {
          const int64_t ih = oh * opt.stride_h - opt.pad_h + ki;
          if (ih < 0 || ih >= height) continue;
          const T* src = row + oh * out_w;
          T* dst = dx + (c * height + ih) * width;
          for (int64_t ow = 0; ow < out_w; ++ow) {
            const int64_t iw = ow * opt.stride_w - opt.pad_w + kj;
            if (iw >= 0 && iw < width) dst[iw] += src[ow];
          }
        }
      }
    }
  }
}

}  // namespace

Shape BroadcastShape(const Shape& a, const Shape& b) {
  if (a.size() != b.size()) {
    throw DimensionError("cannot broadcast " + ShapeToString(a) + " with " +
                         ShapeToString(b) + ": rank differs");
  }
  Shape out(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i] || b[i] == 1) {
      out[i] = a[i];
    } else if (a[i] == 1) {
      out[i] = b[i];
    } else {
      throw DimensionError("cannot broadcast " + ShapeToString(a) + " with " +
                           ShapeToString(b));
    }
  }
  return out;
}

template <typename T>
Tensor<T> MatMul(const Tensor<T>& a, const Tensor<T>& b, bool transpose_a,
                 bool transpose_b) {
  if (a.rank() != 2 || b.rank() != 2) {
    throw DimensionError("matmul expects rank-2 operands, got " +
                         ShapeToString(a.shape()) + " and " +
                         ShapeToString(b.shape()));
  }
  const int64_t m = transpose_a ? a.dim(1) : a.dim(0);
  const int64_t k = transpose_a ? a.dim(0) : a.dim(1);
  const int64_t kb = transpose_b ? b.dim(1) : b.dim(0);
  const int64_t n = transpose_b ? b.dim(0) : b.dim(1);
  if (k != kb) {
    throw DimensionError("matmul inner dimensions differ: " +
                         ShapeToString(a.shape()) + " vs " +
                         ShapeToString(b.shape()));
  }
  std::vector<T> out(m * n);
  {
    ConstMapMatrix<T> am(a.data().data(), a.dim(0), a.dim(1));
    ConstMapMatrix<T> bm(b.data().data(), b.dim(0), b.dim(1));
    MapMatrix<T> cm(out.data(), m, n);
    if (!transpose_a && !transpose_b) {
      cm.noalias() = am * bm;
    } else if (!transpose_a) {
      cm.noalias() = am * bm.transpose();
    } else if (!transpose_b) {
      cm.noalias() = am.transpose() * bm;
    } else {
      cm.noalias() = am.transpose() * bm.transpose();
    }
  }
  const Shape a_shape = a.shape();
  const Shape b_shape = b.shape();
  return Tensor<T>::MakeResult(
      {m, n}, std::move(out), {a, b}, "matmul",
      [=](Node<T>& self) {
        ConstMapMatrix<T> dc(self.grad.data(), m, n);
        ConstMapMatrix<T> am(InputValue(self, 0).data(), a_shape[0], a_shape[1]);
        ConstMapMatrix<T> bm(InputValue(self, 1).data(), b_shape[0], b_shape[1]);
        if (T* ga = InputGrad(self, 0)) {
          MapMatrix<T> da(ga, a_shape[0], a_shape[1]);
          if (!transpose_a && !transpose_b) {
            da.noalias() += dc * bm.transpose();
          } else if (!transpose_a) {
            da.noalias() += dc * bm;
          } else if (!transpose_b) {
            da.noalias() += bm * dc.transpose();
          } else {
            da.noalias() += bm.transpose() * dc.transpose();
          }
        }
        if (T* gb = InputGrad(self, 1)) {
          MapMatrix<T> db(gb, b_shape[0], b_shape[1]);
          if (!transpose_a && !transpose_b) {
            db.noalias() += am.transpose() * dc;
          } else if (!transpose_a) {
            db.noalias() += dc.transpose() * am;
          } else if (!transpose_b) {
            db.noalias() += am * dc;
          } else {
            db.noalias() += dc.transpose() * am.transpose();
          }
        }
      });
}

int64_t ConvOutputSize(int64_t in, int kernel, int stride, int pad) {
  if (kernel < 1 || stride < 1 || pad < 0) {
    throw ConfigError("conv2d requires kernel >= 1, stride >= 1, padding >= 0");
  }
  const int64_t span = in + 2 * pad - kernel;
  if (span < 0) {
    throw ConfigError("conv2d kernel " + std::to_string(kernel) +
                      " larger than padded input " + std::to_string(in + 2 * pad));
  }
  return span / stride + 1;
}

template <typename T>
Tensor<T> Conv2d(const Tensor<T>& x, const Tensor<T>& kernels,
                 const Conv2dOptions& opt) {
  if (kernels.rank() != 4) {
    throw DimensionError("conv2d kernels must be [Cout, Cin, kh, kw], got " +
                         ShapeToString(kernels.shape()));
  }
  if (x.rank() != 3 && x.rank() != 4) {
    throw DimensionError("conv2d input must be [Cin, H, W] or [N, Cin, H, W], got " +
                         ShapeToString(x.shape()));
  }
  const bool batched = x.rank() == 4;
  const int64_t batch = batched ? x.dim(0) : 1;
  const int64_t cin = x.dim(-3), height = x.dim(-2), width = x.dim(-1);
  const int64_t cout = kernels.dim(0);
  const int kh = static_cast<int>(kernels.dim(2));
  const int kw = static_cast<int>(kernels.dim(3));
  if (kernels.dim(1) != cin) {
    throw DimensionError("conv2d channel mismatch: input has " +
                         std::to_string(cin) + ", kernels expect " +
                         std::to_string(kernels.dim(1)));
  }
  const int64_t out_h = ConvOutputSize(height, kh, opt.stride_h, opt.pad_h);
  const int64_t out_w = ConvOutputSize(width, kw, opt.stride_w, opt.pad_w);
  const int64_t patch = cin * kh * kw;
  const int64_t positions = out_h * out_w;
  const bool pointwise = kh == 1 && kw == 1 && opt.stride_h == 1 &&
                         opt.stride_w == 1 && opt.pad_h == 0 && opt.pad_w == 0;

  Shape out_shape = batched ? Shape{batch, cout, out_h, out_w}
                            : Shape{cout, out_h, out_w};
  std::vector<T> out(batch * cout * positions);
  std::vector<T> cols(pointwise ? 0 : patch * positions);
  ConstMapMatrix<T> w(kernels.data().data(), cout, patch);
  for (int64_t n = 0; n < batch; ++n) {
    const T* xn = x.data().data() + n * cin * height * width;
    const T* src = xn;
    if (!pointwise) {
      Im2Col(xn, cin, height, width, kh, kw, opt, out_h, out_w, cols.data());
      src = cols.data();
    }
    ConstMapMatrix<T> colm(src, patch, positions);
    MapMatrix<T> y(out.data() + n * cout * positions, cout, positions);
    y.noalias() = w * colm;
  }

  return Tensor<T>::MakeResult(
      out_shape, std::move(out), {x, kernels}, "conv2d",
      [=](Node<T>& self) {
        T* gx = InputGrad(self, 0);
        T* gw = InputGrad(self, 1);
        const auto& xv = InputValue(self, 0);
        ConstMapMatrix<T> wm(InputValue(self, 1).data(), cout, patch);
        std::vector<T> colbuf(pointwise ? 0 : patch * positions);
        std::vector<T> dcols(pointwise ? 0 : patch * positions);
        for (int64_t n = 0; n < batch; ++n) {
          ConstMapMatrix<T> dy(self.grad.data() + n * cout * positions, cout,
                               positions);
          const T* xn = xv.data() + n * cin * height * width;
          if (gw) {
            const T* src = xn;
            if (!pointwise) {
              Im2Col(xn, cin, height, width, kh, kw, opt, out_h, out_w,
                     colbuf.data());
              src = colbuf.data();
            }
            ConstMapMatrix<T> colm(src, patch, positions);
            MapMatrix<T> dw(gw, cout, patch);
            dw.noalias() += dy * colm.transpose();
          }
          if (gx) {
            T* dxn = gx + n * cin * height * width;
            if (pointwise) {
              MapMatrix<T> dxm(dxn, cin, positions);
              dxm.noalias() += wm.transpose() * dy;
            } else {
              MapMatrix<T> dc(dcols.data(), patch, positions);
              dc.noalias() = wm.transpose() * dy;
              Col2Im(dcols.data(), cin, height, width, kh, kw, opt, out_h, out_w,
                     dxn);
            }
          }
        }
      });
}

template <typename T>
Tensor<T> Sum(const Tensor<T>& x, int axis, bool keepdim) {
  const int ax = NormalizeAxis(axis, x.rank());
  const AxisView v = ViewAround(x.shape(), ax);
  Shape out_shape = x.shape();
  if (keepdim) {
    out_shape[ax] = 1;
  } else {
    out_shape.erase(out_shape.begin() + ax);
  }
  const auto& xv = x.data();
  std::vector<T> out(v.outer * v.inner, T(0));
  for (int64_t o = 0; o < v.outer; ++o) {
    for (int64_t k = 0; k < v.len; ++k) {
      const T* src = xv.data() + (o * v.len + k) * v.inner;
      T* dst = out.data() + o * v.inner;
      for (int64_t i = 0; i < v.inner; ++i) dst[i] += src[i];
    }
  }
  return Tensor<T>::MakeResult(
      out_shape, std::move(out), {x}, "sum", [v](Node<T>& self) {
        T* gx = InputGrad(self, 0);
        if (!gx) return;
        for (int64_t o = 0; o < v.outer; ++o) {
          const T* g = self.grad.data() + o * v.inner;
          for (int64_t k = 0; k < v.len; ++k) {
            T* dst = gx + (o * v.len + k) * v.inner;
            for (int64_t i = 0; i < v.inner; ++i) dst[i] += g[i];
          }
        }
      });
}

template <typename T>
Tensor<T> Mean(const Tensor<T>& x, int axis, bool keepdim) {
  const int ax = NormalizeAxis(axis, x.rank());
  const int64_t len = x.dim(ax);
  if (len == 0) throw DimensionError("mean over an empty axis");
  const AxisView v = ViewAround(x.shape(), ax);
  Shape out_shape = x.shape();
  if (keepdim) {
    out_shape[ax] = 1;
  } else {
    out_shape.erase(out_shape.begin() + ax);
  }
  const auto& xv = x.data();
  const T inv = T(1) / static_cast<T>(len);
  std::vector<T> out(v.outer * v.inner, T(0));
  for (int64_t o = 0; o < v.outer; ++o) {
    T* dst = out.data() + o * v.inner;
    for (int64_t k = 0; k < v.len; ++k) {
      const T* src = xv.data() + (o * v.len + k) * v.inner;
      for (int64_t i = 0; i < v.inner; ++i) dst[i] += src[i];
    }
    for (int64_t i = 0; i < v.inner; ++i) dst[i] *= inv;
  }
  return Tensor<T>::MakeResult(
      out_shape, std::move(out), {x}, "mean", [v, inv](Node<T>& self) {
        T* gx = InputGrad(self, 0);
        if (!gx) return;
        for (int64_t o = 0; o < v.outer; ++o) {
          const T* g = self.grad.data() + o * v.inner;
          for (int64_t k = 0; k < v.len; ++k) {
            T* dst = gx + (o * v.len + k) * v.inner;
            for (int64_t i = 0; i < v.inner; ++i) dst[i] += g[i] * inv;
          }
        }
      });
}

template <typename T>
Tensor<T> SumAll(const Tensor<T>& x) {
  T total = std::accumulate(x.data().begin(), x.data().end(), T(0));
  return Tensor<T>::MakeResult({}, {total}, {x}, "sum_all", [](Node<T>& self) {
    T* gx = InputGrad(self, 0);
    if (!gx) return;
    const size_t n = self.inputs[0]->value.size();
    for (size_t i = 0; i < n; ++i) gx[i] += self.grad[0];
  });
}

template <typename T>
Tensor<T> MeanAll(const Tensor<T>& x) {
  if (x.size() == 0) throw DimensionError("mean of an empty tensor");
  return Scale(SumAll(x), T(1) / static_cast<T>(x.size()));
}

template <typename T>
Tensor<T> Concat(const Tensor<T>& a, const Tensor<T>& b, int axis) {
  if (a.rank() != b.rank()) {
    throw DimensionError("concat rank mismatch: " + ShapeToString(a.shape()) +
                         " vs " + ShapeToString(b.shape()));
  }
  const int ax = NormalizeAxis(axis, a.rank());
  for (int i = 0; i < a.rank(); ++i) {
    if (i != ax && a.dim(i) != b.dim(i)) {
      throw DimensionError("concat dimension mismatch: " +
                           ShapeToString(a.shape()) + " vs " +
                           ShapeToString(b.shape()));
    }
  }
  const AxisView va = ViewAround(a.shape(), ax);
  const AxisView vb = ViewAround(b.shape(), ax);
  Shape out_shape = a.shape();
  out_shape[ax] += b.dim(ax);
  const int64_t row_a = va.len * va.inner;
  const int64_t row_b = vb.len * vb.inner;
  std::vector<T> out(NumElements(out_shape));
  for (int64_t o = 0; o < va.outer; ++o) {
    std::copy_n(a.data().data() + o * row_a, row_a, out.data() + o * (row_a + row_b));
    std::copy_n(b.data().data() + o * row_b, row_b,
                out.data() + o * (row_a + row_b) + row_a);
  }
  const int64_t outer = va.outer;
  return Tensor<T>::MakeResult(
      out_shape, std::move(out), {a, b}, "concat",
      [outer, row_a, row_b](Node<T>& self) {
        T* ga = InputGrad(self, 0);
        T* gb = InputGrad(self, 1);
        for (int64_t o = 0; o < outer; ++o) {
          const T* g = self.grad.data() + o * (row_a + row_b);
          if (ga) {
            for (int64_t i = 0; i < row_a; ++i) ga[o * row_a + i] += g[i];
          }
          if (gb) {
            for (int64_t i = 0; i < row_b; ++i) gb[o * row_b + i] += g[row_a + i];
          }
        }
      });
}

template <typename T>
Tensor<T> Slice(const Tensor<T>& x, int axis, int64_t begin, int64_t end) {
  const int ax = NormalizeAxis(axis, x.rank());
  if (begin < 0 || end > x.dim(ax) || begin >= end) {
    throw DimensionError("slice [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") out of range for axis of length " +
                         std::to_string(x.dim(ax)));
  }
  const AxisView v = ViewAround(x.shape(), ax);
  Shape out_shape = x.shape();
  out_shape[ax] = end - begin;
  const int64_t in_row = v.len * v.inner;
  const int64_t out_row = (end - begin) * v.inner;
  const int64_t offset = begin * v.inner;
  std::vector<T> out(v.outer * out_row);
  for (int64_t o = 0; o < v.outer; ++o) {
    std::copy_n(x.data().data() + o * in_row + offset, out_row,
                out.data() + o * out_row);
  }
  const int64_t outer = v.outer;
  return Tensor<T>::MakeResult(
      out_shape, std::move(out), {x}, "slice",
      [outer, in_row, out_row, offset](Node<T>& self) {
        T* gx = InputGrad(self, 0);
        if (!gx) return;
        for (int64_t o = 0; o < outer; ++o) {
          const T* g = self.grad.data() + o * out_row;
          T* dst = gx + o * in_row + offset;
          for (int64_t i = 0; i < out_row; ++i) dst[i] += g[i];
        }
      });
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> Split(const Tensor<T>& x, int axis, int64_t at) {
  const int ax = NormalizeAxis(axis, x.rank());
  if (at <= 0 || at >= x.dim(ax)) {
    throw DimensionError("split point " + std::to_string(at) +
                         " out of range for axis of length " +
                         std::to_string(x.dim(ax)));
  }
  return {Slice(x, ax, 0, at), Slice(x, ax, at, x.dim(ax))};
}

template <typename T>
Tensor<T> Reshape(const Tensor<T>& x, const Shape& shape) {
  if (NumElements(shape) != x.size()) {
    throw DimensionError("cannot reshape " + ShapeToString(x.shape()) + " to " +
                         ShapeToString(shape));
  }
  return Tensor<T>::MakeResult(shape, x.ToVector(), {x}, "reshape",
                               [](Node<T>& self) {
                                 T* gx = InputGrad(self, 0);
                                 if (!gx) return;
                                 for (size_t i = 0; i < self.grad.size(); ++i) {
                                   gx[i] += self.grad[i];
                                 }
                               });
}

template <typename T>
Tensor<T> Permute(const Tensor<T>& x, const std::vector<int>& order) {
  const int rank = x.rank();
  if (static_cast<int>(order.size()) != rank) {
    throw DimensionError("permute order length differs from rank");
  }
  std::vector<bool> seen(rank, false);
  for (int a : order) {
    if (a < 0 || a >= rank || seen[a]) {
      throw DimensionError("permute order is not a permutation");
    }
    seen[a] = true;
  }
  Shape out_shape(rank);
  const auto in_strides = RowMajorStrides(x.shape());
  std::vector<int64_t> read_strides(rank);
  for (int i = 0; i < rank; ++i) {
    out_shape[i] = x.dim(order[i]);
    read_strides[i] = in_strides[order[i]];
  }
  // Maps each output position to its source offset.
  std::vector<int64_t> source(NumElements(out_shape));
  const std::vector<int64_t> zeros(rank, 0);
  ForEachBroadcast(out_shape, read_strides, zeros,
                   [&](int64_t o, int64_t i, int64_t) { source[o] = i; });
  std::vector<T> out(source.size());
  for (size_t o = 0; o < source.size(); ++o) out[o] = x.data()[source[o]];
  return Tensor<T>::MakeResult(
      out_shape, std::move(out), {x}, "permute",
      [source = std::move(source)](Node<T>& self) {
        T* gx = InputGrad(self, 0);
        if (!gx) return;
        for (size_t o = 0; o < source.size(); ++o) gx[source[o]] += self.grad[o];
      });
}

template <typename T>
Tensor<T> Stack(const std::vector<Tensor<T>>& items) {
  if (items.empty()) throw DimensionError("stack of an empty list");
  const Shape& item_shape = items.front().shape();
  for (const auto& t : items) {
    if (t.shape() != item_shape) {
      throw DimensionError("stack shape mismatch: " + ShapeToString(item_shape) +
                           " vs " + ShapeToString(t.shape()));
    }
  }
  Shape out_shape = item_shape;
  out_shape.insert(out_shape.begin(), static_cast<int64_t>(items.size()));
  const int64_t per = NumElements(item_shape);
  std::vector<T> out(per * items.size());
  for (size_t i = 0; i < items.size(); ++i) {
    std::copy_n(items[i].data().data(), per, out.data() + i * per);
  }
  return Tensor<T>::MakeResult(
      out_shape, std::move(out), items, "stack", [per](Node<T>& self) {
        for (size_t i = 0; i < self.inputs.size(); ++i) {
          T* g = InputGrad(self, i);
          if (!g) continue;
          for (int64_t j = 0; j < per; ++j) g[j] += self.grad[i * per + j];
        }
      });
}

template <typename T>
Tensor<T> Select(const Tensor<T>& x, int64_t index) {
  if (x.rank() < 1 || index < 0 || index >= x.dim(0)) {
    throw DimensionError("select index out of range");
  }
  Shape out_shape(x.shape().begin() + 1, x.shape().end());
  return Reshape(Slice(x, 0, index, index + 1), out_shape);
}

template <typename T>
Tensor<T> Relu(const Tensor<T>& x) {
  return UnaryOp(
      x, "relu", [](T v) { return v > T(0) ? v : T(0); },
      [](T in, T) { return in > T(0) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> Sigmoid(const Tensor<T>& x) {
  return UnaryOp(
      x, "sigmoid",
      [](T v) {
        if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
        const T e = std::exp(v);
        return e / (T(1) + e);
      },
      [](T, T out) { return out * (T(1) - out); });
}

template <typename T>
Tensor<T> Tanh(const Tensor<T>& x) {
  return UnaryOp(
      x, "tanh", [](T v) { return std::tanh(v); },
      [](T, T out) { return T(1) - out * out; });
}

template <typename T>
Tensor<T> Sqrt(const Tensor<T>& x) {
  for (T v : x.data()) {
    if (v < T(0)) throw DomainError("sqrt of negative value");
  }
  return UnaryOp(
      x, "sqrt", [](T v) { return std::sqrt(v); },
      [](T, T out) { return T(0.5) / out; });
}

template <typename T>
Tensor<T> Log(const Tensor<T>& x) {
  for (T v : x.data()) {
    if (v <= T(0)) throw DomainError("log of non-positive value");
  }
  return UnaryOp(
      x, "log", [](T v) { return std::log(v); }, [](T in, T) { return T(1) / in; });
}

template <typename T>
Tensor<T> Exp(const Tensor<T>& x) {
  return UnaryOp(
      x, "exp", [](T v) { return std::exp(v); }, [](T, T out) { return out; });
}

template <typename T>
Tensor<T> Square(const Tensor<T>& x) {
  return UnaryOp(
      x, "square", [](T v) { return v * v; }, [](T in, T) { return T(2) * in; });
}

template <typename T>
Tensor<T> Scale(const Tensor<T>& x, T alpha) {
  return UnaryOp(
      x, "scale", [alpha](T v) { return alpha * v; },
      [alpha](T, T) { return alpha; });
}

template <typename T>
Tensor<T> AddScalar(const Tensor<T>& x, T c) {
  return UnaryOp(
      x, "add_scalar", [c](T v) { return v + c; }, [](T, T) { return T(1); });
}

template <typename T>
Tensor<T> Add(const Tensor<T>& a, const Tensor<T>& b) {
  return BinaryOp(a, b, BinaryKind::kAdd);
}

template <typename T>
Tensor<T> Sub(const Tensor<T>& a, const Tensor<T>& b) {
  return BinaryOp(a, b, BinaryKind::kSub);
}

template <typename T>
Tensor<T> Mul(const Tensor<T>& a, const Tensor<T>& b) {
  return BinaryOp(a, b, BinaryKind::kMul);
}

template <typename T>
Tensor<T> Div(const Tensor<T>& a, const Tensor<T>& b) {
  return BinaryOp(a, b, BinaryKind::kDiv);
}

template <typename T>
Tensor<T> Softmax(const Tensor<T>& x, int axis) {
  const int ax = NormalizeAxis(axis, x.rank());
  const AxisView v = ViewAround(x.shape(), ax);
  const auto& xv = x.data();
  std::vector<T> out(xv.size());
  for (int64_t o = 0; o < v.outer; ++o) {
    for (int64_t i = 0; i < v.inner; ++i) {
      const int64_t base = o * v.len * v.inner + i;
      T peak = xv[base];
      for (int64_t k = 1; k < v.len; ++k) peak = std::max(peak, xv[base + k * v.inner]);
      T total = 0;
      for (int64_t k = 0; k < v.len; ++k) {
        const T e = std::exp(xv[base + k * v.inner] - peak);
        out[base + k * v.inner] = e;
        total += e;
      }
      for (int64_t k = 0; k < v.len; ++k) out[base + k * v.inner] /= total;
    }
  }
  return Tensor<T>::MakeResult(
      x.shape(), std::move(out), {x}, "softmax", [v](Node<T>& self) {
        T* gx = InputGrad(self, 0);
        if (!gx) return;
        const auto& y = self.value;
        const auto& g = self.grad;
        for (int64_t o = 0; o < v.outer; ++o) {
          for (int64_t i = 0; i < v.inner; ++i) {
            const int64_t base = o * v.len * v.inner + i;
            T dot = 0;
            for (int64_t k = 0; k < v.len; ++k) {
              dot += g[base + k * v.inner] * y[base + k * v.inner];
            }
            for (int64_t k = 0; k < v.len; ++k) {
              const int64_t j = base + k * v.inner;
              gx[j] += y[j] * (g[j] - dot);
            }
          }
        }
      });
}

#define DTCF_INSTANTIATE_OPS(T)                                                \
  template Tensor<T> MatMul(const Tensor<T>&, const Tensor<T>&, bool, bool);   \
  template Tensor<T> Conv2d(const Tensor<T>&, const Tensor<T>&,                \
                            const Conv2dOptions&);                             \
  template Tensor<T> Sum(const Tensor<T>&, int, bool);                         \
  template Tensor<T> Mean(const Tensor<T>&, int, bool);                        \
  template Tensor<T> SumAll(const Tensor<T>&);                                 \
  template Tensor<T> MeanAll(const Tensor<T>&);                                \
  template Tensor<T> Concat(const Tensor<T>&, const Tensor<T>&, int);          \
  template Tensor<T> Slice(const Tensor<T>&, int, int64_t, int64_t);           \
  template std::pair<Tensor<T>, Tensor<T>> Split(const Tensor<T>&, int,        \
                                                 int64_t);                     \
  template Tensor<T> Reshape(const Tensor<T>&, const Shape&);                  \
  template Tensor<T> Permute(const Tensor<T>&, const std::vector<int>&);       \
  template Tensor<T> Stack(const std::vector<Tensor<T>>&);                     \
  template Tensor<T> Select(const Tensor<T>&, int64_t);                        \
  template Tensor<T> Relu(const Tensor<T>&);                                   \
  template Tensor<T> Sigmoid(const Tensor<T>&);                                \
  template Tensor<T> Tanh(const Tensor<T>&);                                   \
  template Tensor<T> Sqrt(const Tensor<T>&);                                   \
  template Tensor<T> Log(const Tensor<T>&);                                    \
  template Tensor<T> Exp(const Tensor<T>&);                                    \
  template Tensor<T> Square(const Tensor<T>&);                                 \
  template Tensor<T> Scale(const Tensor<T>&, T);                               \
  template Tensor<T> AddScalar(const Tensor<T>&, T);                           \
  template Tensor<T> Add(const Tensor<T>&, const Tensor<T>&);                  \
  template Tensor<T> Sub(const Tensor<T>&, const Tensor<T>&);                  \
  template Tensor<T> Mul(const Tensor<T>&, const Tensor<T>&);                  \
  template Tensor<T> Div(const Tensor<T>&, const Tensor<T>&);                  \
  template Tensor<T> Softmax(const Tensor<T>&, int);

DTCF_INSTANTIATE_OPS(float)
DTCF_INSTANTIATE_OPS(double)

#undef DTCF_INSTANTIATE_OPS

}  // namespace dtcf::ad
