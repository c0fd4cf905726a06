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

#include "dtcf/autodiff/tensor.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "dtcf/base/error.h"

namespace dtcf::ad {

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

int64_t NumElements(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d < 0) throw DimensionError("negative dimension in shape");
    n *= d;
  }
  return n;
}

std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

int NormalizeAxis(int axis, int rank) {
  int a = axis < 0 ? axis + rank : axis;
  if (a < 0 || a >= rank) {
    throw DimensionError("axis " + std::to_string(axis) +
                         " out of range for rank " + std::to_string(rank));
  }
  return a;
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) {
  g_grad_enabled = false;
}

NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool GradEnabled() { return g_grad_enabled; }

template <typename T>
std::vector<T>& Node<T>::GradBuffer() {
  if (grad.empty() && !value.empty()) grad.assign(value.size(), T(0));
  return grad;
}

template <typename T>
Tensor<T> Tensor<T>::Zeros(const Shape& shape, bool requires_grad) {
  return Full(shape, T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::Full(const Shape& shape, T value, bool requires_grad) {
  return FromData(shape, std::vector<T>(NumElements(shape), value),
                  requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::FromData(const Shape& shape, std::vector<T> data,
                              bool requires_grad) {
  if (NumElements(shape) != static_cast<int64_t>(data.size())) {
    throw DimensionError("data length " + std::to_string(data.size()) +
                         " does not match shape " + ShapeToString(shape));
  }
  auto node = std::make_shared<Node<T>>();
  node->shape = shape;
  node->value = std::move(data);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

template <typename T>
Tensor<T> Tensor<T>::Scalar(T value, bool requires_grad) {
  return FromData({}, {value}, requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::MakeResult(const Shape& shape, std::vector<T> value,
                                const std::vector<Tensor>& inputs,
                                const char* op, BackwardFn<T> backward) {
  for (const T& v : value) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string("non-finite value produced by ") + op);
    }
  }
  Tensor out = FromData(shape, std::move(value));
  out.node_->op = op;
  if (!g_grad_enabled) return out;
  bool any = std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) {
    return t.defined() && t.requires_grad();
  });
  if (!any) return out;
  out.node_->requires_grad = true;
  out.node_->backward = std::move(backward);
  out.node_->inputs.reserve(inputs.size());
  for (const Tensor& t : inputs) out.node_->inputs.push_back(t.node_);
  return out;
}

template <typename T>
int64_t Tensor<T>::dim(int axis) const {
  return node_->shape[NormalizeAxis(axis, rank())];
}

template <typename T>
void Tensor<T>::ZeroGrad() {
  if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), T(0));
}

template <typename T>
T Tensor<T>::item() const {
  if (size() != 1) {
    throw DimensionError("item() on tensor of shape " + ShapeToString(shape()));
  }
  return node_->value[0];
}

template <typename T>
T Tensor<T>::at(std::initializer_list<int64_t> index) const {
  if (static_cast<int>(index.size()) != rank()) {
    throw DimensionError("index rank mismatch");
  }
  int64_t offset = 0;
  int axis = 0;
  for (int64_t i : index) {
    int64_t d = node_->shape[axis++];
    if (i < 0 || i >= d) throw DimensionError("index out of range");
    offset = offset * d + i;
  }
  return node_->value[offset];
}

template <typename T>
Tensor<T> Tensor<T>::Detach() const {
  return FromData(shape(), node_->value);
}

template <typename T>
void Tensor<T>::Assign(std::span<const T> values) {
  if (static_cast<int64_t>(values.size()) != size()) {
    throw DimensionError("Assign: length mismatch for shape " +
                         ShapeToString(shape()));
  }
  std::copy(values.begin(), values.end(), node_->value.begin());
}

template <typename T>
Tape<T> Tape<T>::Record(const Tensor<T>& root) {
  Tape tape;
  if (!root.defined() || !root.requires_grad()) return tape;
  // Iterative post-order DFS; a node is emitted after all its inputs.
  std::unordered_set<Node<T>*> visited;
  std::vector<std::pair<Node<T>*, size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  visited.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node<T>* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      tape.nodes_.push_back(node);
      stack.pop_back();
    }
  }
  return tape;
}

template <typename T>
void Tape<T>::Replay() const {
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node<T>* node = *it;
    if (node->backward && !node->grad.empty()) node->backward(*node);
  }
}

template <typename T>
void Backward(const Tensor<T>& root) {
  if (!root.defined() || root.rank() != 0) {
    throw DimensionError("Backward requires a scalar root, got shape " +
                         (root.defined() ? ShapeToString(root.shape())
                                         : std::string("<undefined>")));
  }
  if (!root.requires_grad()) return;
  Tape<T> tape = Tape<T>::Record(root);
  root.node()->GradBuffer()[0] += T(1);
  tape.Replay();
}

template <typename To, typename From>
Tensor<To> Cast(const Tensor<From>& x, bool requires_grad) {
  std::vector<To> out(x.data().begin(), x.data().end());
  return Tensor<To>::FromData(x.shape(), std::move(out), requires_grad);
}

template struct Node<float>;
template struct Node<double>;
template class Tensor<float>;
template class Tensor<double>;
template class Tape<float>;
template class Tape<double>;
template void Backward(const Tensor<float>&);
template void Backward(const Tensor<double>&);
template Tensor<float> Cast(const Tensor<double>&, bool);
template Tensor<double> Cast(const Tensor<float>&, bool);
template Tensor<float> Cast(const Tensor<float>&, bool);
template Tensor<double> Cast(const Tensor<double>&, bool);

}  // namespace dtcf::ad
