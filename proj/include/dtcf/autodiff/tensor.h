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

#ifndef DTCF_AUTODIFF_TENSOR_H_
#define DTCF_AUTODIFF_TENSOR_H_

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace dtcf::ad {

using Shape = std::vector<int64_t>;

int64_t NumElements(const Shape& shape);
std::string ShapeToString(const Shape& shape);

// Resolves a possibly negative axis against `rank`; throws DimensionError
// when out of range.
int NormalizeAxis(int axis, int rank);

template <typename T>
struct Node;

// Backward rule of a recorded operation. Reads `self.grad` and accumulates
// into the grads of `self.inputs`.
template <typename T>
using BackwardFn = std::function<void(Node<T>& self)>;

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> value;
  // Empty until the first accumulation; same length as `value` afterwards.
  std::vector<T> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  BackwardFn<T> backward;
  const char* op = "leaf";

  bool is_leaf() const { return !backward; }
  // Allocates zeros on first use.
  std::vector<T>& GradBuffer();
};

// Dense row-major tensor handle. Copies share the underlying node, so a
// parameter tensor can be referenced from several places and updated in
// place by an optimizer. Results of operations are immutable.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Tensor Zeros(const Shape& shape, bool requires_grad = false);
  static Tensor Full(const Shape& shape, T value, bool requires_grad = false);
  static Tensor FromData(const Shape& shape, std::vector<T> data,
                         bool requires_grad = false);
  static Tensor Scalar(T value, bool requires_grad = false);

  // Creates the result of an operation. When gradients are disabled or no
  // input requires them, the result is a plain leaf and `backward` is
  // dropped.
  static Tensor MakeResult(const Shape& shape, std::vector<T> value,
                           const std::vector<Tensor>& inputs, const char* op,
                           BackwardFn<T> backward);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int rank() const { return static_cast<int>(node_->shape.size()); }
  int64_t dim(int axis) const;
  int64_t size() const { return static_cast<int64_t>(node_->value.size()); }

  std::span<const T> data() const { return node_->value; }
  std::span<T> mutable_data() { return node_->value; }
  std::vector<T> ToVector() const { return node_->value; }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool flag) { node_->requires_grad = flag; }
  bool has_grad() const { return !node_->grad.empty(); }
  // Empty span when no gradient has been accumulated yet.
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> mutable_grad() { return node_->GradBuffer(); }
  void ZeroGrad();

  T item() const;
  T at(std::initializer_list<int64_t> index) const;

  // Value copy with no history.
  Tensor Detach() const;
  // Overwrites the values of this tensor (shape must match).
  void Assign(std::span<const T> values);

  const char* op() const { return node_->op; }
  const std::shared_ptr<Node<T>>& node() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

// Disables graph recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool GradEnabled();

// Reverse topological ordering of the recorded graph reachable from a root.
// Only nodes that require gradients are recorded.
template <typename T>
class Tape {
 public:
  static Tape Record(const Tensor<T>& root);

  // Nodes in forward order: every node appears after all of its recorded
  // inputs.
  const std::vector<Node<T>*>& nodes() const { return nodes_; }

  // Runs every backward rule once, last node first.
  void Replay() const;

 private:
  std::vector<Node<T>*> nodes_;
};

// Seeds d(root)/d(root) = 1 and propagates to every leaf that requires
// gradients. Gradients accumulate across calls.
template <typename T>
void Backward(const Tensor<T>& root);

template <typename To, typename From>
Tensor<To> Cast(const Tensor<From>& x, bool requires_grad = false);

}  // namespace dtcf::ad

#endif  // DTCF_AUTODIFF_TENSOR_H_
