/*
 * Copyright 2026 The gil Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Reverse-mode automatic differentiation over dense double-precision
// matrices. Every tensor is two-dimensional (scalars are 1x1). Values form a
// DAG through shared ownership of their parents; a DAG belongs to one thread,
// but parameters may be read by several threads building separate DAGs.

#ifndef GIL_AUTODIFF_HPP_
#define GIL_AUTODIFF_HPP_

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace gil::ad {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
  Matrix data;
  Matrix grad;  // Sized during backward.
  std::vector<NodePtr> parents;
  // Reads this->grad and accumulates into the parents' grads.
  std::function<void(Node&)> backward;
  bool requires_grad = false;
};

class Value {
 public:
  Value() = default;
  explicit Value(Matrix data, bool requires_grad = false);
  explicit Value(NodePtr node) : node_(std::move(node)) {}

  static Value Scalar(double v, bool requires_grad = false);
  static Value Constant(Matrix data) { return Value(std::move(data), false); }

  const Matrix& data() const { return node_->data; }
  // Only for in-place parameter updates; never while a DAG is in flight.
  Matrix& mutable_data() { return node_->data; }
  const Matrix& grad() const { return node_->grad; }
  Index rows() const { return node_->data.rows(); }
  Index cols() const { return node_->data.cols(); }
  double item() const;
  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool defined() const { return node_ != nullptr; }
  const NodePtr& node() const { return node_; }

 private:
  NodePtr node_;
};

// While alive on a thread, new operations record no parents.
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

// Gradient of a 1x1 `output` with respect to each of `params`. Parameters the
// output does not depend on get zero matrices. Gradients are accumulated
// over shared subexpressions. Throws std::invalid_argument if `output` is
// not a scalar.
std::vector<Matrix> Grad(const Value& output, std::span<const Value> params);

// ---- Elementwise and broadcasting -----------------------------------------

// Same shape, or `b` a 1xC row broadcast over the rows of `a`.
Value Add(const Value& a, const Value& b);
Value Sub(const Value& a, const Value& b);
Value Mul(const Value& a, const Value& b);
// a: RxC, column: Rx1, broadcast across columns.
Value MulColumn(const Value& a, const Value& column);
Value Scale(const Value& a, double s);
Value AddScalar(const Value& a, double s);
Value Relu(const Value& a);
Value Silu(const Value& a);
Value Sigmoid(const Value& a);
Value Softplus(const Value& a);
Value Square(const Value& a);
Value Abs(const Value& a);

// ---- Linear algebra and reductions -----------------------------------------

Value MatMul(const Value& a, const Value& b);
Value Sum(const Value& a);
Value Mean(const Value& a);
// Rx1 row sums.
Value RowSum(const Value& a);
// Rx1 Euclidean norm of each row; the gradient at a zero row is zero.
Value RowNorm(const Value& a);

// ---- Structure ------------------------------------------------------------

Value ConcatColumns(std::span<const Value> parts);
Value SliceColumns(const Value& a, Index start, Index count);
// out.row(t) = a.row(index[t]).
Value GatherRows(const Value& a, std::span<const int> index);
// out.row(index[t]) += a.row(t), out has `rows` rows.
Value ScatterAddRows(const Value& a, std::span<const int> index, Index rows);
// Column-wise softmax within each segment of rows sharing `segment[t]`.
Value SegmentSoftmax(const Value& a, std::span<const int> segment,
                     Index num_segments);

}  // namespace gil::ad

#endif  // GIL_AUTODIFF_HPP_
