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

#include "gil/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace gil::ad {
namespace {

thread_local bool grad_enabled = true;

void CheckSameShape(const Value& a, const Value& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch (" +
                                std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " +
                                std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + ")");
  }
}

// Creates the result node; parents and the backward closure are recorded
// only when gradients are enabled and some input needs them.
Value MakeResult(Matrix data, std::initializer_list<const Value*> inputs,
                 std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->data = std::move(data);
  if (grad_enabled) {
    bool any = false;
    for (const Value* v : inputs) any = any || v->requires_grad();
    if (any) {
      node->requires_grad = true;
      for (const Value* v : inputs) node->parents.push_back(v->node());
      node->backward = std::move(backward);
    }
  }
  return Value(std::move(node));
}

Value MakeResultVec(Matrix data, std::span<const Value> inputs,
                    std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->data = std::move(data);
  if (grad_enabled) {
    bool any = false;
    for (const Value& v : inputs) any = any || v.requires_grad();
    if (any) {
      node->requires_grad = true;
      for (const Value& v : inputs) node->parents.push_back(v.node());
      node->backward = std::move(backward);
    }
  }
  return Value(std::move(node));
}

inline bool Wants(const NodePtr& p) { return p->requires_grad; }

Value Unary(const Value& a, Matrix out,
            std::function<Matrix(const Matrix& x, const Matrix& y)> local) {
  return MakeResult(std::move(out), {&a}, [local = std::move(local)](Node& self) {
    Node& x = *self.parents[0];
    x.grad.array() += self.grad.array() * local(x.data, self.data).array();
  });
}

}  // namespace

Value::Value(Matrix data, bool requires_grad)
    : node_(std::make_shared<Node>()) {
  node_->data = std::move(data);
  node_->requires_grad = requires_grad;
}

Value Value::Scalar(double v, bool requires_grad) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return Value(std::move(m), requires_grad);
}

double Value::item() const {
  if (rows() != 1 || cols() != 1) throw std::invalid_argument("item: not a scalar");
  return node_->data(0, 0);
}

NoGradGuard::NoGradGuard() : previous_(grad_enabled) { grad_enabled = false; }
NoGradGuard::~NoGradGuard() { grad_enabled = previous_; }
bool GradEnabled() { return grad_enabled; }

std::vector<Matrix> Grad(const Value& output, std::span<const Value> params) {
  if (output.rows() != 1 || output.cols() != 1) {
    throw std::invalid_argument("grad: output must be a scalar");
  }
  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  if (output.requires_grad()) {
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(output.node().get(), 0);
    visited.insert(output.node().get());
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < node->parents.size()) {
        Node* parent = node->parents[next++].get();
        if (parent->requires_grad && visited.insert(parent).second) {
          stack.emplace_back(parent, 0);
        }
      } else {
        order.push_back(node);
        stack.pop_back();
      }
    }
  }
  for (Node* n : order) n->grad = Matrix::Zero(n->data.rows(), n->data.cols());
  if (!order.empty()) order.back()->grad(0, 0) = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward) (*it)->backward(**it);
  }
  std::vector<Matrix> grads;
  grads.reserve(params.size());
  for (const Value& p : params) {
    if (visited.contains(p.node().get())) {
      grads.push_back(p.node()->grad);
    } else {
      grads.push_back(Matrix::Zero(p.rows(), p.cols()));
    }
  }
  // Intermediate grads are dead weight once read.
  for (Node* n : order) {
    if (n->parents.empty()) continue;
    n->grad.resize(0, 0);
  }
  return grads;
}

Value Add(const Value& a, const Value& b) {
  if (b.rows() == 1 && a.rows() != 1 && b.cols() == a.cols()) {
    Matrix out = a.data().rowwise() + b.data().row(0);
    return MakeResult(std::move(out), {&a, &b}, [](Node& self) {
      if (Wants(self.parents[0])) self.parents[0]->grad += self.grad;
      if (Wants(self.parents[1])) self.parents[1]->grad += self.grad.colwise().sum();
    });
  }
  CheckSameShape(a, b, "add");
  return MakeResult(a.data() + b.data(), {&a, &b}, [](Node& self) {
    if (Wants(self.parents[0])) self.parents[0]->grad += self.grad;
    if (Wants(self.parents[1])) self.parents[1]->grad += self.grad;
  });
}

Value Sub(const Value& a, const Value& b) {
  CheckSameShape(a, b, "sub");
  return MakeResult(a.data() - b.data(), {&a, &b}, [](Node& self) {
    if (Wants(self.parents[0])) self.parents[0]->grad += self.grad;
    if (Wants(self.parents[1])) self.parents[1]->grad -= self.grad;
  });
}

Value Mul(const Value& a, const Value& b) {
  CheckSameShape(a, b, "mul");
  return MakeResult(a.data().cwiseProduct(b.data()), {&a, &b}, [](Node& self) {
    Node& x = *self.parents[0];
    Node& y = *self.parents[1];
    if (x.requires_grad) x.grad += self.grad.cwiseProduct(y.data);
    if (y.requires_grad) y.grad += self.grad.cwiseProduct(x.data);
  });
}

Value MulColumn(const Value& a, const Value& column) {
  if (column.cols() != 1 || column.rows() != a.rows()) {
    throw std::invalid_argument("mul_column: column must be Rx1");
  }
  Matrix out = a.data().array().colwise() * column.data().col(0).array();
  return MakeResult(std::move(out), {&a, &column}, [](Node& self) {
    Node& x = *self.parents[0];
    Node& c = *self.parents[1];
    if (x.requires_grad) {
      x.grad.array() += self.grad.array().colwise() * c.data.col(0).array();
    }
    if (c.requires_grad) {
      c.grad.col(0) += self.grad.cwiseProduct(x.data).rowwise().sum();
    }
  });
}

Value Scale(const Value& a, double s) {
  return MakeResult(a.data() * s, {&a}, [s](Node& self) {
    self.parents[0]->grad += s * self.grad;
  });
}

Value AddScalar(const Value& a, double s) {
  Matrix out = a.data().array() + s;
  return MakeResult(std::move(out), {&a}, [](Node& self) {
    self.parents[0]->grad += self.grad;
  });
}

Value Relu(const Value& a) {
  return Unary(a, a.data().cwiseMax(0.0), [](const Matrix& x, const Matrix&) {
    return Matrix((x.array() > 0.0).cast<double>());
  });
}

Value Sigmoid(const Value& a) {
  Matrix out = (1.0 + (-a.data().array()).exp()).inverse();
  return Unary(a, std::move(out), [](const Matrix&, const Matrix& y) {
    return Matrix(y.array() * (1.0 - y.array()));
  });
}

Value Silu(const Value& a) {
  Matrix sig = (1.0 + (-a.data().array()).exp()).inverse();
  Matrix out = a.data().cwiseProduct(sig);
  return MakeResult(std::move(out), {&a}, [sig = std::move(sig)](Node& self) {
    Node& x = *self.parents[0];
    x.grad.array() += self.grad.array() * sig.array() *
                      (1.0 + x.data.array() * (1.0 - sig.array()));
  });
}

Value Softplus(const Value& a) {
  // log(1 + e^x) computed stably.
  Matrix out = a.data().unaryExpr([](double x) {
    return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  });
  return Unary(a, std::move(out), [](const Matrix& x, const Matrix&) {
    return Matrix((1.0 + (-x.array()).exp()).inverse());
  });
}

Value Square(const Value& a) {
  return Unary(a, a.data().cwiseAbs2(), [](const Matrix& x, const Matrix&) {
    return Matrix(2.0 * x);
  });
}

Value Abs(const Value& a) {
  return Unary(a, a.data().cwiseAbs(), [](const Matrix& x, const Matrix&) {
    return Matrix(x.array().sign());
  });
}

Value MatMul(const Value& a, const Value& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: inner dimensions differ (" +
                                std::to_string(a.cols()) + " vs " +
                                std::to_string(b.rows()) + ")");
  }
  Matrix out = a.data() * b.data();
  return MakeResult(std::move(out), {&a, &b}, [](Node& self) {
    Node& x = *self.parents[0];
    Node& y = *self.parents[1];
    if (x.requires_grad) x.grad.noalias() += self.grad * y.data.transpose();
    if (y.requires_grad) y.grad.noalias() += x.data.transpose() * self.grad;
  });
}

Value Sum(const Value& a) {
  Matrix out(1, 1);
  out(0, 0) = a.data().sum();
  return MakeResult(std::move(out), {&a}, [](Node& self) {
    self.parents[0]->grad.array() += self.grad(0, 0);
  });
}

Value Mean(const Value& a) {
  const double count = static_cast<double>(a.data().size());
  if (count == 0) throw std::invalid_argument("mean: empty tensor");
  Matrix out(1, 1);
  out(0, 0) = a.data().sum() / count;
  return MakeResult(std::move(out), {&a}, [count](Node& self) {
    self.parents[0]->grad.array() += self.grad(0, 0) / count;
  });
}

Value RowSum(const Value& a) {
  Matrix out = a.data().rowwise().sum();
  return MakeResult(std::move(out), {&a}, [](Node& self) {
    self.parents[0]->grad.colwise() += self.grad.col(0);
  });
}

Value RowNorm(const Value& a) {
  Matrix out = a.data().rowwise().norm();
  return MakeResult(std::move(out), {&a}, [](Node& self) {
    Node& x = *self.parents[0];
    for (Index r = 0; r < x.data.rows(); ++r) {
      const double norm = self.data(r, 0);
      if (norm > 0) x.grad.row(r) += (self.grad(r, 0) / norm) * x.data.row(r);
    }
  });
}

Value ConcatColumns(std::span<const Value> parts) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  const Index rows = parts[0].rows();
  Index cols = 0;
  for (const Value& p : parts) {
    if (p.rows() != rows) throw std::invalid_argument("concat: row mismatch");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::vector<Index> offsets;
  Index at = 0;
  for (const Value& p : parts) {
    offsets.push_back(at);
    out.middleCols(at, p.cols()) = p.data();
    at += p.cols();
  }
  return MakeResultVec(std::move(out), parts, [offsets](Node& self) {
    for (std::size_t t = 0; t < self.parents.size(); ++t) {
      Node& p = *self.parents[t];
      if (p.requires_grad) p.grad += self.grad.middleCols(offsets[t], p.data.cols());
    }
  });
}

Value SliceColumns(const Value& a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw std::invalid_argument("slice: column range out of bounds");
  }
  Matrix out = a.data().middleCols(start, count);
  return MakeResult(std::move(out), {&a}, [start, count](Node& self) {
    self.parents[0]->grad.middleCols(start, count) += self.grad;
  });
}

Value GatherRows(const Value& a, std::span<const int> index) {
  const Index n = static_cast<Index>(index.size());
  Matrix out(n, a.cols());
  for (Index t = 0; t < n; ++t) {
    const int r = index[t];
    if (r < 0 || r >= a.rows()) throw std::invalid_argument("gather: index out of range");
    out.row(t) = a.data().row(r);
  }
  std::vector<int> idx(index.begin(), index.end());
  return MakeResult(std::move(out), {&a}, [idx = std::move(idx)](Node& self) {
    Node& x = *self.parents[0];
    for (std::size_t t = 0; t < idx.size(); ++t) {
      x.grad.row(idx[t]) += self.grad.row(static_cast<Index>(t));
    }
  });
}

Value ScatterAddRows(const Value& a, std::span<const int> index, Index rows) {
  if (static_cast<Index>(index.size()) != a.rows()) {
    throw std::invalid_argument("scatter: index length must equal row count");
  }
  Matrix out = Matrix::Zero(rows, a.cols());
  for (Index t = 0; t < a.rows(); ++t) {
    const int r = index[t];
    if (r < 0 || r >= rows) throw std::invalid_argument("scatter: index out of range");
    out.row(r) += a.data().row(t);
  }
  std::vector<int> idx(index.begin(), index.end());
  return MakeResult(std::move(out), {&a}, [idx = std::move(idx)](Node& self) {
    Node& x = *self.parents[0];
    for (std::size_t t = 0; t < idx.size(); ++t) {
      x.grad.row(static_cast<Index>(t)) += self.grad.row(idx[t]);
    }
  });
}

Value SegmentSoftmax(const Value& a, std::span<const int> segment,
                     Index num_segments) {
  if (static_cast<Index>(segment.size()) != a.rows()) {
    throw std::invalid_argument("segment_softmax: segment length must equal rows");
  }
  const Index cols = a.cols();
  Matrix max = Matrix::Constant(num_segments, cols,
                                -std::numeric_limits<double>::infinity());
  for (Index t = 0; t < a.rows(); ++t) {
    const int s = segment[t];
    if (s < 0 || s >= num_segments) {
      throw std::invalid_argument("segment_softmax: segment out of range");
    }
    max.row(s) = max.row(s).cwiseMax(a.data().row(t));
  }
  Matrix out(a.rows(), cols);
  Matrix denom = Matrix::Zero(num_segments, cols);
  for (Index t = 0; t < a.rows(); ++t) {
    out.row(t) = (a.data().row(t) - max.row(segment[t])).array().exp();
    denom.row(segment[t]) += out.row(t);
  }
  for (Index t = 0; t < a.rows(); ++t) {
    out.row(t).array() /= denom.row(segment[t]).array();
  }
  std::vector<int> seg(segment.begin(), segment.end());
  return MakeResult(std::move(out), {&a}, [seg = std::move(seg), num_segments](Node& self) {
    // d x_t = y_t * (g_t - sum_{u in seg} g_u y_u)
    Matrix dot = Matrix::Zero(num_segments, self.data.cols());
    for (std::size_t t = 0; t < seg.size(); ++t) {
      const Index r = static_cast<Index>(t);
      dot.row(seg[t]) += self.grad.row(r).cwiseProduct(self.data.row(r));
    }
    Node& x = *self.parents[0];
    for (std::size_t t = 0; t < seg.size(); ++t) {
      const Index r = static_cast<Index>(t);
      x.grad.row(r).array() +=
          self.data.row(r).array() * (self.grad.row(r) - dot.row(seg[t])).array();
    }
  });
}

}  // namespace gil::ad
