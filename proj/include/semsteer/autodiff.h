/*
 * Copyright 2026 The Semsteer Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SEMSTEER_AUTODIFF_H_
#define SEMSTEER_AUTODIFF_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace semsteer::ad {

using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Trainable tensor with its gradient buffer. Shapes are 2-D (rows x cols);
// vectors are stored as 1 x n rows.
class ParamTensor {
 public:
  ParamTensor() = default;
  ParamTensor(std::string name, Eigen::Index rows, Eigen::Index cols)
      : name_(std::move(name)),
        value_(Matrix::Zero(rows, cols)),
        grad_(Matrix::Zero(rows, cols)) {}

  const std::string& name() const { return name_; }
  Matrix& value() { return value_; }
  const Matrix& value() const { return value_; }
  Matrix& grad() { return grad_; }
  const Matrix& grad() const { return grad_; }

  Eigen::Index rows() const { return value_.rows(); }
  Eigen::Index cols() const { return value_.cols(); }
  size_t size() const { return static_cast<size_t>(value_.size()); }

  void ZeroGrad() { grad_.setZero(); }
  bool ValuesFinite() const { return value_.allFinite(); }

 private:
  std::string name_;
  Matrix value_;
  Matrix grad_;
};

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; only valid while the
// tape it came from is alive and not cleared.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const;
  bool valid() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

struct BackwardReport {
  bool finite = true;
  // Name of the first parameter whose accumulated gradient went non-finite.
  std::string first_nonfinite;
};

// Reverse-mode tape over dense matrices. Ops append nodes; Backward walks
// them in reverse once. Gradients of Param leaves are *added* to the
// ParamTensor grad buffers, so several backward passes accumulate until the
// optimizer zeroes them.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Constant(Matrix value);
  Var Param(ParamTensor& param);

  // Pushes a node computed by an op. `parents` are the inputs the backward
  // function may write gradients into.
  Var Push(Matrix value, std::initializer_list<Var> parents, BackwardFn fn);

  // Seeds d(loss)/d(loss) = 1 and propagates. `loss` must be 1x1. Throws if
  // the tape is empty or was already back-propagated.
  BackwardReport Backward(Var loss);

  // Drops every node so the tape can record a new forward pass.
  void Clear();

  size_t size() const { return nodes_.size(); }
  bool backpropagated() const { return backpropagated_; }

  const Matrix& value(int id) const { return nodes_[id].value; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  // Gradient buffer of a node; allocated (zero) on first access.
  Matrix& grad(int id);
  bool has_grad(int id) const { return nodes_[id].grad.size() > 0; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    BackwardFn backward;
    ParamTensor* param = nullptr;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
  bool backpropagated_ = false;
};

// Element-wise and linear-algebra ops. All operands must live on the same
// tape.
Var MatMul(Var a, Var b);
// Constant sparse matrix times a variable. The sparse matrix must outlive
// the backward pass.
Var SpMatMul(const SparseMatrix& a, Var b);
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);
Var Scale(Var a, double s);
Var Reciprocal(Var a);
// a (n x d) + row (1 x d) broadcast over rows.
Var AddRow(Var a, Var row);
Var Relu(Var a);
Var Tanh(Var a);
Var Sigmoid(Var a);
Var Exp(Var a);
// Gradient passes only where lo < a < hi.
Var Clamp(Var a, double lo, double hi);
Var Transpose(Var a);
Var ConcatCols(Var a, Var b);
Var SliceCols(Var a, Eigen::Index start, Eigen::Index count);
Var GatherRows(Var a, std::span<const uint32_t> rows);
Var MeanRows(Var a);
Var MaxRows(Var a);
// Row-wise max within groups: group g spans rows [offsets[g], offsets[g+1]).
Var SegmentMax(Var a, std::span<const uint32_t> offsets);
Var Sum(Var a);

}  // namespace semsteer::ad

#endif  // SEMSTEER_AUTODIFF_H_
