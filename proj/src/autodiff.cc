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

#include "semsteer/autodiff.h"

#include <algorithm>
#include <string>

#include "semsteer/error.h"

namespace semsteer::ad {
namespace {

Tape& SameTape(Var a, Var b) {
  if (!a.valid() || a.tape() != b.tape()) {
    throw DimensionError("operands are not recorded on the same tape");
  }
  return *a.tape();
}

Tape& TapeOf(Var a) {
  if (!a.valid()) throw DimensionError("operand is not recorded on a tape");
  return *a.tape();
}

void RequireSameShape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape " +
                         std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

}  // namespace

const Matrix& Var::value() const { return tape_->value(id_); }

double Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) throw DimensionError("Var is not a scalar");
  return v(0, 0);
}

Var Tape::Constant(Matrix value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::Param(ParamTensor& param) {
  Node node;
  node.value = param.value();
  node.param = &param;
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::Push(Matrix value, std::initializer_list<Var> parents,
               BackwardFn fn) {
  Node node;
  node.value = std::move(value);
  for (Var p : parents) {
    if (p.tape() != this) throw DimensionError("parent from another tape");
    node.requires_grad = node.requires_grad || nodes_[p.id()].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(fn);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Matrix& Tape::grad(int id) {
  Node& node = nodes_[id];
  if (node.grad.size() == 0) {
    node.grad = Matrix::Zero(node.value.rows(), node.value.cols());
  }
  return node.grad;
}

BackwardReport Tape::Backward(Var loss) {
  if (nodes_.empty()) throw Error("backward called with no recorded forward");
  if (backpropagated_) {
    throw Error("backward already ran on this tape; record a new forward");
  }
  if (loss.tape() != this) throw DimensionError("loss is not on this tape");
  if (nodes_[loss.id()].value.size() != 1) {
    throw DimensionError("backward needs a scalar loss");
  }
  backpropagated_ = true;
  grad(loss.id())(0, 0) = 1.0;
  for (int id = loss.id(); id >= 0; --id) {
    Node& node = nodes_[id];
    if (!node.requires_grad || node.grad.size() == 0) continue;
    if (node.backward) node.backward(*this, id);
  }

  BackwardReport report;
  for (Node& node : nodes_) {
    if (node.param == nullptr || node.grad.size() == 0) continue;
    node.param->grad() += node.grad;
    if (report.finite && !node.param->grad().allFinite()) {
      report.finite = false;
      report.first_nonfinite = node.param->name();
    }
  }
  return report;
}

void Tape::Clear() {
  nodes_.clear();
  backpropagated_ = false;
}

Var MatMul(Var a, Var b) {
  Tape& t = SameTape(a, b);
  if (a.cols() != b.rows()) {
    throw DimensionError("MatMul: " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " times " +
                         std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
  const int ia = a.id(), ib = b.id();
  return t.Push(a.value() * b.value(), {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ia)) t.grad(ia).noalias() += g * t.value(ib).transpose();
    if (t.requires_grad(ib)) t.grad(ib).noalias() += t.value(ia).transpose() * g;
  });
}

Var SpMatMul(const SparseMatrix& a, Var b) {
  Tape& t = TapeOf(b);
  if (a.cols() != b.rows()) {
    throw DimensionError("SpMatMul: adjacency dimension " +
                         std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()) + " rows");
  }
  const SparseMatrix* ap = &a;
  const int ib = b.id();
  Matrix out = a * b.value();
  return t.Push(std::move(out), {b}, [ap, ib](Tape& t, int self) {
    t.grad(ib).noalias() += ap->transpose() * t.grad(self);
  });
}

Var Add(Var a, Var b) {
  Tape& t = SameTape(a, b);
  RequireSameShape(a.value(), b.value(), "Add");
  const int ia = a.id(), ib = b.id();
  return t.Push(a.value() + b.value(), {a, b}, [ia, ib](Tape& t, int self) {
    if (t.requires_grad(ia)) t.grad(ia) += t.grad(self);
    if (t.requires_grad(ib)) t.grad(ib) += t.grad(self);
  });
}

Var Sub(Var a, Var b) {
  Tape& t = SameTape(a, b);
  RequireSameShape(a.value(), b.value(), "Sub");
  const int ia = a.id(), ib = b.id();
  return t.Push(a.value() - b.value(), {a, b}, [ia, ib](Tape& t, int self) {
    if (t.requires_grad(ia)) t.grad(ia) += t.grad(self);
    if (t.requires_grad(ib)) t.grad(ib) -= t.grad(self);
  });
}

Var Mul(Var a, Var b) {
  Tape& t = SameTape(a, b);
  RequireSameShape(a.value(), b.value(), "Mul");
  const int ia = a.id(), ib = b.id();
  return t.Push(a.value().cwiseProduct(b.value()), {a, b},
                [ia, ib](Tape& t, int self) {
                  const Matrix& g = t.grad(self);
                  if (t.requires_grad(ia)) {
                    t.grad(ia) += g.cwiseProduct(t.value(ib));
                  }
                  if (t.requires_grad(ib)) {
                    t.grad(ib) += g.cwiseProduct(t.value(ia));
                  }
                });
}

Var Scale(Var a, double s) {
  Tape& t = TapeOf(a);
  const int ia = a.id();
  return t.Push(a.value() * s, {a}, [ia, s](Tape& t, int self) {
    t.grad(ia) += s * t.grad(self);
  });
}

Var Reciprocal(Var a) {
  Tape& t = TapeOf(a);
  const int ia = a.id();
  return t.Push(a.value().cwiseInverse(), {a}, [ia](Tape& t, int self) {
    // d(1/x) = -1/x^2 = -(1/x)^2
    const Matrix& y = t.value(self);
    t.grad(ia) -= t.grad(self).cwiseProduct(y.cwiseProduct(y));
  });
}

Var AddRow(Var a, Var row) {
  Tape& t = SameTape(a, row);
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw DimensionError("AddRow: bias width " + std::to_string(row.cols()) +
                         " vs " + std::to_string(a.cols()));
  }
  const int ia = a.id(), ir = row.id();
  Matrix out = a.value().rowwise() + row.value().row(0);
  return t.Push(std::move(out), {a, row}, [ia, ir](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ia)) t.grad(ia) += g;
    if (t.requires_grad(ir)) t.grad(ir) += g.colwise().sum();
  });
}

Var Relu(Var a) {
  Tape& t = TapeOf(a);
  const int ia = a.id();
  return t.Push(a.value().cwiseMax(0.0), {a}, [ia](Tape& t, int self) {
    const Matrix& x = t.value(ia);
    t.grad(ia) +=
        t.grad(self).cwiseProduct((x.array() > 0.0).cast<double>().matrix());
  });
}

Var Tanh(Var a) {
  Tape& t = TapeOf(a);
  const int ia = a.id();
  return t.Push(a.value().array().tanh().matrix(), {a},
                [ia](Tape& t, int self) {
                  const Matrix& y = t.value(self);
                  t.grad(ia).array() +=
                      t.grad(self).array() * (1.0 - y.array().square());
                });
}

Var Sigmoid(Var a) {
  Tape& t = TapeOf(a);
  const int ia = a.id();
  Matrix y = (1.0 + (-a.value().array()).exp()).inverse().matrix();
  return t.Push(std::move(y), {a}, [ia](Tape& t, int self) {
    const Matrix& y = t.value(self);
    t.grad(ia).array() += t.grad(self).array() * y.array() * (1.0 - y.array());
  });
}

Var Exp(Var a) {
  Tape& t = TapeOf(a);
  const int ia = a.id();
  return t.Push(a.value().array().exp().matrix(), {a}, [ia](Tape& t, int self) {
    t.grad(ia) += t.grad(self).cwiseProduct(t.value(self));
  });
}

Var Clamp(Var a, double lo, double hi) {
  Tape& t = TapeOf(a);
  const int ia = a.id();
  return t.Push(a.value().cwiseMax(lo).cwiseMin(hi), {a},
                [ia, lo, hi](Tape& t, int self) {
                  const Matrix& x = t.value(ia);
                  const auto inside =
                      ((x.array() > lo) && (x.array() < hi)).cast<double>();
                  t.grad(ia).array() += t.grad(self).array() * inside;
                });
}

Var Transpose(Var a) {
  Tape& t = TapeOf(a);
  const int ia = a.id();
  return t.Push(a.value().transpose(), {a}, [ia](Tape& t, int self) {
    t.grad(ia) += t.grad(self).transpose();
  });
}

Var ConcatCols(Var a, Var b) {
  Tape& t = SameTape(a, b);
  if (a.rows() != b.rows()) throw DimensionError("ConcatCols: row mismatch");
  const Eigen::Index ca = a.cols(), cb = b.cols();
  Matrix out(a.rows(), ca + cb);
  out << a.value(), b.value();
  const int ia = a.id(), ib = b.id();
  return t.Push(std::move(out), {a, b}, [ia, ib, ca, cb](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.requires_grad(ia)) t.grad(ia) += g.leftCols(ca);
    if (t.requires_grad(ib)) t.grad(ib) += g.rightCols(cb);
  });
}

Var SliceCols(Var a, Eigen::Index start, Eigen::Index count) {
  Tape& t = TapeOf(a);
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw DimensionError("SliceCols out of range");
  }
  const int ia = a.id();
  return t.Push(a.value().middleCols(start, count), {a},
                [ia, start, count](Tape& t, int self) {
                  t.grad(ia).middleCols(start, count) += t.grad(self);
                });
}

Var GatherRows(Var a, std::span<const uint32_t> rows) {
  Tape& t = TapeOf(a);
  const Matrix& x = a.value();
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= x.rows()) throw DimensionError("GatherRows index out of range");
    out.row(r) = x.row(rows[r]);
  }
  const int ia = a.id();
  std::vector<uint32_t> idx(rows.begin(), rows.end());
  return t.Push(std::move(out), {a},
                [ia, idx = std::move(idx)](Tape& t, int self) {
                  const Matrix& g = t.grad(self);
                  Matrix& ga = t.grad(ia);
                  for (size_t r = 0; r < idx.size(); ++r) {
                    ga.row(idx[r]) += g.row(r);
                  }
                });
}

Var MeanRows(Var a) {
  Tape& t = TapeOf(a);
  if (a.rows() == 0) throw DimensionError("MeanRows of an empty matrix");
  const int ia = a.id();
  const double inv = 1.0 / static_cast<double>(a.rows());
  return t.Push(a.value().colwise().mean(), {a}, [ia, inv](Tape& t, int self) {
    t.grad(ia).rowwise() += inv * t.grad(self).row(0);
  });
}

Var MaxRows(Var a) {
  const uint32_t offsets[2] = {0, static_cast<uint32_t>(a.rows())};
  return SegmentMax(a, offsets);
}

Var SegmentMax(Var a, std::span<const uint32_t> offsets) {
  Tape& t = TapeOf(a);
  const Matrix& x = a.value();
  if (offsets.size() < 2 || offsets.back() != x.rows()) {
    throw DimensionError("SegmentMax offsets do not cover the input rows");
  }
  const size_t groups = offsets.size() - 1;
  const Eigen::Index cols = x.cols();
  Matrix out(static_cast<Eigen::Index>(groups), cols);
  // Winning row per (group, column); the first maximal row wins ties.
  std::vector<uint32_t> argmax(groups * cols);
  for (size_t g = 0; g < groups; ++g) {
    if (offsets[g] >= offsets[g + 1]) {
      throw DimensionError("SegmentMax group " + std::to_string(g) +
                           " is empty");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      uint32_t best = offsets[g];
      for (uint32_t r = offsets[g] + 1; r < offsets[g + 1]; ++r) {
        if (x(r, c) > x(best, c)) best = r;
      }
      argmax[g * cols + c] = best;
      out(g, c) = x(best, c);
    }
  }
  const int ia = a.id();
  return t.Push(std::move(out), {a},
                [ia, cols, argmax = std::move(argmax)](Tape& t, int self) {
                  const Matrix& g = t.grad(self);
                  Matrix& ga = t.grad(ia);
                  for (Eigen::Index grp = 0; grp < g.rows(); ++grp) {
                    for (Eigen::Index c = 0; c < cols; ++c) {
                      ga(argmax[grp * cols + c], c) += g(grp, c);
                    }
                  }
                });
}

Var Sum(Var a) {
  Tape& t = TapeOf(a);
  const int ia = a.id();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return t.Push(std::move(out), {a}, [ia](Tape& t, int self) {
    t.grad(ia).array() += t.grad(self)(0, 0);
  });
}

}  // namespace semsteer::ad
