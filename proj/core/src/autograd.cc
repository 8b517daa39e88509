/* Copyright 2026 The semcast Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "semcast/autograd.h"

#include <cmath>
#include <stdexcept>

#include "semcast/common.h"

namespace semcast {
namespace {

void CheckSameShape(const Mat& a, const Mat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()));
  }
}

}  // namespace

Parameter& ParamSet::Add(const std::string& name, Mat init) {
  if (index_.count(name)) throw std::invalid_argument("duplicate parameter " + name);
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->value = std::move(init);
  p->ZeroGrad();
  index_[name] = params_.size();
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter& ParamSet::AddGlorot(const std::string& name, int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.Uniform(-limit, limit);
  }
  return Add(name, std::move(m));
}

Parameter& ParamSet::AddZeros(const std::string& name, int rows, int cols) {
  return Add(name, Mat::Zero(rows, cols));
}

Parameter& ParamSet::AddConstant(const std::string& name, int rows, int cols, double v) {
  return Add(name, Mat::Constant(rows, cols, v));
}

Parameter& ParamSet::at(const std::string& name) {
  const auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter " + name);
  return *params_[it->second];
}

const Parameter& ParamSet::at(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter " + name);
  return *params_[it->second];
}

std::vector<Parameter*> ParamSet::all() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParamSet::all() const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParamSet::WithPrefix(const std::string& prefix) const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) {
    if (p->name.rfind(prefix, 0) == 0) out.push_back(p.get());
  }
  return out;
}

int64_t ParamSet::NumScalars() const {
  int64_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParamSet::ZeroGrad() {
  for (auto& p : params_) p->ZeroGrad();
}

Var Graph::Constant(Mat value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return {static_cast<int>(nodes_.size()) - 1};
}

Var Graph::Param(Parameter& p) {
  if (const auto it = param_nodes_.find(&p); it != param_nodes_.end()) return {it->second};
  Node n;
  n.value = p.value;
  n.needs_grad = record_;
  n.param = &p;
  nodes_.push_back(std::move(n));
  const int id = static_cast<int>(nodes_.size()) - 1;
  param_nodes_[&p] = id;
  return {id};
}

Var Graph::Emit(Mat value, std::vector<int> inputs,
                std::function<void(Graph&, int)> backward) {
  Node n;
  n.value = std::move(value);
  if (record_) {
    for (int i : inputs) n.needs_grad = n.needs_grad || nodes_[i].needs_grad;
    if (n.needs_grad) n.backward = std::move(backward);
  }
  nodes_.push_back(std::move(n));
  return {static_cast<int>(nodes_.size()) - 1};
}

Mat& Graph::mutable_grad(int id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) n.grad.setZero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Graph::Backward(Var scalar) {
  if (!record_) throw std::logic_error("Backward on a non-recording graph");
  if (nodes_[scalar.id].value.size() != 1) {
    throw std::invalid_argument("Backward needs a 1x1 output");
  }
  mutable_grad(scalar.id)(0, 0) += 1.0;
  for (int id = scalar.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0 || !n.needs_grad) continue;
    if (n.backward) n.backward(*this, id);
    if (n.param != nullptr) n.param->grad += n.grad;
  }
}

Var MatMul(Graph& g, Var a, Var b) {
  const Mat& A = g.value(a);
  const Mat& B = g.value(b);
  if (A.cols() != B.rows()) {
    throw std::invalid_argument("MatMul: inner dimensions " + std::to_string(A.cols()) +
                                " vs " + std::to_string(B.rows()));
  }
  return g.Emit(A * B, {a.id, b.id}, [a, b](Graph& g, int self) {
    const Mat& G = g.grad(Var{self});
    if (g.needs_grad(a.id)) g.mutable_grad(a.id).noalias() += G * g.value(b).transpose();
    if (g.needs_grad(b.id)) g.mutable_grad(b.id).noalias() += g.value(a).transpose() * G;
  });
}

Var Add(Graph& g, Var a, Var b) {
  CheckSameShape(g.value(a), g.value(b), "Add");
  return g.Emit(g.value(a) + g.value(b), {a.id, b.id}, [a, b](Graph& g, int self) {
    const Mat& G = g.grad(Var{self});
    if (g.needs_grad(a.id)) g.mutable_grad(a.id) += G;
    if (g.needs_grad(b.id)) g.mutable_grad(b.id) += G;
  });
}

Var Sub(Graph& g, Var a, Var b) {
  CheckSameShape(g.value(a), g.value(b), "Sub");
  return g.Emit(g.value(a) - g.value(b), {a.id, b.id}, [a, b](Graph& g, int self) {
    const Mat& G = g.grad(Var{self});
    if (g.needs_grad(a.id)) g.mutable_grad(a.id) += G;
    if (g.needs_grad(b.id)) g.mutable_grad(b.id) -= G;
  });
}

Var Mul(Graph& g, Var a, Var b) {
  CheckSameShape(g.value(a), g.value(b), "Mul");
  return g.Emit(g.value(a).cwiseProduct(g.value(b)), {a.id, b.id},
                [a, b](Graph& g, int self) {
                  const Mat& G = g.grad(Var{self});
                  if (g.needs_grad(a.id)) {
                    g.mutable_grad(a.id) += G.cwiseProduct(g.value(b));
                  }
                  if (g.needs_grad(b.id)) {
                    g.mutable_grad(b.id) += G.cwiseProduct(g.value(a));
                  }
                });
}

Var AddRowBroadcast(Graph& g, Var a, Var row) {
  const Mat& A = g.value(a);
  const Mat& R = g.value(row);
  if (R.rows() != 1 || R.cols() != A.cols()) {
    throw std::invalid_argument("AddRowBroadcast: row must be 1 x cols(a)");
  }
  Mat out = A.rowwise() + R.row(0);
  return g.Emit(std::move(out), {a.id, row.id}, [a, row](Graph& g, int self) {
    const Mat& G = g.grad(Var{self});
    if (g.needs_grad(a.id)) g.mutable_grad(a.id) += G;
    if (g.needs_grad(row.id)) g.mutable_grad(row.id) += G.colwise().sum();
  });
}

Var Scale(Graph& g, Var a, double c) {
  return g.Emit(g.value(a) * c, {a.id}, [a, c](Graph& g, int self) {
    g.mutable_grad(a.id) += g.grad(Var{self}) * c;
  });
}

Var ScaleBy(Graph& g, Var a, Var s) {
  if (g.value(s).size() != 1) throw std::invalid_argument("ScaleBy: scale must be 1x1");
  return g.Emit(g.value(a) * g.value(s)(0, 0), {a.id, s.id}, [a, s](Graph& g, int self) {
    const Mat& G = g.grad(Var{self});
    if (g.needs_grad(a.id)) g.mutable_grad(a.id) += G * g.value(s)(0, 0);
    if (g.needs_grad(s.id)) g.mutable_grad(s.id)(0, 0) += G.cwiseProduct(g.value(a)).sum();
  });
}

Var Relu(Graph& g, Var a) {
  return g.Emit(g.value(a).cwiseMax(0.0), {a.id}, [a](Graph& g, int self) {
    const Mat& A = g.value(a);
    g.mutable_grad(a.id) +=
        g.grad(Var{self}).cwiseProduct((A.array() > 0.0).cast<double>().matrix());
  });
}

Var Tanh(Graph& g, Var a) {
  return g.Emit(g.value(a).array().tanh().matrix(), {a.id}, [a](Graph& g, int self) {
    const Mat& Y = g.value(Var{self});
    g.mutable_grad(a.id) +=
        (g.grad(Var{self}).array() * (1.0 - Y.array().square())).matrix();
  });
}

Var Softplus(Graph& g, Var a) {
  const Mat& A = g.value(a);
  // log(1 + e^x) = max(x, 0) + log1p(e^-|x|)
  Mat out = A.unaryExpr([](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); });
  return g.Emit(std::move(out), {a.id}, [a](Graph& g, int self) {
    const Mat sig = g.value(a).unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
    g.mutable_grad(a.id) += g.grad(Var{self}).cwiseProduct(sig);
  });
}

Var Exp(Graph& g, Var a) {
  return g.Emit(g.value(a).array().exp().matrix(), {a.id}, [a](Graph& g, int self) {
    g.mutable_grad(a.id) += g.grad(Var{self}).cwiseProduct(g.value(Var{self}));
  });
}

Var Log(Graph& g, Var a) {
  return g.Emit(g.value(a).array().log().matrix(), {a.id}, [a](Graph& g, int self) {
    g.mutable_grad(a.id) += g.grad(Var{self}).cwiseQuotient(g.value(a));
  });
}

Var AddScalar(Graph& g, Var a, double c) {
  return g.Emit((g.value(a).array() + c).matrix(), {a.id}, [a](Graph& g, int self) {
    g.mutable_grad(a.id) += g.grad(Var{self});
  });
}

Var Sum(Graph& g, Var a) {
  Mat out(1, 1);
  out(0, 0) = g.value(a).sum();
  return g.Emit(std::move(out), {a.id}, [a](Graph& g, int self) {
    g.mutable_grad(a.id).array() += g.grad(Var{self})(0, 0);
  });
}

Var Mean(Graph& g, Var a) {
  const double n = static_cast<double>(g.value(a).size());
  Mat out(1, 1);
  out(0, 0) = g.value(a).sum() / n;
  return g.Emit(std::move(out), {a.id}, [a, n](Graph& g, int self) {
    g.mutable_grad(a.id).array() += g.grad(Var{self})(0, 0) / n;
  });
}

Var MeanRows(Graph& g, Var a) {
  const double n = static_cast<double>(g.value(a).rows());
  Mat out = g.value(a).colwise().sum() / n;
  return g.Emit(std::move(out), {a.id}, [a, n](Graph& g, int self) {
    g.mutable_grad(a.id).rowwise() += g.grad(Var{self}).row(0) / n;
  });
}

Var Transpose(Graph& g, Var a) {
  return g.Emit(g.value(a).transpose(), {a.id}, [a](Graph& g, int self) {
    g.mutable_grad(a.id) += g.grad(Var{self}).transpose();
  });
}

Var ConcatRows(Graph& g, const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("ConcatRows: no inputs");
  const Eigen::Index cols = g.value(parts[0]).cols();
  Eigen::Index rows = 0;
  std::vector<int> ids;
  for (Var p : parts) {
    if (g.value(p).cols() != cols) throw std::invalid_argument("ConcatRows: column mismatch");
    rows += g.value(p).rows();
    ids.push_back(p.id);
  }
  Mat out(rows, cols);
  Eigen::Index r = 0;
  for (Var p : parts) {
    out.middleRows(r, g.value(p).rows()) = g.value(p);
    r += g.value(p).rows();
  }
  return g.Emit(std::move(out), ids, [parts](Graph& g, int self) {
    Eigen::Index r = 0;
    for (Var p : parts) {
      const Eigen::Index n = g.value(p).rows();
      if (g.needs_grad(p.id)) g.mutable_grad(p.id) += g.grad(Var{self}).middleRows(r, n);
      r += n;
    }
  });
}

Var ConcatCols(Graph& g, const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("ConcatCols: no inputs");
  const Eigen::Index rows = g.value(parts[0]).rows();
  Eigen::Index cols = 0;
  std::vector<int> ids;
  for (Var p : parts) {
    if (g.value(p).rows() != rows) throw std::invalid_argument("ConcatCols: row mismatch");
    cols += g.value(p).cols();
    ids.push_back(p.id);
  }
  Mat out(rows, cols);
  Eigen::Index c = 0;
  for (Var p : parts) {
    out.middleCols(c, g.value(p).cols()) = g.value(p);
    c += g.value(p).cols();
  }
  return g.Emit(std::move(out), ids, [parts](Graph& g, int self) {
    Eigen::Index c = 0;
    for (Var p : parts) {
      const Eigen::Index n = g.value(p).cols();
      if (g.needs_grad(p.id)) g.mutable_grad(p.id) += g.grad(Var{self}).middleCols(c, n);
      c += n;
    }
  });
}

Var SliceRows(Graph& g, Var a, int start, int count) {
  if (start < 0 || count < 0 || start + count > g.value(a).rows()) {
    throw std::invalid_argument("SliceRows: out of range");
  }
  return g.Emit(g.value(a).middleRows(start, count), {a.id},
                [a, start, count](Graph& g, int self) {
                  g.mutable_grad(a.id).middleRows(start, count) += g.grad(Var{self});
                });
}

Var SliceCols(Graph& g, Var a, int start, int count) {
  if (start < 0 || count < 0 || start + count > g.value(a).cols()) {
    throw std::invalid_argument("SliceCols: out of range");
  }
  return g.Emit(g.value(a).middleCols(start, count), {a.id},
                [a, start, count](Graph& g, int self) {
                  g.mutable_grad(a.id).middleCols(start, count) += g.grad(Var{self});
                });
}

Var SoftmaxRows(Graph& g, Var a) {
  const Mat& A = g.value(a);
  Mat out = (A.colwise() - A.rowwise().maxCoeff()).array().exp().matrix();
  out.array().colwise() /= out.rowwise().sum().array();
  return g.Emit(std::move(out), {a.id}, [a](Graph& g, int self) {
    const Mat& Y = g.value(Var{self});
    const Mat& G = g.grad(Var{self});
    const Eigen::VectorXd dot = G.cwiseProduct(Y).rowwise().sum();
    g.mutable_grad(a.id) += (Y.array() * (G.colwise() - dot).array()).matrix();
  });
}

Var LayerNorm(Graph& g, Var a, Var gamma, Var beta, double eps) {
  const Mat& X = g.value(a);
  const Eigen::Index d = X.cols();
  if (g.value(gamma).rows() != 1 || g.value(gamma).cols() != d ||
      g.value(beta).rows() != 1 || g.value(beta).cols() != d) {
    throw std::invalid_argument("LayerNorm: gamma/beta must be 1 x d");
  }
  const Eigen::VectorXd mu = X.rowwise().mean();
  Mat xc = X.colwise() - mu;
  const Eigen::VectorXd inv_std =
      ((xc.array().square().rowwise().sum() / static_cast<double>(d)) + eps).rsqrt();
  Mat xhat = xc.array().colwise() * inv_std.array();
  Mat out = (xhat.array().rowwise() * g.value(gamma).row(0).array()).matrix();
  out.rowwise() += g.value(beta).row(0);
  return g.Emit(std::move(out), {a.id, gamma.id, beta.id},
                [a, gamma, beta, xhat = std::move(xhat), inv_std](Graph& g, int self) {
                  const Mat& G = g.grad(Var{self});
                  if (g.needs_grad(gamma.id)) {
                    g.mutable_grad(gamma.id) += G.cwiseProduct(xhat).colwise().sum();
                  }
                  if (g.needs_grad(beta.id)) g.mutable_grad(beta.id) += G.colwise().sum();
                  if (g.needs_grad(a.id)) {
                    const double d = static_cast<double>(xhat.cols());
                    const Mat gx =
                        (G.array().rowwise() * g.value(gamma).row(0).array()).matrix();
                    const Eigen::VectorXd m1 = gx.rowwise().mean();
                    const Eigen::VectorXd m2 = gx.cwiseProduct(xhat).rowwise().sum() / d;
                    Mat dx = gx.colwise() - m1;
                    dx -= (xhat.array().colwise() * m2.array()).matrix();
                    g.mutable_grad(a.id) += (dx.array().colwise() * inv_std.array()).matrix();
                  }
                });
}

}  // namespace semcast
