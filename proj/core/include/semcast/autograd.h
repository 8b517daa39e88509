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

// Minimal reverse-mode automatic differentiation over dense double matrices.
// A Graph records one forward pass; Backward() replays it in reverse and
// accumulates gradients into the Parameters it touched.

#ifndef SEMCAST_AUTOGRAD_H_
#define SEMCAST_AUTOGRAD_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace semcast {

using Mat = Eigen::MatrixXd;

class Rng;

// Trainable tensor with its gradient buffer.
struct Parameter {
  std::string name;
  Mat value;
  Mat grad;

  void ZeroGrad() { grad.setZero(value.rows(), value.cols()); }
};

// Ordered, name-addressable set of parameters. Registration order defines the
// checkpoint layout and the optimizer's reduction order.
class ParamSet {
 public:
  Parameter& Add(const std::string& name, Mat init);
  // Glorot-uniform initialized rows x cols tensor.
  Parameter& AddGlorot(const std::string& name, int rows, int cols, Rng& rng);
  Parameter& AddZeros(const std::string& name, int rows, int cols);
  Parameter& AddConstant(const std::string& name, int rows, int cols, double v);

  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  // Parameters whose name starts with `prefix`.
  std::vector<const Parameter*> WithPrefix(const std::string& prefix) const;
  size_t size() const { return params_.size(); }
  int64_t NumScalars() const;
  void ZeroGrad();

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, size_t> index_;
};

class Graph;

// Handle to a node of a Graph.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

class Graph {
 public:
  // When `record` is false no backward closures are kept (inference).
  explicit Graph(bool record = true) : record_(record) {}

  Var Constant(Mat value);
  Var Param(Parameter& p);

  const Mat& value(Var v) const { return nodes_[v.id].value; }
  const Mat& grad(Var v) const { return nodes_[v.id].grad; }
  bool recording() const { return record_; }
  size_t num_nodes() const { return nodes_.size(); }

  // Seeds d(v)/d(v) = 1 for a 1x1 node and accumulates parameter gradients.
  void Backward(Var scalar);

  // Used by op implementations.
  Var Emit(Mat value, std::vector<int> inputs, std::function<void(Graph&, int)> backward);
  Mat& mutable_grad(int id);
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool needs_grad = false;
    Parameter* param = nullptr;
    std::function<void(Graph&, int)> backward;
  };
  bool record_;
  std::vector<Node> nodes_;
  std::map<const Parameter*, int> param_nodes_;
};

// Elementwise and linear-algebra ops. Shapes follow Eigen conventions; row
// vectors are 1 x n matrices.
Var MatMul(Graph& g, Var a, Var b);
Var Add(Graph& g, Var a, Var b);
Var Sub(Graph& g, Var a, Var b);
Var Mul(Graph& g, Var a, Var b);          // elementwise
Var AddRowBroadcast(Graph& g, Var a, Var row);  // a (n x d) + row (1 x d)
Var Scale(Graph& g, Var a, double c);
Var ScaleBy(Graph& g, Var a, Var s);      // a * s, s is 1 x 1
Var Relu(Graph& g, Var a);
Var Tanh(Graph& g, Var a);
Var Softplus(Graph& g, Var a);
Var Exp(Graph& g, Var a);
Var Log(Graph& g, Var a);
Var AddScalar(Graph& g, Var a, double c);
Var Sum(Graph& g, Var a);                 // 1 x 1
Var Mean(Graph& g, Var a);                // 1 x 1
Var MeanRows(Graph& g, Var a);            // 1 x d
Var Transpose(Graph& g, Var a);
Var ConcatRows(Graph& g, const std::vector<Var>& parts);
Var ConcatCols(Graph& g, const std::vector<Var>& parts);
Var SliceRows(Graph& g, Var a, int start, int count);
Var SliceCols(Graph& g, Var a, int start, int count);
Var SoftmaxRows(Graph& g, Var a);
// Row-wise layer normalization with learned gain and bias (1 x d each).
Var LayerNorm(Graph& g, Var a, Var gamma, Var beta, double eps = 1e-5);

}  // namespace semcast

#endif  // SEMCAST_AUTOGRAD_H_
