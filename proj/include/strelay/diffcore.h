// Copyright 2026 The STRelay Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STRELAY_DIFFCORE_H_
#define STRELAY_DIFFCORE_H_

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "strelay/common.h"

// A small reverse-mode differentiation kernel over row-major matrices of
// doubles. Computations are recorded on a Tape; parameters live in a
// ParamStore and are aliased (not copied) by the tape, so backward()
// accumulates straight into the parameter gradient slots.
namespace strelay::ad {

class ShapeError : public Error {
 public:
  using Error::Error;
};

struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> value;
  std::vector<double> grad;

  size_t size() const { return value.size(); }
  double& at(int r, int c) { return value[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const {
    return value[static_cast<size_t>(r) * cols + c];
  }
};

// Named parameters, iterated in name order.
class ParamStore {
 public:
  // Adds a tensor initialized uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)).
  Tensor& add_uniform(const std::string& name, int rows, int cols, int fan_in,
                      Rng& rng);
  Tensor& add_zeros(const std::string& name, int rows, int cols);

  bool contains(const std::string& name) const;
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;

  void zero_grad();
  size_t num_scalars() const;

  std::map<std::string, Tensor>& tensors() { return tensors_; }
  const std::map<std::string, Tensor>& tensors() const { return tensors_; }

 private:
  Tensor& insert(const std::string& name, int rows, int cols);

  std::map<std::string, Tensor> tensors_;
};

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

class Tape {
 public:
  // With record = false no backward closures are kept (inference only).
  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf aliasing a parameter. Repeated calls return the same node.
  Var param(Tensor& t);
  Var constant(int rows, int cols, std::vector<double> values);

  int rows(Var v) const { return nodes_.at(v.id).rows; }
  int cols(Var v) const { return nodes_.at(v.id).cols; }
  std::span<const double> value(Var v) const;
  double scalar(Var v) const;
  std::span<double> grad(Var v);
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  size_t num_nodes() const { return nodes_.size(); }

  // Seeds d(loss)/d(loss) = 1 and runs every recorded closure in reverse
  // creation order, which is a reverse topological order.
  void backward(Var loss);

  // Op authoring interface. `inputs` decides whether the result needs a
  // gradient; `backward` is dropped when it does not or when not recording.
  using Backward = std::function<void(Tape&, int self)>;
  Var emit(int rows, int cols, std::vector<double> value,
           std::initializer_list<Var> inputs, Backward backward);
  Var emit(int rows, int cols, std::vector<double> value,
           std::span<const Var> inputs, Backward backward);
  std::span<double> mutable_value(Var v);

 private:
  struct Node {
    int rows = 0;
    int cols = 0;
    std::vector<double> value;
    std::vector<double> grad;
    Tensor* param = nullptr;
    bool requires_grad = false;
    Backward backward;
  };

  bool record_;
  std::vector<Node> nodes_;
  std::map<const Tensor*, int> param_nodes_;
};

// Row `index` of a table, as a 1 x cols vector.
Var embed(Tape& tape, Var table, int index);
Var matmul(Tape& tape, Var a, Var b);     // a * b
Var matmul_nt(Tape& tape, Var a, Var b);  // a * b^T
Var add(Tape& tape, Var a, Var b);
Var sub(Tape& tape, Var a, Var b);
Var mul(Tape& tape, Var a, Var b);  // elementwise
Var scale(Tape& tape, Var a, double s);
// Adds a 1 x cols bias to every row of a.
Var add_bias(Tape& tape, Var a, Var bias);
Var tanh(Tape& tape, Var a);
Var sigmoid(Tape& tape, Var a);
// Horizontal concatenation of 1 x n vectors.
Var concat(Tape& tape, std::span<const Var> parts);
Var concat(Tape& tape, std::initializer_list<Var> parts);
// Row-wise softmax.
Var softmax(Tape& tape, Var a);
// -log softmax(logits)[target] for a 1 x C logit vector, natural log.
Var cross_entropy(Tape& tape, Var logits, int target);
// sum_j weights[j] * xs[j] with constant weights.
Var weighted_sum(Tape& tape, std::span<const Var> xs,
                 std::span<const double> weights);
Var sum(Tape& tape, std::span<const Var> xs);

// Keys and values of an attention block, already projected.
struct ProjectedKV {
  Var keys;
  Var values;
};

struct AttentionOut {
  Var output;   // 1 x d
  Var weights;  // 1 x M
};

ProjectedKV project_kv(Tape& tape, Var keys, Var values, Var w_k, Var w_v);
// softmax(q K^T / sqrt(d)) V with q = query * w_q.
AttentionOut attend(Tape& tape, Var query, Var w_q, const ProjectedKV& kv);
AttentionOut attention(Tape& tape, Var query, Var keys, Var values, Var w_q,
                       Var w_k, Var w_v);

struct Dense {
  Var weight;  // in x out
  Var bias;    // 1 x out
};

// tanh on hidden layers, identity on the last one.
Var mlp(Tape& tape, Var input, std::span<const Dense> layers);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  size_t entries_checked = 0;
};

// Builds the scalar loss on the given tape.
using LossFn = std::function<Var(Tape&)>;

// Compares analytic gradients of every parameter entry against central
// differences. Relative error is |a - f| / max(1e-8, |a| + |f|).
GradCheckResult grad_check(const LossFn& loss, ParamStore& params,
                           double eps = 1e-6);

// Builds a loss given as a list of terms whose sum is the objective.
using LossTermsFn = std::function<std::vector<Var>(Tape&)>;

// Same check, but the central difference is taken term by term and then
// summed. This is the same estimate in exact arithmetic. It avoids losing
// the small per-entry change in the rounding of a large total.
GradCheckResult grad_check(const LossTermsFn& terms, ParamStore& params,
                           double eps = 1e-6);

}  // namespace strelay::ad

#endif  // STRELAY_DIFFCORE_H_
