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

#include "strelay/diffcore.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace strelay::ad {
namespace {

std::string shape_str(const Tape& t, Var v) {
  return std::to_string(t.rows(v)) + "x" + std::to_string(t.cols(v));
}

void require_same_shape(const Tape& t, Var a, Var b, const char* op) {
  if (t.rows(a) != t.rows(b) || t.cols(a) != t.cols(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(t, a) +
                     " vs " + shape_str(t, b));
  }
}

}  // namespace

// --- ParamStore -------------------------------------------------------------

Tensor& ParamStore::insert(const std::string& name, int rows, int cols) {
  if (rows < 1 || cols < 1) {
    throw ShapeError("parameter " + name + " needs positive dimensions");
  }
  auto [it, inserted] = tensors_.try_emplace(name);
  if (!inserted) throw Error("duplicate parameter name " + name);
  Tensor& t = it->second;
  t.rows = rows;
  t.cols = cols;
  t.value.assign(static_cast<size_t>(rows) * cols, 0.0);
  t.grad.assign(t.value.size(), 0.0);
  return t;
}

Tensor& ParamStore::add_uniform(const std::string& name, int rows, int cols,
                                int fan_in, Rng& rng) {
  Tensor& t = insert(name, rows, cols);
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& v : t.value) v = rng.uniform(-bound, bound);
  return t;
}

Tensor& ParamStore::add_zeros(const std::string& name, int rows, int cols) {
  return insert(name, rows, cols);
}

bool ParamStore::contains(const std::string& name) const {
  return tensors_.count(name) > 0;
}

Tensor& ParamStore::get(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw Error("unknown parameter " + name);
  return it->second;
}

const Tensor& ParamStore::get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw Error("unknown parameter " + name);
  return it->second;
}

void ParamStore::zero_grad() {
  for (auto& [name, t] : tensors_) std::fill(t.grad.begin(), t.grad.end(), 0.0);
}

size_t ParamStore::num_scalars() const {
  size_t n = 0;
  for (const auto& [name, t] : tensors_) n += t.size();
  return n;
}

// --- Tape -------------------------------------------------------------------

Var Tape::param(Tensor& t) {
  if (auto it = param_nodes_.find(&t); it != param_nodes_.end()) {
    return Var{it->second};
  }
  Node n;
  n.rows = t.rows;
  n.cols = t.cols;
  n.param = &t;
  n.requires_grad = record_;
  nodes_.push_back(std::move(n));
  const int id = static_cast<int>(nodes_.size()) - 1;
  param_nodes_.emplace(&t, id);
  return Var{id};
}

Var Tape::constant(int rows, int cols, std::vector<double> values) {
  if (static_cast<size_t>(rows) * cols != values.size()) {
    throw ShapeError("constant: value count does not match shape");
  }
  Node n;
  n.rows = rows;
  n.cols = cols;
  n.value = std::move(values);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

std::span<const double> Tape::value(Var v) const {
  const Node& n = nodes_.at(v.id);
  return n.param ? std::span<const double>(n.param->value)
                 : std::span<const double>(n.value);
}

std::span<double> Tape::mutable_value(Var v) {
  Node& n = nodes_.at(v.id);
  return n.param ? std::span<double>(n.param->value)
                 : std::span<double>(n.value);
}

double Tape::scalar(Var v) const {
  const auto val = value(v);
  if (val.size() != 1) throw ShapeError("scalar: node is not 1x1");
  return val[0];
}

std::span<double> Tape::grad(Var v) {
  Node& n = nodes_.at(v.id);
  if (n.param) return n.param->grad;
  if (n.grad.size() != n.value.size()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

Var Tape::emit(int rows, int cols, std::vector<double> value,
               std::initializer_list<Var> inputs, Backward backward) {
  return emit(rows, cols, std::move(value),
              std::span<const Var>(inputs.begin(), inputs.size()),
              std::move(backward));
}

Var Tape::emit(int rows, int cols, std::vector<double> value,
               std::span<const Var> inputs, Backward backward) {
  Node n;
  n.rows = rows;
  n.cols = cols;
  n.value = std::move(value);
  if (record_) {
    for (Var in : inputs) {
      if (nodes_.at(in.id).requires_grad) {
        n.requires_grad = true;
        break;
      }
    }
    if (n.requires_grad) {
      n.grad.assign(n.value.size(), 0.0);
      n.backward = std::move(backward);
    }
  }
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

void Tape::backward(Var loss) {
  if (!record_) throw Error("backward on a non-recording tape");
  if (value(loss).size() != 1) throw ShapeError("backward: loss must be 1x1");
  if (!nodes_.at(loss.id).requires_grad) return;
  grad(loss)[0] += 1.0;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.backward) n.backward(*this, id);
  }
}

// --- Ops --------------------------------------------------------------------

Var embed(Tape& tape, Var table, int index) {
  if (index < 0 || index >= tape.rows(table)) {
    throw ShapeError("embed: index " + std::to_string(index) +
                     " out of range for table with " +
                     std::to_string(tape.rows(table)) + " rows");
  }
  const int cols = tape.cols(table);
  const auto tv = tape.value(table);
  std::vector<double> out(tv.begin() + static_cast<size_t>(index) * cols,
                          tv.begin() + static_cast<size_t>(index + 1) * cols);
  return tape.emit(1, cols, std::move(out), {table},
                   [table, index, cols](Tape& t, int self) {
                     const auto g = t.grad(Var{self});
                     auto tg = t.grad(table);
                     double* row = tg.data() + static_cast<size_t>(index) * cols;
                     for (int c = 0; c < cols; ++c) row[c] += g[c];
                   });
}

Var matmul(Tape& tape, Var a, Var b) {
  const int r = tape.rows(a), k = tape.cols(a), c = tape.cols(b);
  if (tape.rows(b) != k) {
    throw ShapeError("matmul: " + shape_str(tape, a) + " * " +
                     shape_str(tape, b));
  }
  const auto av = tape.value(a);
  const auto bv = tape.value(b);
  std::vector<double> out(static_cast<size_t>(r) * c, 0.0);
  for (int i = 0; i < r; ++i) {
    for (int p = 0; p < k; ++p) {
      const double x = av[static_cast<size_t>(i) * k + p];
      if (x == 0.0) continue;
      const double* brow = bv.data() + static_cast<size_t>(p) * c;
      double* orow = out.data() + static_cast<size_t>(i) * c;
      for (int j = 0; j < c; ++j) orow[j] += x * brow[j];
    }
  }
  return tape.emit(r, c, std::move(out), {a, b}, [a, b, r, k, c](Tape& t,
                                                                 int self) {
    const auto g = t.grad(Var{self});
    if (t.requires_grad(a)) {
      const auto bv = t.value(b);
      auto ag = t.grad(a);
      for (int i = 0; i < r; ++i) {
        const double* grow = g.data() + static_cast<size_t>(i) * c;
        for (int p = 0; p < k; ++p) {
          const double* brow = bv.data() + static_cast<size_t>(p) * c;
          double acc = 0.0;
          for (int j = 0; j < c; ++j) acc += grow[j] * brow[j];
          ag[static_cast<size_t>(i) * k + p] += acc;
        }
      }
    }
    if (t.requires_grad(b)) {
      const auto av = t.value(a);
      auto bg = t.grad(b);
      for (int i = 0; i < r; ++i) {
        const double* grow = g.data() + static_cast<size_t>(i) * c;
        for (int p = 0; p < k; ++p) {
          const double x = av[static_cast<size_t>(i) * k + p];
          if (x == 0.0) continue;
          double* brow = bg.data() + static_cast<size_t>(p) * c;
          for (int j = 0; j < c; ++j) brow[j] += x * grow[j];
        }
      }
    }
  });
}

Var matmul_nt(Tape& tape, Var a, Var b) {
  const int r = tape.rows(a), k = tape.cols(a), c = tape.rows(b);
  if (tape.cols(b) != k) {
    throw ShapeError("matmul_nt: " + shape_str(tape, a) + " * (" +
                     shape_str(tape, b) + ")^T");
  }
  const auto av = tape.value(a);
  const auto bv = tape.value(b);
  std::vector<double> out(static_cast<size_t>(r) * c, 0.0);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) {
      double acc = 0.0;
      for (int p = 0; p < k; ++p) {
        acc += av[static_cast<size_t>(i) * k + p] *
               bv[static_cast<size_t>(j) * k + p];
      }
      out[static_cast<size_t>(i) * c + j] = acc;
    }
  }
  return tape.emit(r, c, std::move(out), {a, b}, [a, b, r, k, c](Tape& t,
                                                                 int self) {
    const auto g = t.grad(Var{self});
    const auto av = t.value(a);
    const auto bv = t.value(b);
    const bool ga = t.requires_grad(a), gb = t.requires_grad(b);
    auto ag = ga ? t.grad(a) : std::span<double>();
    auto bg = gb ? t.grad(b) : std::span<double>();
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < c; ++j) {
        const double gij = g[static_cast<size_t>(i) * c + j];
        if (gij == 0.0) continue;
        for (int p = 0; p < k; ++p) {
          if (ga) {
            ag[static_cast<size_t>(i) * k + p] +=
                gij * bv[static_cast<size_t>(j) * k + p];
          }
          if (gb) {
            bg[static_cast<size_t>(j) * k + p] +=
                gij * av[static_cast<size_t>(i) * k + p];
          }
        }
      }
    }
  });
}

namespace {

// Shared body of add/sub.
Var add_scaled(Tape& tape, Var a, Var b, double sb, const char* op) {
  require_same_shape(tape, a, b, op);
  const auto av = tape.value(a);
  const auto bv = tape.value(b);
  std::vector<double> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] + sb * bv[i];
  return tape.emit(tape.rows(a), tape.cols(a), std::move(out), {a, b},
                   [a, b, sb](Tape& t, int self) {
                     const auto g = t.grad(Var{self});
                     if (t.requires_grad(a)) {
                       auto ag = t.grad(a);
                       for (size_t i = 0; i < g.size(); ++i) ag[i] += g[i];
                     }
                     if (t.requires_grad(b)) {
                       auto bg = t.grad(b);
                       for (size_t i = 0; i < g.size(); ++i) bg[i] += sb * g[i];
                     }
                   });
}

}  // namespace

Var add(Tape& tape, Var a, Var b) { return add_scaled(tape, a, b, 1.0, "add"); }

Var sub(Tape& tape, Var a, Var b) {
  return add_scaled(tape, a, b, -1.0, "sub");
}

Var mul(Tape& tape, Var a, Var b) {
  require_same_shape(tape, a, b, "mul");
  const auto av = tape.value(a);
  const auto bv = tape.value(b);
  std::vector<double> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return tape.emit(tape.rows(a), tape.cols(a), std::move(out), {a, b},
                   [a, b](Tape& t, int self) {
                     const auto g = t.grad(Var{self});
                     const auto av = t.value(a);
                     const auto bv = t.value(b);
                     if (t.requires_grad(a)) {
                       auto ag = t.grad(a);
                       for (size_t i = 0; i < g.size(); ++i) ag[i] += g[i] * bv[i];
                     }
                     if (t.requires_grad(b)) {
                       auto bg = t.grad(b);
                       for (size_t i = 0; i < g.size(); ++i) bg[i] += g[i] * av[i];
                     }
                   });
}

Var scale(Tape& tape, Var a, double s) {
  const auto av = tape.value(a);
  std::vector<double> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = s * av[i];
  return tape.emit(tape.rows(a), tape.cols(a), std::move(out), {a},
                   [a, s](Tape& t, int self) {
                     const auto g = t.grad(Var{self});
                     auto ag = t.grad(a);
                     for (size_t i = 0; i < g.size(); ++i) ag[i] += s * g[i];
                   });
}

Var add_bias(Tape& tape, Var a, Var bias) {
  const int r = tape.rows(a), c = tape.cols(a);
  if (tape.rows(bias) != 1 || tape.cols(bias) != c) {
    throw ShapeError("add_bias: " + shape_str(tape, a) + " + " +
                     shape_str(tape, bias));
  }
  const auto av = tape.value(a);
  const auto bv = tape.value(bias);
  std::vector<double> out(av.size());
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) {
      out[static_cast<size_t>(i) * c + j] =
          av[static_cast<size_t>(i) * c + j] + bv[j];
    }
  }
  return tape.emit(r, c, std::move(out), {a, bias},
                   [a, bias, r, c](Tape& t, int self) {
                     const auto g = t.grad(Var{self});
                     if (t.requires_grad(a)) {
                       auto ag = t.grad(a);
                       for (size_t i = 0; i < g.size(); ++i) ag[i] += g[i];
                     }
                     if (t.requires_grad(bias)) {
                       auto bg = t.grad(bias);
                       for (int i = 0; i < r; ++i) {
                         for (int j = 0; j < c; ++j) {
                           bg[j] += g[static_cast<size_t>(i) * c + j];
                         }
                       }
                     }
                   });
}

Var tanh(Tape& tape, Var a) {
  const auto av = tape.value(a);
  std::vector<double> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(av[i]);
  return tape.emit(tape.rows(a), tape.cols(a), std::move(out), {a},
                   [a](Tape& t, int self) {
                     const auto g = t.grad(Var{self});
                     const auto y = t.value(Var{self});
                     auto ag = t.grad(a);
                     for (size_t i = 0; i < g.size(); ++i) {
                       ag[i] += g[i] * (1.0 - y[i] * y[i]);
                     }
                   });
}

Var sigmoid(Tape& tape, Var a) {
  const auto av = tape.value(a);
  std::vector<double> out(av.size());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = 1.0 / (1.0 + std::exp(-av[i]));
  }
  return tape.emit(tape.rows(a), tape.cols(a), std::move(out), {a},
                   [a](Tape& t, int self) {
                     const auto g = t.grad(Var{self});
                     const auto y = t.value(Var{self});
                     auto ag = t.grad(a);
                     for (size_t i = 0; i < g.size(); ++i) {
                       ag[i] += g[i] * y[i] * (1.0 - y[i]);
                     }
                   });
}

Var concat(Tape& tape, std::initializer_list<Var> parts) {
  return concat(tape, std::span<const Var>(parts.begin(), parts.size()));
}

Var concat(Tape& tape, std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  std::vector<double> out;
  std::vector<Var> inputs(parts.begin(), parts.end());
  for (Var p : inputs) {
    if (tape.rows(p) != 1) throw ShapeError("concat: inputs must be 1 x n");
    const auto v = tape.value(p);
    out.insert(out.end(), v.begin(), v.end());
  }
  const int total = static_cast<int>(out.size());
  return tape.emit(1, total, std::move(out), parts,
                   [inputs = std::move(inputs)](Tape& t, int self) {
                     const auto g = t.grad(Var{self});
                     size_t offset = 0;
                     for (Var p : inputs) {
                       const size_t n = t.value(p).size();
                       if (t.requires_grad(p)) {
                         auto pg = t.grad(p);
                         for (size_t i = 0; i < n; ++i) pg[i] += g[offset + i];
                       }
                       offset += n;
                     }
                   });
}

Var softmax(Tape& tape, Var a) {
  const int r = tape.rows(a), c = tape.cols(a);
  const auto av = tape.value(a);
  std::vector<double> out(av.size());
  for (int i = 0; i < r; ++i) {
    const double* x = av.data() + static_cast<size_t>(i) * c;
    double* y = out.data() + static_cast<size_t>(i) * c;
    const double mx = *std::max_element(x, x + c);
    double z = 0.0;
    for (int j = 0; j < c; ++j) z += (y[j] = std::exp(x[j] - mx));
    for (int j = 0; j < c; ++j) y[j] /= z;
  }
  return tape.emit(r, c, std::move(out), {a}, [a, r, c](Tape& t, int self) {
    const auto g = t.grad(Var{self});
    const auto y = t.value(Var{self});
    auto ag = t.grad(a);
    for (int i = 0; i < r; ++i) {
      const size_t off = static_cast<size_t>(i) * c;
      double dot = 0.0;
      for (int j = 0; j < c; ++j) dot += g[off + j] * y[off + j];
      for (int j = 0; j < c; ++j) ag[off + j] += y[off + j] * (g[off + j] - dot);
    }
  });
}

Var cross_entropy(Tape& tape, Var logits, int target) {
  if (tape.rows(logits) != 1) throw ShapeError("cross_entropy: logits must be 1 x C");
  const int c = tape.cols(logits);
  if (target < 0 || target >= c) {
    throw ShapeError("cross_entropy: target " + std::to_string(target) +
                     " out of range for " + std::to_string(c) + " classes");
  }
  const auto x = tape.value(logits);
  const double mx = *std::max_element(x.begin(), x.end());
  double z = 0.0;
  for (double v : x) z += std::exp(v - mx);
  const double log_z = std::log(z);
  const double loss = -(x[target] - mx - log_z);
  return tape.emit(1, 1, {loss}, {logits},
                   [logits, target, mx, log_z](Tape& t, int self) {
                     const double g = t.grad(Var{self})[0];
                     const auto x = t.value(logits);
                     auto lg = t.grad(logits);
                     for (size_t j = 0; j < x.size(); ++j) {
                       lg[j] += g * std::exp(x[j] - mx - log_z);
                     }
                     lg[target] -= g;
                   });
}

Var weighted_sum(Tape& tape, std::span<const Var> xs,
                 std::span<const double> weights) {
  if (xs.empty() || xs.size() != weights.size()) {
    throw ShapeError("weighted_sum: need one weight per input");
  }
  const int r = tape.rows(xs[0]), c = tape.cols(xs[0]);
  std::vector<double> out(static_cast<size_t>(r) * c, 0.0);
  for (size_t j = 0; j < xs.size(); ++j) {
    require_same_shape(tape, xs[0], xs[j], "weighted_sum");
    const auto v = tape.value(xs[j]);
    for (size_t i = 0; i < out.size(); ++i) out[i] += weights[j] * v[i];
  }
  std::vector<Var> inputs(xs.begin(), xs.end());
  std::vector<double> w(weights.begin(), weights.end());
  return tape.emit(r, c, std::move(out), xs,
                   [inputs = std::move(inputs), w = std::move(w)](Tape& t,
                                                                  int self) {
                     const auto g = t.grad(Var{self});
                     for (size_t j = 0; j < inputs.size(); ++j) {
                       if (!t.requires_grad(inputs[j])) continue;
                       auto xg = t.grad(inputs[j]);
                       for (size_t i = 0; i < g.size(); ++i) xg[i] += w[j] * g[i];
                     }
                   });
}

Var sum(Tape& tape, std::span<const Var> xs) {
  std::vector<double> ones(xs.size(), 1.0);
  return weighted_sum(tape, xs, ones);
}

ProjectedKV project_kv(Tape& tape, Var keys, Var values, Var w_k, Var w_v) {
  if (tape.rows(keys) != tape.rows(values)) {
    throw ShapeError("attention: keys and values differ in row count");
  }
  return {matmul(tape, keys, w_k), matmul(tape, values, w_v)};
}

AttentionOut attend(Tape& tape, Var query, Var w_q, const ProjectedKV& kv) {
  const Var q = matmul(tape, query, w_q);
  if (tape.cols(q) != tape.cols(kv.keys)) {
    throw ShapeError("attention: query projects to " +
                     std::to_string(tape.cols(q)) + " dims, keys have " +
                     std::to_string(tape.cols(kv.keys)));
  }
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(tape.cols(q)));
  const Var scores = scale(tape, matmul_nt(tape, q, kv.keys), inv_sqrt_dk);
  const Var weights = softmax(tape, scores);
  return {matmul(tape, weights, kv.values), weights};
}

AttentionOut attention(Tape& tape, Var query, Var keys, Var values, Var w_q,
                       Var w_k, Var w_v) {
  return attend(tape, query, w_q, project_kv(tape, keys, values, w_k, w_v));
}

Var mlp(Tape& tape, Var input, std::span<const Dense> layers) {
  if (layers.empty()) throw ShapeError("mlp: no layers");
  Var x = input;
  for (size_t i = 0; i < layers.size(); ++i) {
    x = add_bias(tape, matmul(tape, x, layers[i].weight), layers[i].bias);
    if (i + 1 < layers.size()) x = tanh(tape, x);
  }
  return x;
}

// --- Gradient check ---------------------------------------------------------

namespace {

// Shared driver. `numeric_at` returns the central difference numerator for
// the current parameter values +-eps.
GradCheckResult compare_entries(
    ParamStore& params, double eps,
    const std::function<double(Tensor&, size_t)>& numeric_at) {
  GradCheckResult result;
  for (auto& [name, t] : params.tensors()) {
    for (size_t i = 0; i < t.size(); ++i) {
      const double analytic = t.grad[i];
      if (!std::isfinite(analytic)) {
        throw NumericError("grad_check: non-finite gradient in " + name);
      }
      const double numeric = numeric_at(t, i) / (2.0 * eps);
      const double rel = std::abs(analytic - numeric) /
                         std::max(1e-8, std::abs(analytic) + std::abs(numeric));
      ++result.entries_checked;
      if (rel > result.max_rel_error || result.worst_param.empty()) {
        result.max_rel_error = std::max(result.max_rel_error, rel);
        result.worst_param = name;
        result.worst_index = i;
        result.analytic = analytic;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

void check_finite(double v) {
  if (!std::isfinite(v)) throw NumericError("grad_check: non-finite loss");
}

}  // namespace

GradCheckResult grad_check(const LossFn& loss, ParamStore& params,
                           double eps) {
  return grad_check(
      LossTermsFn([&](Tape& tape) { return std::vector<Var>{loss(tape)}; }),
      params, eps);
}

GradCheckResult grad_check(const LossTermsFn& terms, ParamStore& params,
                           double eps) {
  auto evaluate = [&]() {
    Tape tape(false);
    std::vector<double> out;
    for (const Var v : terms(tape)) {
      out.push_back(tape.scalar(v));
      check_finite(out.back());
    }
    return out;
  };

  params.zero_grad();
  {
    Tape tape;
    const std::vector<Var> parts = terms(tape);
    const Var l = parts.size() == 1 ? parts[0] : sum(tape, parts);
    check_finite(tape.scalar(l));
    tape.backward(l);
  }

  return compare_entries(params, eps, [&](Tensor& t, size_t i) {
    const double orig = t.value[i];
    t.value[i] = orig + eps;
    const std::vector<double> up = evaluate();
    t.value[i] = orig - eps;
    const std::vector<double> down = evaluate();
    t.value[i] = orig;
    double diff = 0.0;
    for (size_t k = 0; k < up.size(); ++k) diff += up[k] - down[k];
    return diff;
  });
}

}  // namespace strelay::ad
