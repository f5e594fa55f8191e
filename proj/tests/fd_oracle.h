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


#ifndef STRELAY_TESTS_FD_ORACLE_H_
#define STRELAY_TESTS_FD_ORACLE_H_

#include <algorithm>
#include <cmath>
#include <functional>

#include "strelay/diffcore.h"

// Central-difference reference, kept apart from the library's grad_check
// so that the two check each other.
namespace strelay::testing {

inline double fd(ad::Tensor& t, size_t i, const std::function<double()>& f,
                 double eps = 1e-6) {
  const double orig = t.value[i];
  t.value[i] = orig + eps;
  const double up = f();
  t.value[i] = orig - eps;
  const double down = f();
  t.value[i] = orig;
  return (up - down) / (2 * eps);
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(1e-8, std::abs(a) + std::abs(b));
}

// Reduces any node to a scalar with fixed, uneven weights per entry.
inline ad::Var probe(ad::Tape& tape, ad::Var v) {
  const int n = tape.rows(v) * tape.cols(v);
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.3 + 0.7 * std::sin(1.0 + i);
  const ad::Var weights = tape.constant(tape.rows(v), tape.cols(v), w);
  const ad::Var prod = ad::mul(tape, v, weights);
  const ad::Var rows = ad::matmul(
      tape, tape.constant(1, tape.rows(v), std::vector<double>(tape.rows(v), 1)),
      prod);
  return ad::matmul(
      tape, rows,
      tape.constant(tape.cols(v), 1, std::vector<double>(tape.cols(v), 1)));
}

// Max relative error over every parameter entry of `ps`.
inline double max_fd_error(ad::ParamStore& ps,
                           const std::function<ad::Var(ad::Tape&)>& build) {
  ps.zero_grad();
  {
    ad::Tape tape;
    tape.backward(build(tape));
  }
  auto eval = [&] {
    ad::Tape tape(false);
    return tape.scalar(build(tape));
  };
  double worst = 0;
  for (auto& [name, t] : ps.tensors()) {
    for (size_t i = 0; i < t.size(); ++i) {
      worst = std::max(worst, rel_err(t.grad[i], fd(t, i, eval)));
    }
  }
  return worst;
}

}  // namespace strelay::testing

#endif  // STRELAY_TESTS_FD_ORACLE_H_
