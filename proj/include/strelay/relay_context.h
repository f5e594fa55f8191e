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

#ifndef STRELAY_RELAY_CONTEXT_H_
#define STRELAY_RELAY_CONTEXT_H_

#include <cstdint>

#include "strelay/diffcore.h"
#include "strelay/embeddings.h"
#include "strelay/model_config.h"

namespace strelay {

// Predicted future context for one step. Components a variant does not use
// are left invalid.
struct ContextBundle {
  ad::Var e_tau_hat;    // 1 x d
  ad::Var e_rho_hat;    // 1 x d
  ad::Var e_st;         // 1 x context_dim, invalid for kNoContext
  ad::Var tau_weights;  // 1 x M
  ad::Var rho_weights;  // 1 x N
};

// Temporal attention over the interval candidates E^T, then spatial
// attention over E^D whose query is conditioned on the temporal result
// (the relay). Candidate keys and values are projected once per tape.
class RelayContext {
 public:
  static void register_params(const ModelConfig& cfg, ad::ParamStore& params,
                              Rng& rng);

  RelayContext(ad::Tape& tape, ad::ParamStore& params, const ModelConfig& cfg,
               const Embeddings& emb);

  // Query [e^u; e^t_i] attends over E^T.
  ad::AttentionOut temporal(int user, int64_t timestamp);
  // Query [e^u; e_tau_hat; e^l_i], or [e^u; e^l_i] when e_tau_hat is
  // invalid, attends over E^D.
  ad::AttentionOut spatial(int user, ad::Var e_tau_hat, int poi);

  ContextBundle build(int user, int64_t timestamp, int poi);

 private:
  ad::Tape& tape_;
  const ModelConfig& cfg_;
  Embeddings emb_;
  ad::Var tau_wq_, rho_wq_;
  ad::ProjectedKV tau_kv_, rho_kv_;
};

}  // namespace strelay

#endif  // STRELAY_RELAY_CONTEXT_H_
