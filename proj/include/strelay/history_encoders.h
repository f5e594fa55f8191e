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

#ifndef STRELAY_HISTORY_ENCODERS_H_
#define STRELAY_HISTORY_ENCODERS_H_

#include <span>
#include <vector>

#include "strelay/diffcore.h"
#include "strelay/embeddings.h"
#include "strelay/ingest.h"
#include "strelay/model_config.h"

namespace strelay {

// Normalized Flashback weights of past events relative to `now`:
// w_j ~ exp(-alpha * dt_days) * exp(-beta * dd_100km).
std::vector<double> flashback_weights(std::span<const CheckIn> past,
                                      const CheckIn& now,
                                      const EncoderConfig& cfg);

// sum_j w_j h_j over the given states, with weights from flashback_weights.
ad::Var flashback_aggregate(ad::Tape& tape, std::span<const ad::Var> hiddens,
                            std::span<const CheckIn> past, const CheckIn& now,
                            const EncoderConfig& cfg);

// Base model g(X). The GRU consumes [e^l_i; e^t_i; e^u] per step; the
// Flashback variant re-weights the last `context_window` GRU states.
class HistoryEncoder {
 public:
  static void register_params(const ModelConfig& cfg, ad::ParamStore& params,
                              Rng& rng);

  HistoryEncoder(ad::Tape& tape, ad::ParamStore& params,
                 const ModelConfig& cfg, const Embeddings& emb);

  // 1 x (3d) input features of one event.
  ad::Var features(const CheckIn& x);
  // One gated recurrent update.
  ad::Var step(ad::Var state, const CheckIn& x);
  ad::Var zero_state();
  // h_i for every input position; h_i depends on inputs[0..i] only.
  std::vector<ad::Var> encode(std::span<const CheckIn> inputs);

 private:
  struct Gate {
    ad::Var w, u, b;
  };
  ad::Var gate_preact(const Gate& g, ad::Var x, ad::Var h);

  ad::Tape& tape_;
  const ModelConfig& cfg_;
  Embeddings emb_;
  Gate z_, r_, n_;
};

}  // namespace strelay

#endif  // STRELAY_HISTORY_ENCODERS_H_
