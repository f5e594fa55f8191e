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

#ifndef STRELAY_HEADS_H_
#define STRELAY_HEADS_H_

#include <optional>

#include "strelay/diffcore.h"
#include "strelay/model_config.h"
#include "strelay/relay_context.h"

namespace strelay {

struct HeadOutputs {
  ad::Var poi_logits;  // 1 x num_pois
  ad::Var tau_logits;  // 1 x M, invalid when the variant has no L_tau
  ad::Var rho_logits;  // 1 x N, invalid when the variant has no L_rho
};

struct StepLosses {
  ad::Var poi;
  ad::Var tau;  // invalid when dropped
  ad::Var rho;  // invalid when dropped
  ad::Var total;
};

struct StepTargets {
  int poi = 0;
  std::optional<int> tau;
  std::optional<int> rho;
};

// e^c = [h_i; e_st]
ad::Var fuse(ad::Tape& tape, ad::Var h, const ContextBundle& ctx);

// MLP heads over e^c for the next POI and, when the variant models them,
// the next temporal and spatial bins.
class Heads {
 public:
  static void register_params(const ModelConfig& cfg, ad::ParamStore& params,
                              Rng& rng);

  Heads(ad::Tape& tape, ad::ParamStore& params, const ModelConfig& cfg);

  HeadOutputs predict(ad::Var context);
  // Cross-entropy per head; total = poi + tau + rho, summed left to right
  // over the active terms.
  StepLosses losses(const HeadOutputs& out, const StepTargets& targets);

 private:
  ad::Tape& tape_;
  std::vector<ad::Dense> poi_, tau_, rho_;
};

}  // namespace strelay

#endif  // STRELAY_HEADS_H_
