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

#ifndef STRELAY_MODEL_H_
#define STRELAY_MODEL_H_

#include <vector>

#include "strelay/diffcore.h"
#include "strelay/heads.h"
#include "strelay/ingest.h"
#include "strelay/model_config.h"

namespace strelay {

struct WindowForward {
  ad::Var loss;                   // sum of per-step L_total
  std::vector<StepLosses> steps;
  std::vector<HeadOutputs> outputs;
  std::vector<ContextBundle> contexts;
};

// Parameters plus the forward pass of the full predictor.
class StrelayModel {
 public:
  // Fresh parameters drawn from `rng`.
  StrelayModel(const ModelConfig& cfg, Rng& rng);
  // Adopts existing parameters; names and shapes must match what `cfg`
  // would create.
  StrelayModel(const ModelConfig& cfg, ad::ParamStore params);

  const ModelConfig& config() const { return cfg_; }
  ad::ParamStore& params() { return params_; }
  const ad::ParamStore& params() const { return params_; }

  // Records the whole window on `tape`. Targets must be labeled for the
  // heads the variant uses.
  WindowForward forward(ad::Tape& tape, const Window& window);

  // Next-POI logits for every input position, no gradients recorded.
  std::vector<std::vector<double>> predict_poi_scores(const Window& window);

  // Names and shapes every variant of `cfg` owns.
  static ad::ParamStore make_params(const ModelConfig& cfg, Rng& rng);

 private:
  ModelConfig cfg_;
  ad::ParamStore params_;
};

}  // namespace strelay

#endif  // STRELAY_MODEL_H_
