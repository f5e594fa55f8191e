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

#ifndef STRELAY_EMBEDDINGS_H_
#define STRELAY_EMBEDDINGS_H_

#include "strelay/diffcore.h"
#include "strelay/model_config.h"

namespace strelay {

// User, hour-in-week and POI tables shared by the context module and the
// history encoder.
struct Embeddings {
  ad::Var user;
  ad::Var time;
  ad::Var poi;

  static void register_params(const ModelConfig& cfg, ad::ParamStore& params,
                              Rng& rng);
  static Embeddings bind(ad::Tape& tape, ad::ParamStore& params);
};

}  // namespace strelay

#endif  // STRELAY_EMBEDDINGS_H_
