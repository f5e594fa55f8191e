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

#ifndef STRELAY_GRADCHECK_H_
#define STRELAY_GRADCHECK_H_

#include <cstdint>

#include "strelay/diffcore.h"
#include "strelay/ingest.h"
#include "strelay/model_config.h"

namespace strelay {

struct ModelGradCheckOptions {
  int d = 4;
  int M = 6;
  int N = 5;
  int users = 3;
  int pois = 10;
  int events_per_user = 4;
  int hidden_dim = 4;
  EncoderKind encoder = EncoderKind::kGru;
  Variant variant = Variant::kFull;
  uint64_t seed = 1;
  double eps = 1e-6;
};

// Random check-ins over a small patch, spread so that several temporal and
// spatial bins occur.
Dataset random_tiny_dataset(int users, int pois, int events_per_user,
                            uint64_t seed);

// Central-difference check of one full training step (all users' windows,
// summed L_total) against the analytic gradients.
ad::GradCheckResult check_model_gradients(const ModelGradCheckOptions& opts);

}  // namespace strelay

#endif  // STRELAY_GRADCHECK_H_
