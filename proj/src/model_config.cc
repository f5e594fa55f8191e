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

#include "strelay/model_config.h"

#include <string>

#include "strelay/common.h"

namespace strelay {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kNoSpatial: return "no_spatial";
    case Variant::kNoTemporal: return "no_temporal";
    case Variant::kNoRelaying: return "no_relaying";
    case Variant::kNoContext: return "no_context";
  }
  return "?";
}

Variant parse_variant(std::string_view s) {
  for (Variant v : {Variant::kFull, Variant::kNoSpatial, Variant::kNoTemporal,
                    Variant::kNoRelaying, Variant::kNoContext}) {
    if (s == to_string(v)) return v;
  }
  throw UsageError("unknown variant '" + std::string(s) + "'");
}

std::string_view to_string(EncoderKind k) {
  return k == EncoderKind::kGru ? "gru" : "flashback";
}

EncoderKind parse_encoder(std::string_view s) {
  if (s == "gru") return EncoderKind::kGru;
  if (s == "flashback") return EncoderKind::kFlashback;
  throw UsageError("unknown encoder '" + std::string(s) + "'");
}

void EncoderConfig::validate() const {
  if (hidden_dim < 1) throw UsageError("hidden_dim must be >= 1");
  if (!(alpha >= 0.0) || !(beta >= 0.0)) {
    throw UsageError("alpha and beta must be >= 0");
  }
  if (context_window < 1) throw UsageError("context_window must be >= 1");
}

void ModelConfig::validate() const {
  if (num_users < 1 || num_pois < 1) {
    throw UsageError("model needs at least one user and one POI");
  }
  if (d < 1) throw UsageError("d must be >= 1");
  if (mlp_hidden < 1) throw UsageError("mlp_hidden must be >= 1");
  spec.validate();
  encoder.validate();
}

int ModelConfig::context_dim() const {
  switch (variant) {
    case Variant::kFull:
    case Variant::kNoRelaying: return 2 * d;
    case Variant::kNoSpatial:
    case Variant::kNoTemporal: return d;
    case Variant::kNoContext: return 0;
  }
  return 0;
}

}  // namespace strelay
