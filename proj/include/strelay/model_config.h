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

#ifndef STRELAY_MODEL_CONFIG_H_
#define STRELAY_MODEL_CONFIG_H_

#include <string>
#include <string_view>

#include "strelay/interval.h"

namespace strelay {

// Which future-context components the model uses. kNoContext is the plain
// base encoder (e^c = h_i) that the other variants are compared against.
enum class Variant { kFull, kNoSpatial, kNoTemporal, kNoRelaying, kNoContext };

std::string_view to_string(Variant v);
// Accepts full, no_spatial, no_temporal, no_relaying, no_context.
Variant parse_variant(std::string_view s);

inline bool uses_temporal(Variant v) {
  return v == Variant::kFull || v == Variant::kNoSpatial ||
         v == Variant::kNoRelaying;
}
inline bool uses_spatial(Variant v) {
  return v == Variant::kFull || v == Variant::kNoTemporal ||
         v == Variant::kNoRelaying;
}

enum class EncoderKind { kGru, kFlashback };

std::string_view to_string(EncoderKind k);
EncoderKind parse_encoder(std::string_view s);

struct EncoderConfig {
  EncoderKind kind = EncoderKind::kGru;
  int hidden_dim = 10;
  double alpha = 0.1;    // temporal decay, per day
  double beta = 100.0;   // spatial decay, per 100 km
  int context_window = 20;

  void validate() const;
};

struct ModelConfig {
  int num_users = 1;
  int num_pois = 1;
  int d = 10;           // embedding width
  int mlp_hidden = 10;  // hidden width of each prediction head
  IntervalSpec spec;
  Variant variant = Variant::kFull;
  EncoderConfig encoder;

  void validate() const;
  // Width of the context part of e^c: 2d, d or 0.
  int context_dim() const;
};

}  // namespace strelay

#endif  // STRELAY_MODEL_CONFIG_H_
