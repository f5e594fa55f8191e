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

#ifndef STRELAY_SYNTHGEN_H_
#define STRELAY_SYNTHGEN_H_

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "json.hpp"
#include "strelay/ingest.h"
#include "strelay/interval.h"

namespace strelay {

// Star-shaped synthetic users: a home POI plus one satellite per outgoing
// (temporal bin, spatial bin) pair. From home the user picks the pair by
// the current hour of day (rotated per user), travels to the satellite at
// exactly that pair's distance bin and elapsed-time bin, then returns home
// with one of `return_tau` bins. Every (current POI, bin pair) therefore
// names exactly one next POI, and per user the bin pair alone does too.
struct SynthConfig {
  int num_users = 50;
  std::vector<std::pair<int, int>> out_bins = {{1, 2}, {1, 6}, {4, 2}, {4, 6}};
  std::vector<int> return_tau = {8, 11};
  int events_per_user = 2000;
  double noise = 0.1;  // probability of a uniform location substitution
  uint64_t seed = 7;
  IntervalSpec spec;

  int pois_per_user() const { return static_cast<int>(out_bins.size()) + 1; }
  // Throws UsageError for invalid values and DataError when a bin cannot
  // be realized exactly.
  void validate() const;

  nlohmann::json to_json() const;
  static SynthConfig from_json(const nlohmann::json& j, SynthConfig base);
  static SynthConfig from_json(const nlohmann::json& j) {
    return from_json(j, SynthConfig{});
  }
};

struct TransitionRule {
  int user_id = 0;
  int from_poi = 0;
  int tau_bin = 0;
  int rho_bin = 0;
  int to_poi = 0;
};

struct SynthData {
  Dataset dataset;
  std::vector<TransitionRule> rules;
};

SynthData generate(const SynthConfig& cfg);

// Columns user, from_poi, tau_bin, rho_bin, to_poi with a header line.
void write_rules(const std::vector<TransitionRule>& rules,
                 const std::filesystem::path& path);

}  // namespace strelay

#endif  // STRELAY_SYNTHGEN_H_
