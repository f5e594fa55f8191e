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

#ifndef STRELAY_ENTROPY_H_
#define STRELAY_ENTROPY_H_

#include <filesystem>
#include <ostream>
#include <span>
#include <vector>

#include "strelay/ingest.h"
#include "strelay/interval.h"

namespace strelay {

enum class ContextMode { kTemporal, kSpatial, kSpatiotemporal };

// Shannon entropy (bits) of a list of location ids.
double entropy_of(std::span<const int> locations);

// Entropy of the visit-frequency distribution of a trajectory.
double entropy_plain(const Trajectory& traj);

// Mean within-bin entropy of next locations, where each next location is
// categorized by the bin of the transition that leads to it. Only bins that
// occur are averaged, each with equal weight; p(l | bin) is the conditional
// frequency inside the bin. Requires at least two events.
double entropy_conditioned(const Trajectory& traj, const Dataset& ds,
                           const IntervalSpec& spec, ContextMode mode);

// Root-mean-square haversine distance of events to their lat/lon centroid.
double radius_of_gyration(const Trajectory& traj, const Dataset& ds);

struct UserEntropy {
  int user_id = 0;
  double E = 0.0;
  double E_t = 0.0;
  double E_s = 0.0;
  double E_st = 0.0;
  double rog_km = 0.0;
  int unique_locations = 0;
};

struct EntropyReport {
  std::vector<UserEntropy> users;
  int skipped_users = 0;  // fewer than two events

  void write_csv(std::ostream& out) const;
  void write_csv(const std::filesystem::path& path) const;
  // Mean and median of every column.
  void write_summary(std::ostream& out) const;
};

EntropyReport entropy_report(const Dataset& ds, const IntervalSpec& spec);

}  // namespace strelay

#endif  // STRELAY_ENTROPY_H_
