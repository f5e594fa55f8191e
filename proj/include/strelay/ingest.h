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

#ifndef STRELAY_INGEST_H_
#define STRELAY_INGEST_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "strelay/interval.h"

namespace strelay {

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const LatLon&, const LatLon&) = default;
};

// One visit event. Ids are dense indices into the owning Dataset.
struct CheckIn {
  int user_id = 0;
  int poi_id = 0;
  LatLon coord;
  int64_t timestamp = 0;  // seconds since the Unix epoch, UTC

  friend bool operator==(const CheckIn&, const CheckIn&) = default;
};

struct Trajectory {
  int user_id = 0;
  std::vector<CheckIn> events;  // time-ordered
};

struct Dataset {
  std::vector<Trajectory> trajectories;
  int num_users = 0;
  int num_pois = 0;
  std::vector<LatLon> poi_coords;  // indexed by poi_id

  // Original identifiers, indexed by dense id.
  std::vector<std::string> user_labels;
  std::vector<std::string> poi_labels;

  size_t num_checkins() const;

  // Checks every invariant of the data model; throws DataError on failure.
  void validate() const;
};

// Supervision for one input position: the next event plus its future
// interval bins (filled by label_targets).
struct StepTarget {
  CheckIn next;
  std::optional<IntervalIndex> tau;
  std::optional<IntervalIndex> rho;
};

struct Window {
  int user_id = 0;
  std::vector<CheckIn> inputs;
  std::vector<StepTarget> targets;  // targets[i] follows inputs[i]
};

// Parses a tab-separated check-in log with columns
//   user, timestamp (epoch seconds or ISO-8601 UTC), lat, lon, poi
// Ids are re-indexed densely (numeric order when every raw id is an
// integer, lexicographic otherwise). Writes `<path>.idmap.tsv` next to the
// input unless `write_idmap` is false.
Dataset parse_checkins(const std::filesystem::path& path,
                       bool write_idmap = true);

// Parses one timestamp field; exposed for tests.
int64_t parse_timestamp(const std::string& field);

// Writes the raw-id -> dense-id mapping of `ds`.
void write_idmap(const Dataset& ds, const std::filesystem::path& path);

// Writes `ds` in the same TSV layout parse_checkins reads, using dense ids
// as raw ids and epoch-second timestamps.
void write_checkins(const Dataset& ds, const std::filesystem::path& path);

// Keeps users with at least `min_checkins` events and re-densifies users and
// POIs (unvisited POIs are dropped). Relative id order is preserved.
Dataset filter_users(const Dataset& ds, int min_checkins);

// Per-user chronological split: the first floor(train_frac * n) events go to
// train. Users with fewer than two events on a side are dropped from that
// side. Both outputs keep the input's index spaces.
std::pair<Dataset, Dataset> chrono_split(const Dataset& ds, double train_frac);

// Non-overlapping windows of at most `seq_len` (input, next) pairs.
std::vector<Window> make_windows(const Dataset& ds, int seq_len);

}  // namespace strelay

#endif  // STRELAY_INGEST_H_
