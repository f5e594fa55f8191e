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

#ifndef STRELAY_GEOSPACE_H_
#define STRELAY_GEOSPACE_H_

#include <cstdint>
#include <vector>

#include "strelay/ingest.h"
#include "strelay/interval.h"

namespace strelay {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr int kHoursPerWeek = 168;

// Great-circle distance in kilometers.
double haversine_km(LatLon a, LatLon b);

// Weekday (Monday = 0) times 24 plus hour of day, in UTC.
int hour_in_week(int64_t timestamp);

// Floor binning with the last bin capped: min(floor(x / width), count - 1).
// Negative deltas throw DataError.
IntervalIndex bin_time(double delta_hours, const IntervalSpec& spec);
IntervalIndex bin_dist(double delta_km, const IntervalSpec& spec);

// Attaches temporal and spatial bin targets to every (input, next) pair.
// Coordinates come from `ds.poi_coords`.
std::vector<Window> label_targets(std::vector<Window> windows,
                                  const Dataset& ds, const IntervalSpec& spec);

}  // namespace strelay

#endif  // STRELAY_GEOSPACE_H_
