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

#include "strelay/geospace.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "strelay/common.h"

namespace strelay {

void IntervalSpec::validate() const {
  if (!(dt > 0.0) || !(dd > 0.0) || M < 1 || N < 1) {
    throw UsageError("interval spec requires dt > 0, dd > 0, M >= 1, N >= 1");
  }
}

double haversine_km(LatLon a, LatLon b) {
  constexpr double kRad = std::numbers::pi / 180.0;
  const double dlat = (b.lat - a.lat) * kRad;
  const double dlon = (b.lon - a.lon) * kRad;
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  double h = s1 * s1 + std::cos(a.lat * kRad) * std::cos(b.lat * kRad) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);  // keeps NaN, unlike min/max
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

int hour_in_week(int64_t timestamp) {
  constexpr int64_t kDay = 86400;
  const int64_t days = timestamp >= 0 ? timestamp / kDay
                                      : -((-timestamp + kDay - 1) / kDay);
  const int64_t secs = timestamp - days * kDay;
  // 1970-01-01 was a Thursday (weekday 3 with Monday = 0).
  const int64_t weekday = ((days + 3) % 7 + 7) % 7;
  return static_cast<int>(weekday * 24 + secs / 3600);
}

namespace {

int capped_floor(double x, double width, int count) {
  const double q = std::floor(x / width);
  if (q >= static_cast<double>(count - 1)) return count - 1;
  return static_cast<int>(q);
}

}  // namespace

IntervalIndex bin_time(double delta_hours, const IntervalSpec& spec) {
  if (!(delta_hours >= 0.0)) {
    throw DataError("negative time delta: " + std::to_string(delta_hours));
  }
  return {IntervalKind::kTemporal, capped_floor(delta_hours, spec.dt, spec.M)};
}

IntervalIndex bin_dist(double delta_km, const IntervalSpec& spec) {
  if (!(delta_km >= 0.0)) {
    throw DataError("negative distance: " + std::to_string(delta_km));
  }
  return {IntervalKind::kSpatial, capped_floor(delta_km, spec.dd, spec.N)};
}

std::vector<Window> label_targets(std::vector<Window> windows,
                                  const Dataset& ds, const IntervalSpec& spec) {
  spec.validate();
  auto coord_of = [&](int poi) {
    if (poi < 0 || poi >= static_cast<int>(ds.poi_coords.size())) {
      throw DataError("missing coordinates for poi_id " + std::to_string(poi));
    }
    return ds.poi_coords[poi];
  };
  for (auto& w : windows) {
    for (size_t i = 0; i < w.inputs.size(); ++i) {
      const CheckIn& cur = w.inputs[i];
      StepTarget& tgt = w.targets[i];
      const double hours =
          static_cast<double>(tgt.next.timestamp - cur.timestamp) / 3600.0;
      const double km =
          haversine_km(coord_of(cur.poi_id), coord_of(tgt.next.poi_id));
      tgt.tau = bin_time(hours, spec);
      tgt.rho = bin_dist(km, spec);
    }
  }
  return windows;
}

}  // namespace strelay
