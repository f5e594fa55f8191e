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

#include "strelay/entropy.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <string>

#include "strelay/common.h"
#include "strelay/geospace.h"

namespace strelay {

double entropy_of(std::span<const int> locations) {
  if (locations.empty()) throw DataError("entropy of an empty sequence");
  std::map<int, size_t> counts;
  for (int l : locations) ++counts[l];
  const double n = static_cast<double>(locations.size());
  double h = 0.0;
  for (const auto& [loc, c] : counts) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  // -0.0 when a single location has p = 1.
  return h == 0.0 ? 0.0 : h;
}

double entropy_plain(const Trajectory& traj) {
  if (traj.events.empty()) throw DataError("empty trajectory");
  std::vector<int> locs;
  locs.reserve(traj.events.size());
  for (const auto& e : traj.events) locs.push_back(e.poi_id);
  return entropy_of(locs);
}

double entropy_conditioned(const Trajectory& traj, const Dataset& ds,
                           const IntervalSpec& spec, ContextMode mode) {
  if (traj.events.size() < 2) {
    throw DataError("conditioned entropy needs at least two events");
  }
  auto coord = [&](int poi) {
    if (poi < 0 || poi >= static_cast<int>(ds.poi_coords.size())) {
      throw DataError("missing coordinates for poi_id " + std::to_string(poi));
    }
    return ds.poi_coords[poi];
  };
  // Bin key -> next locations observed under that bin.
  std::map<std::pair<int, int>, std::vector<int>> groups;
  for (size_t i = 0; i + 1 < traj.events.size(); ++i) {
    const CheckIn& cur = traj.events[i];
    const CheckIn& nxt = traj.events[i + 1];
    int t = -1;
    int d = -1;
    if (mode != ContextMode::kSpatial) {
      t = bin_time(static_cast<double>(nxt.timestamp - cur.timestamp) / 3600.0,
                   spec)
              .index;
    }
    if (mode != ContextMode::kTemporal) {
      d = bin_dist(haversine_km(coord(cur.poi_id), coord(nxt.poi_id)), spec)
              .index;
    }
    groups[{t, d}].push_back(nxt.poi_id);
  }
  double sum = 0.0;
  for (const auto& [key, locs] : groups) sum += entropy_of(locs);
  return sum / static_cast<double>(groups.size());
}

double radius_of_gyration(const Trajectory& traj, const Dataset& ds) {
  if (traj.events.empty()) throw DataError("empty trajectory");
  std::vector<LatLon> pts;
  pts.reserve(traj.events.size());
  for (const auto& e : traj.events) {
    if (e.poi_id < 0 || e.poi_id >= static_cast<int>(ds.poi_coords.size())) {
      throw DataError("missing coordinates for poi_id " +
                      std::to_string(e.poi_id));
    }
    pts.push_back(ds.poi_coords[e.poi_id]);
  }
  LatLon centroid;
  for (const auto& p : pts) {
    centroid.lat += p.lat;
    centroid.lon += p.lon;
  }
  centroid.lat /= static_cast<double>(pts.size());
  centroid.lon /= static_cast<double>(pts.size());
  double acc = 0.0;
  for (const auto& p : pts) {
    const double r = haversine_km(p, centroid);
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(pts.size()));
}

EntropyReport entropy_report(const Dataset& ds, const IntervalSpec& spec) {
  spec.validate();
  if (ds.trajectories.empty()) throw DataError("dataset has no users");
  EntropyReport report;
  for (const auto& traj : ds.trajectories) {
    if (traj.events.size() < 2) {
      ++report.skipped_users;
      continue;
    }
    UserEntropy row;
    row.user_id = traj.user_id;
    row.E = entropy_plain(traj);
    row.E_t = entropy_conditioned(traj, ds, spec, ContextMode::kTemporal);
    row.E_s = entropy_conditioned(traj, ds, spec, ContextMode::kSpatial);
    row.E_st =
        entropy_conditioned(traj, ds, spec, ContextMode::kSpatiotemporal);
    row.rog_km = radius_of_gyration(traj, ds);
    std::vector<int> locs;
    for (const auto& e : traj.events) locs.push_back(e.poi_id);
    std::sort(locs.begin(), locs.end());
    row.unique_locations = static_cast<int>(
        std::unique(locs.begin(), locs.end()) - locs.begin());
    report.users.push_back(row);
  }
  if (report.users.empty()) {
    throw DataError("no user has at least two events");
  }
  return report;
}

void EntropyReport::write_csv(std::ostream& out) const {
  out << "user_id,E,E_t,E_s,E_st,rog_km\n";
  out << std::fixed << std::setprecision(6);
  for (const auto& r : users) {
    out << r.user_id << ',' << r.E << ',' << r.E_t << ',' << r.E_s << ','
        << r.E_st << ',' << r.rog_km << '\n';
  }
}

void EntropyReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_csv(out);
  out.flush();
  if (!out) throw DataError("failed writing " + path.string());
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

void EntropyReport::write_summary(std::ostream& out) const {
  const std::pair<const char*, double UserEntropy::*> columns[] = {
      {"E", &UserEntropy::E},       {"E_t", &UserEntropy::E_t},
      {"E_s", &UserEntropy::E_s},   {"E_st", &UserEntropy::E_st},
      {"rog_km", &UserEntropy::rog_km}};
  out << "users " << users.size() << " (skipped " << skipped_users << ")\n";
  out << "column\tmean\tmedian\n";
  out << std::fixed << std::setprecision(6);
  for (const auto& [name, field] : columns) {
    std::vector<double> v;
    double sum = 0.0;
    for (const auto& r : users) {
      v.push_back(r.*field);
      sum += r.*field;
    }
    out << name << '\t' << sum / static_cast<double>(v.size()) << '\t'
        << median(v) << '\n';
  }
}

}  // namespace strelay
