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

#include "strelay/synthgen.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "strelay/common.h"
#include "strelay/geospace.h"

namespace strelay {
namespace {

using nlohmann::json;

// Monday 2012-04-02 00:00:00 UTC.
constexpr int64_t kStartEpoch = 1333324800;

LatLon destination(LatLon from, double bearing_rad, double km) {
  constexpr double kRad = std::numbers::pi / 180.0;
  const double delta = km / kEarthRadiusKm;
  const double lat1 = from.lat * kRad;
  const double lon1 = from.lon * kRad;
  const double lat2 = std::asin(std::sin(lat1) * std::cos(delta) +
                                std::cos(lat1) * std::sin(delta) *
                                    std::cos(bearing_rad));
  const double lon2 =
      lon1 + std::atan2(std::sin(bearing_rad) * std::sin(delta) *
                            std::cos(lat1),
                        std::cos(delta) - std::sin(lat1) * std::sin(lat2));
  return {lat2 / kRad, lon2 / kRad};
}

std::vector<int> parse_int_list(const json& v, const std::string& key) {
  std::vector<int> out;
  if (v.is_array()) {
    for (const auto& x : v) out.push_back(x.get<int>());
    return out;
  }
  if (v.is_string()) {
    std::stringstream ss(v.get<std::string>());
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    return out;
  }
  throw UsageError("config key '" + key + "' expects a list of integers");
}

std::vector<std::pair<int, int>> parse_pairs(const json& v,
                                             const std::string& key) {
  std::vector<std::pair<int, int>> out;
  try {
    if (v.is_array()) {
      for (const auto& p : v) out.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
      return out;
    }
    if (v.is_string()) {
      // "1:2,1:6"
      std::stringstream ss(v.get<std::string>());
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw std::invalid_argument(item);
        out.emplace_back(std::stoi(item.substr(0, colon)),
                         std::stoi(item.substr(colon + 1)));
      }
      return out;
    }
  } catch (const std::exception&) {
  }
  throw UsageError("config key '" + key +
                   "' expects tau:rho pairs, e.g. \"1:2,1:6\"");
}

template <typename T>
T scalar_of(const json& v, const std::string& key) {
  try {
    if (v.is_string()) {
      std::istringstream in(v.get<std::string>());
      T x;
      if (in >> x && in.peek() == EOF) return x;
    } else if (v.is_number()) {
      return v.get<T>();
    }
  } catch (const std::exception&) {
  }
  throw UsageError("config key '" + key + "' has an invalid value");
}

}  // namespace

void SynthConfig::validate() const {
  spec.validate();
  if (num_users < 1 || events_per_user < 1) {
    throw UsageError("num_users and events_per_user must be >= 1");
  }
  if (!(noise >= 0.0 && noise <= 1.0)) throw UsageError("noise must lie in [0, 1]");
  if (out_bins.empty() || return_tau.empty()) {
    throw UsageError("need at least one outgoing pair and one return bin");
  }
  std::set<std::pair<int, int>> pairs;
  std::set<int> out_taus;
  for (const auto& [tau, rho] : out_bins) {
    if (tau < 0 || tau >= spec.M || rho < 0 || rho >= spec.N) {
      throw DataError("bin pair (" + std::to_string(tau) + ", " +
                      std::to_string(rho) + ") lies outside the M x N grid");
    }
    if (!pairs.insert({tau, rho}).second) {
      throw UsageError("duplicate outgoing bin pair");
    }
    out_taus.insert(tau);
  }
  std::set<int> ret;
  for (int tau : return_tau) {
    if (tau < 0 || tau >= spec.M) {
      throw DataError("return bin " + std::to_string(tau) + " exceeds M");
    }
    if (out_taus.count(tau) || !ret.insert(tau).second) {
      throw UsageError("return bins must be distinct and disjoint from "
                       "outgoing temporal bins");
    }
  }
}

json SynthConfig::to_json() const {
  json j;
  j["num_users"] = num_users;
  json pairs = json::array();
  for (const auto& [t, r] : out_bins) pairs.push_back({t, r});
  j["out_bins"] = pairs;
  j["return_tau"] = return_tau;
  j["events_per_user"] = events_per_user;
  j["noise"] = noise;
  j["seed"] = seed;
  j["dt"] = spec.dt;
  j["M"] = spec.M;
  j["dd"] = spec.dd;
  j["N"] = spec.N;
  return j;
}

SynthConfig SynthConfig::from_json(const json& j, SynthConfig c) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "num_users") c.num_users = scalar_of<int>(v, key);
    else if (key == "out_bins") c.out_bins = parse_pairs(v, key);
    else if (key == "return_tau") c.return_tau = parse_int_list(v, key);
    else if (key == "events_per_user") c.events_per_user = scalar_of<int>(v, key);
    else if (key == "noise") c.noise = scalar_of<double>(v, key);
    else if (key == "seed") c.seed = scalar_of<uint64_t>(v, key);
    else if (key == "dt") c.spec.dt = scalar_of<double>(v, key);
    else if (key == "M") c.spec.M = scalar_of<int>(v, key);
    else if (key == "dd") c.spec.dd = scalar_of<double>(v, key);
    else if (key == "N") c.spec.N = scalar_of<int>(v, key);
    else throw UsageError("unknown config key '" + key + "'");
  }
  return c;
}

SynthData generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const int pairs = static_cast<int>(cfg.out_bins.size());
  const int per_user = cfg.pois_per_user();

  SynthData out;
  Dataset& ds = out.dataset;
  ds.num_users = cfg.num_users;
  ds.num_pois = cfg.num_users * per_user;
  ds.poi_coords.resize(ds.num_pois);
  for (int u = 0; u < ds.num_users; ++u) ds.user_labels.push_back(std::to_string(u));
  for (int p = 0; p < ds.num_pois; ++p) ds.poi_labels.push_back(std::to_string(p));

  for (int u = 0; u < cfg.num_users; ++u) {
    const int home = u * per_user;
    const LatLon home_at{1.0 + 0.5 * (u / 10), 1.0 + 0.5 * (u % 10)};
    ds.poi_coords[home] = home_at;
    for (int k = 0; k < pairs; ++k) {
      const auto [tau, rho] = cfg.out_bins[k];
      const double km = (rho + 0.5) * cfg.spec.dd;
      const double bearing = 2.0 * std::numbers::pi * k / pairs;
      const LatLon at = destination(home_at, bearing, km);
      if (bin_dist(haversine_km(home_at, at), cfg.spec).index != rho) {
        throw DataError("cannot place satellite for spatial bin " +
                        std::to_string(rho));
      }
      ds.poi_coords[home + 1 + k] = at;
      out.rules.push_back({u, home, tau, rho, home + 1 + k});
      for (int ret : cfg.return_tau) {
        out.rules.push_back({u, home + 1 + k, ret, rho, home});
      }
    }

    Trajectory traj;
    traj.user_id = u;
    int64_t t = kStartEpoch + static_cast<int64_t>(u) * 5 * 3600 +
                static_cast<int64_t>(rng.below(3600));
    int cur = home;
    for (int i = 0; i < cfg.events_per_user; ++i) {
      if (i > 0) {
        int tau;
        int next;
        if (cur == home) {
          const int hour_of_day = static_cast<int>((t % 86400) / 3600);
          const int k = (hour_of_day * pairs / 24 + u) % pairs;
          tau = cfg.out_bins[k].first;
          next = home + 1 + k;
        } else {
          tau = cfg.return_tau[rng.below(cfg.return_tau.size())];
          next = home;
        }
        const double hours = (tau + rng.uniform(0.1, 0.9)) * cfg.spec.dt;
        t += static_cast<int64_t>(std::floor(hours * 3600.0));
        if (rng.uniform() < cfg.noise) {
          next = home + static_cast<int>(rng.below(per_user));
        }
        cur = next;
      }
      traj.events.push_back({u, cur, ds.poi_coords[cur], t});
    }
    ds.trajectories.push_back(std::move(traj));
  }
  ds.validate();
  return out;
}

void write_rules(const std::vector<TransitionRule>& rules,
                 const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "user\tfrom_poi\ttau_bin\trho_bin\tto_poi\n";
  for (const auto& r : rules) {
    out << r.user_id << '\t' << r.from_poi << '\t' << r.tau_bin << '\t'
        << r.rho_bin << '\t' << r.to_poi << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace strelay
