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

#include "strelay/ingest.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <chrono>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "strelay/common.h"

namespace strelay {
namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool is_integer(const std::string& s) {
  int64_t v;
  return parse_number(std::string_view(s), v);
}

// Dense ids in numeric order if every label is an integer, else
// lexicographic order.
std::map<std::string, int> densify(std::vector<std::string> labels) {
  const bool numeric = std::all_of(labels.begin(), labels.end(), is_integer);
  if (numeric) {
    std::sort(labels.begin(), labels.end(),
              [](const std::string& a, const std::string& b) {
                return std::stoll(a) < std::stoll(b);
              });
  } else {
    std::sort(labels.begin(), labels.end());
  }
  std::map<std::string, int> ids;
  for (const auto& l : labels) ids.emplace(l, static_cast<int>(ids.size()));
  return ids;
}

}  // namespace

size_t Dataset::num_checkins() const {
  size_t n = 0;
  for (const auto& t : trajectories) n += t.events.size();
  return n;
}

void Dataset::validate() const {
  if (static_cast<int>(poi_coords.size()) != num_pois) {
    throw DataError("poi_coords has " + std::to_string(poi_coords.size()) +
                    " entries, expected " + std::to_string(num_pois));
  }
  for (const auto& c : poi_coords) {
    if (!(c.lat >= -90.0 && c.lat <= 90.0 && c.lon >= -180.0 &&
          c.lon <= 180.0)) {
      throw DataError("POI coordinate out of range");
    }
  }
  for (const auto& traj : trajectories) {
    if (traj.user_id < 0 || traj.user_id >= num_users) {
      throw DataError("trajectory user id " + std::to_string(traj.user_id) +
                      " out of range");
    }
    for (size_t i = 0; i < traj.events.size(); ++i) {
      const CheckIn& e = traj.events[i];
      if (e.user_id != traj.user_id) {
        throw DataError("event user id differs from trajectory user id");
      }
      if (e.poi_id < 0 || e.poi_id >= num_pois) {
        throw DataError("poi id " + std::to_string(e.poi_id) +
                        " out of range");
      }
      if (e.timestamp <= 0) throw DataError("non-positive timestamp");
      if (i > 0 && e.timestamp < traj.events[i - 1].timestamp) {
        throw DataError("events of user " + std::to_string(traj.user_id) +
                        " are not time-ordered");
      }
    }
  }
}

int64_t parse_timestamp(const std::string& field) {
  int64_t epoch;
  if (parse_number(std::string_view(field), epoch)) return epoch;

  // YYYY-MM-DD[T ]HH:MM:SS[.fff][Z|+00:00]
  const std::string_view s(field);
  auto bad = [&]() {
    return DataError("unrecognized timestamp '" + field + "'");
  };
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' ||
      (s[10] != 'T' && s[10] != ' ') || s[13] != ':' || s[16] != ':') {
    throw bad();
  }
  int y, mo, d, h, mi, sec;
  if (!parse_number(s.substr(0, 4), y) || !parse_number(s.substr(5, 2), mo) ||
      !parse_number(s.substr(8, 2), d) || !parse_number(s.substr(11, 2), h) ||
      !parse_number(s.substr(14, 2), mi) ||
      !parse_number(s.substr(17, 2), sec)) {
    throw bad();
  }
  std::string_view rest = s.substr(19);
  if (!rest.empty() && rest.front() == '.') {
    size_t i = 1;
    while (i < rest.size() && rest[i] >= '0' && rest[i] <= '9') ++i;
    rest.remove_prefix(i);
  }
  if (!(rest.empty() || rest == "Z" || rest == "+00:00" || rest == "+0000")) {
    throw bad();
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) throw bad();
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<int64_t>(days) * 86400 + h * 3600 + mi * 60 + sec;
}

Dataset parse_checkins(const std::filesystem::path& path, bool write_map) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());

  struct RawEvent {
    std::string user, poi;
    LatLon coord;
    int64_t timestamp;
  };
  std::vector<RawEvent> raw;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto fields = split_tabs(line);
    if (fields.size() != 5) {
      throw DataError(where + ": expected 5 tab-separated fields, got " +
                      std::to_string(fields.size()));
    }
    RawEvent ev;
    ev.user = fields[0];
    ev.poi = fields[4];
    if (ev.user.empty() || ev.poi.empty()) {
      throw DataError(where + ": empty id");
    }
    try {
      ev.timestamp = parse_timestamp(fields[1]);
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    if (ev.timestamp <= 0) {
      throw DataError(where + ": timestamp must be positive");
    }
    if (!parse_number(std::string_view(fields[2]), ev.coord.lat) ||
        !parse_number(std::string_view(fields[3]), ev.coord.lon)) {
      throw DataError(where + ": malformed latitude/longitude");
    }
    if (!(ev.coord.lat >= -90.0 && ev.coord.lat <= 90.0)) {
      throw DataError(where + ": latitude " + fields[2] + " out of range");
    }
    if (!(ev.coord.lon >= -180.0 && ev.coord.lon <= 180.0)) {
      throw DataError(where + ": longitude " + fields[3] + " out of range");
    }
    raw.push_back(std::move(ev));
  }
  if (raw.empty()) throw DataError(path.string() + ": no check-ins");

  std::vector<std::string> users, pois;
  for (const auto& ev : raw) {
    users.push_back(ev.user);
    pois.push_back(ev.poi);
  }
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());
  std::sort(pois.begin(), pois.end());
  pois.erase(std::unique(pois.begin(), pois.end()), pois.end());
  const auto user_ids = densify(users);
  const auto poi_ids = densify(pois);

  Dataset ds;
  ds.num_users = static_cast<int>(user_ids.size());
  ds.num_pois = static_cast<int>(poi_ids.size());
  ds.user_labels.resize(ds.num_users);
  ds.poi_labels.resize(ds.num_pois);
  for (const auto& [label, id] : user_ids) ds.user_labels[id] = label;
  for (const auto& [label, id] : poi_ids) ds.poi_labels[id] = label;
  ds.poi_coords.resize(ds.num_pois);
  std::vector<bool> seen(ds.num_pois, false);

  ds.trajectories.resize(ds.num_users);
  for (int u = 0; u < ds.num_users; ++u) ds.trajectories[u].user_id = u;
  for (const auto& ev : raw) {
    CheckIn c;
    c.user_id = user_ids.at(ev.user);
    c.poi_id = poi_ids.at(ev.poi);
    c.timestamp = ev.timestamp;
    // A POI keeps the coordinates of its first occurrence.
    if (!seen[c.poi_id]) {
      ds.poi_coords[c.poi_id] = ev.coord;
      seen[c.poi_id] = true;
    }
    c.coord = ds.poi_coords[c.poi_id];
    ds.trajectories[c.user_id].events.push_back(c);
  }
  for (auto& traj : ds.trajectories) {
    std::stable_sort(traj.events.begin(), traj.events.end(),
                     [](const CheckIn& a, const CheckIn& b) {
                       return a.timestamp < b.timestamp;
                     });
  }
  ds.validate();
  if (write_map) {
    write_idmap(ds, std::filesystem::path(path.string() + ".idmap.tsv"));
  }
  return ds;
}

void write_idmap(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "#user\n";
  for (int u = 0; u < ds.num_users; ++u) {
    out << ds.user_labels.at(u) << '\t' << u << '\n';
  }
  out << "#poi\n";
  for (int p = 0; p < ds.num_pois; ++p) {
    out << ds.poi_labels.at(p) << '\t' << p << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

void write_checkins(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(17);
  for (const auto& traj : ds.trajectories) {
    for (const auto& e : traj.events) {
      out << e.user_id << '\t' << e.timestamp << '\t' << e.coord.lat << '\t'
          << e.coord.lon << '\t' << e.poi_id << '\n';
    }
  }
  if (!out) throw DataError("failed writing " + path.string());
}

Dataset filter_users(const Dataset& ds, int min_checkins) {
  if (min_checkins < 1) throw UsageError("min_checkins must be >= 1");
  std::vector<const Trajectory*> kept;
  for (const auto& traj : ds.trajectories) {
    if (static_cast<int>(traj.events.size()) >= min_checkins) {
      kept.push_back(&traj);
    }
  }
  if (kept.empty()) throw DataError("no users survive filter");

  std::vector<int> user_map(ds.num_users, -1);
  std::vector<int> poi_map(ds.num_pois, -1);
  std::vector<bool> user_kept(ds.num_users, false);
  std::vector<bool> poi_used(ds.num_pois, false);
  for (const Trajectory* t : kept) {
    user_kept[t->user_id] = true;
    for (const auto& e : t->events) poi_used[e.poi_id] = true;
  }

  Dataset out;
  for (int u = 0; u < ds.num_users; ++u) {
    if (!user_kept[u]) continue;
    user_map[u] = out.num_users++;
    if (!ds.user_labels.empty()) out.user_labels.push_back(ds.user_labels[u]);
  }
  for (int p = 0; p < ds.num_pois; ++p) {
    if (!poi_used[p]) continue;
    poi_map[p] = out.num_pois++;
    out.poi_coords.push_back(ds.poi_coords[p]);
    if (!ds.poi_labels.empty()) out.poi_labels.push_back(ds.poi_labels[p]);
  }

  // Keep trajectories ordered by their new user id.
  std::vector<const Trajectory*> ordered = kept;
  std::sort(ordered.begin(), ordered.end(),
            [](const Trajectory* a, const Trajectory* b) {
              return a->user_id < b->user_id;
            });
  for (const Trajectory* t : ordered) {
    Trajectory nt;
    nt.user_id = user_map[t->user_id];
    nt.events.reserve(t->events.size());
    for (CheckIn e : t->events) {
      e.user_id = nt.user_id;
      e.poi_id = poi_map[e.poi_id];
      nt.events.push_back(e);
    }
    out.trajectories.push_back(std::move(nt));
  }
  return out;
}

std::pair<Dataset, Dataset> chrono_split(const Dataset& ds, double train_frac) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw UsageError("train_frac must lie in (0, 1)");
  }
  Dataset train, test;
  for (Dataset* side : {&train, &test}) {
    side->num_users = ds.num_users;
    side->num_pois = ds.num_pois;
    side->poi_coords = ds.poi_coords;
    side->user_labels = ds.user_labels;
    side->poi_labels = ds.poi_labels;
  }
  for (const auto& traj : ds.trajectories) {
    const size_t n = traj.events.size();
    const auto cut = static_cast<size_t>(
        std::floor(train_frac * static_cast<double>(n)));
    Trajectory head{traj.user_id, {traj.events.begin(),
                                   traj.events.begin() + cut}};
    Trajectory tail{traj.user_id, {traj.events.begin() + cut,
                                   traj.events.end()}};
    if (head.events.size() >= 2) train.trajectories.push_back(std::move(head));
    if (tail.events.size() >= 2) test.trajectories.push_back(std::move(tail));
  }
  return {std::move(train), std::move(test)};
}

std::vector<Window> make_windows(const Dataset& ds, int seq_len) {
  if (seq_len < 1) throw UsageError("sequence length must be >= 1");
  std::vector<Window> windows;
  for (const auto& traj : ds.trajectories) {
    const size_t pairs = traj.events.size() < 2 ? 0 : traj.events.size() - 1;
    for (size_t start = 0; start < pairs; start += seq_len) {
      const size_t end = std::min(pairs, start + seq_len);
      Window w;
      w.user_id = traj.user_id;
      for (size_t i = start; i < end; ++i) {
        w.inputs.push_back(traj.events[i]);
        w.targets.push_back(StepTarget{traj.events[i + 1], {}, {}});
      }
      windows.push_back(std::move(w));
    }
  }
  return windows;
}

}  // namespace strelay
