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

#include <gtest/gtest.h>

#include <algorithm>
#include <string>

#include "test_util.h"

namespace strelay {
namespace {

using testing::TempDir;
using testing::read_file;
using testing::write_file;

TEST(ParseCheckins, ThreeLinesOneUserTwoPois) {
  TempDir dir;
  const auto path = dir / "in.tsv";
  write_file(path,
             "alice\t1333324800\t40.7\t-74.0\tcafe\n"
             "alice\t1333328400\t40.8\t-74.1\toffice\n"
             "alice\t1333332000\t40.7\t-74.0\tcafe\n");
  const Dataset ds = parse_checkins(path);
  EXPECT_EQ(ds.num_users, 1);
  EXPECT_EQ(ds.num_pois, 2);
  EXPECT_EQ(ds.num_checkins(), 3u);
  EXPECT_TRUE(std::filesystem::exists(dir / "in.tsv.idmap.tsv"));
}

TEST(ParseCheckins, LatitudeOutOfRangeNamesLine) {
  TempDir dir;
  const auto path = dir / "in.tsv";
  write_file(path,
             "u\t1333324800\t40.0\t10.0\tp\n"
             "u\t1333324900\t91.0\t10.0\tp\n");
  try {
    parse_checkins(path, false);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos)
        << e.what();
  }
}

TEST(ParseCheckins, MalformedLineNamesLine) {
  TempDir dir;
  const auto path = dir / "in.tsv";
  write_file(path,
             "u\t1333324800\t40.0\t10.0\tp\n"
             "u\t1333324900\t40.0\n"
             "u\t1333324900\t40.0\t10.0\tp\n");
  try {
    parse_checkins(path, false);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos);
  }
}

TEST(ParseCheckins, RejectsBadFields) {
  TempDir dir;
  const auto path = dir / "in.tsv";
  for (const char* line :
       {"u\tnot-a-time\t1\t1\tp\n", "u\t100\tx\t1\tp\n",
        "u\t100\t1\t181\tp\n", "\t100\t1\t1\tp\n"}) {
    write_file(path, line);
    EXPECT_THROW(parse_checkins(path, false), DataError) << line;
  }
}

TEST(ParseCheckins, EmptyFileIsError) {
  TempDir dir;
  write_file(dir / "empty.tsv", "");
  EXPECT_THROW(parse_checkins(dir / "empty.tsv", false), DataError);
  EXPECT_THROW(parse_checkins(dir / "missing.tsv", false), DataError);
}

TEST(ParseCheckins, SortsShuffledTimestamps) {
  TempDir dir;
  const auto path = dir / "in.tsv";
  write_file(path,
             "u\t300\t1\t1\ta\n"
             "u\t100\t1\t1\tb\n"
             "u\t200\t1\t1\tc\n"
             "u\t100\t1\t1\td\n");
  const Dataset ds = parse_checkins(path, false);
  const auto& ev = ds.trajectories[0].events;
  ASSERT_EQ(ev.size(), 4u);
  EXPECT_TRUE(std::is_sorted(ev.begin(), ev.end(),
                             [](const CheckIn& a, const CheckIn& b) {
                               return a.timestamp < b.timestamp;
                             }));
  // Equal timestamps keep input order: b before d.
  EXPECT_EQ(ds.poi_labels[ev[0].poi_id], "b");
  EXPECT_EQ(ds.poi_labels[ev[1].poi_id], "d");
}

TEST(ParseCheckins, NumericIdsDensifyInNumericOrder) {
  TempDir dir;
  const auto path = dir / "in.tsv";
  write_file(path,
             "10\t100\t1\t1\t7\n"
             "9\t100\t1\t1\t30\n"
             "10\t200\t1\t1\t30\n");
  const Dataset ds = parse_checkins(path);
  EXPECT_EQ(ds.user_labels, (std::vector<std::string>{"9", "10"}));
  EXPECT_EQ(ds.poi_labels, (std::vector<std::string>{"7", "30"}));
  const std::string map = read_file(dir / "in.tsv.idmap.tsv");
  EXPECT_NE(map.find("#user"), std::string::npos);
  EXPECT_NE(map.find("#poi"), std::string::npos);
  EXPECT_NE(map.find("10\t1"), std::string::npos);
}

TEST(ParseTimestamp, EpochAndIsoForms) {
  EXPECT_EQ(parse_timestamp("86400"), 86400);
  EXPECT_EQ(parse_timestamp("1970-01-02T00:00:00Z"), 86400);
  EXPECT_EQ(parse_timestamp("1970-01-02 00:00:01"), 86401);
  EXPECT_EQ(parse_timestamp("2012-04-02T00:00:00+00:00"), 1333324800);
  EXPECT_EQ(parse_timestamp("2012-04-02T00:00:00.250Z"), 1333324800);
  EXPECT_THROW(parse_timestamp("2012-13-02T00:00:00Z"), DataError);
  EXPECT_THROW(parse_timestamp(""), DataError);
}

TEST(WriteCheckins, RoundTripsThroughParser) {
  TempDir dir;
  const Dataset ds = testing::random_dataset(3);
  write_checkins(ds, dir / "out.tsv");
  const Dataset back = parse_checkins(dir / "out.tsv", false);
  ASSERT_EQ(back.num_users, ds.num_users);
  EXPECT_EQ(back.num_checkins(), ds.num_checkins());
  for (int u = 0; u < ds.num_users; ++u) {
    ASSERT_EQ(back.trajectories[u].events.size(),
              ds.trajectories[u].events.size());
    for (size_t i = 0; i < ds.trajectories[u].events.size(); ++i) {
      const CheckIn& a = ds.trajectories[u].events[i];
      const CheckIn& b = back.trajectories[u].events[i];
      EXPECT_EQ(a.timestamp, b.timestamp);
      EXPECT_EQ(a.coord, b.coord);
    }
  }
}

TEST(FilterUsers, Threshold) {
  std::vector<testing::Event> events;
  for (int i = 0; i < 150; ++i) events.push_back({0, i % 3, 1000 + i});
  for (int i = 0; i < 80; ++i) events.push_back({1, 3, 1000 + i});
  const Dataset ds = testing::make_dataset(2, 4, events);
  const Dataset out = filter_users(ds, 100);
  EXPECT_EQ(out.num_users, 1);
  EXPECT_EQ(out.num_pois, 3);  // POI 3 had visits only from the dropped user
  EXPECT_EQ(out.user_labels, (std::vector<std::string>{"u0"}));
  out.validate();
}

TEST(FilterUsers, IdentityCases) {
  const Dataset ds = testing::random_dataset(11);
  // Every POI of a random dataset may not be visited, so compare visits.
  const Dataset a = filter_users(ds, 1);
  EXPECT_EQ(a.num_users, ds.num_users);
  EXPECT_EQ(a.num_checkins(), ds.num_checkins());

  std::vector<testing::Event> events;
  for (int u = 0; u < 2; ++u) {
    for (int i = 0; i < 100; ++i) events.push_back({u, u, 1000 + i});
  }
  const Dataset full = testing::make_dataset(2, 2, events);
  const Dataset b = filter_users(full, 100);
  EXPECT_EQ(b.num_users, 2);
  EXPECT_EQ(b.num_checkins(), 200u);
}

TEST(FilterUsers, NoSurvivorsIsError) {
  const Dataset ds = testing::make_dataset(1, 1, {{0, 0, 100}});
  try {
    filter_users(ds, 5);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_STREQ(e.what(), "no users survive filter");
  }
}

TEST(FilterUsers, ReindexIsBijection) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const Dataset ds = testing::random_dataset(seed);
    const bool any = std::any_of(
        ds.trajectories.begin(), ds.trajectories.end(),
        [](const Trajectory& t) { return t.events.size() >= 10; });
    if (!any) {
      EXPECT_THROW(filter_users(ds, 10), DataError);
      continue;
    }
    const Dataset out = filter_users(ds, 10);
    out.validate();
    std::vector<std::string> labels = out.poi_labels;
    std::sort(labels.begin(), labels.end());
    EXPECT_EQ(std::unique(labels.begin(), labels.end()), labels.end());
    std::vector<bool> used(out.num_pois, false);
    for (const auto& t : out.trajectories) {
      for (const auto& e : t.events) used[e.poi_id] = true;
    }
    EXPECT_TRUE(std::all_of(used.begin(), used.end(), [](bool b) { return b; }));
  }
}

TEST(ChronoSplit, EightyPercentFractionAndDrops) {
  std::vector<testing::Event> events;
  for (int i = 0; i < 10; ++i) events.push_back({0, 0, 100 + i});
  for (int i = 0; i < 5; ++i) events.push_back({1, 0, 100 + i});
  const Dataset ds = testing::make_dataset(2, 1, events);
  const auto [train, test] = chrono_split(ds, 0.8);
  ASSERT_EQ(train.trajectories.size(), 2u);
  EXPECT_EQ(train.trajectories[0].events.size(), 8u);
  EXPECT_EQ(train.trajectories[1].events.size(), 4u);
  ASSERT_EQ(test.trajectories.size(), 1u);  // user 1 keeps a single event
  EXPECT_EQ(test.trajectories[0].user_id, 0);
  EXPECT_EQ(test.trajectories[0].events.size(), 2u);
  EXPECT_EQ(train.num_pois, ds.num_pois);
  EXPECT_EQ(test.num_users, ds.num_users);
}

TEST(ChronoSplit, HalfSplitOfFour) {
  const Dataset ds = testing::make_dataset(
      1, 1, {{0, 0, 1}, {0, 0, 2}, {0, 0, 3}, {0, 0, 4}});
  const auto [train, test] = chrono_split(ds, 0.5);
  EXPECT_EQ(train.trajectories[0].events.size(), 2u);
  EXPECT_EQ(test.trajectories[0].events.size(), 2u);
  EXPECT_EQ(test.trajectories[0].events[0].timestamp, 3);
  EXPECT_THROW(chrono_split(ds, 1.0), UsageError);
}

TEST(MakeWindows, FortyOneEvents) {
  std::vector<testing::Event> events;
  for (int i = 0; i < 41; ++i) events.push_back({0, 0, 100 + i});
  const auto windows = make_windows(testing::make_dataset(1, 1, events), 20);
  ASSERT_EQ(windows.size(), 2u);
  EXPECT_EQ(windows[0].inputs.size(), 20u);
  EXPECT_EQ(windows[1].inputs.size(), 20u);
  EXPECT_EQ(windows[1].inputs.back().timestamp, 139);
  EXPECT_EQ(windows[1].targets.back().next.timestamp, 140);
}

TEST(MakeWindows, MinimalCases) {
  const auto two =
      make_windows(testing::make_dataset(1, 1, {{0, 0, 1}, {0, 0, 2}}), 20);
  ASSERT_EQ(two.size(), 1u);
  EXPECT_EQ(two[0].inputs.size(), 1u);
  EXPECT_TRUE(
      make_windows(testing::make_dataset(1, 1, {{0, 0, 1}}), 20).empty());
  EXPECT_THROW(make_windows(testing::make_dataset(1, 1, {{0, 0, 1}}), 0),
               UsageError);
}

// Window inputs concatenate back to events[0..n-2]; targets are the
// successors.
TEST(MakeWindows, RoundTripProperty) {
  for (uint64_t seed = 0; seed < 50; ++seed) {
    const Dataset ds = testing::random_dataset(seed);
    const int seq_len = 1 + static_cast<int>(seed % 7);
    const auto windows = make_windows(ds, seq_len);
    std::vector<std::vector<CheckIn>> inputs(ds.num_users);
    for (const Window& w : windows) {
      ASSERT_GE(w.inputs.size(), 1u);
      ASSERT_LE(w.inputs.size(), static_cast<size_t>(seq_len));
      ASSERT_EQ(w.inputs.size(), w.targets.size());
      for (const CheckIn& c : w.inputs) inputs[w.user_id].push_back(c);
    }
    for (const auto& t : ds.trajectories) {
      const auto& ev = t.events;
      const std::vector<CheckIn> expect(
          ev.begin(), ev.size() < 2 ? ev.begin() : ev.end() - 1);
      EXPECT_EQ(inputs[t.user_id], expect);
    }
    std::vector<size_t> pos(ds.num_users, 0);
    for (const Window& w : windows) {
      const auto& ev = ds.trajectories[w.user_id].events;
      for (size_t i = 0; i < w.targets.size(); ++i) {
        EXPECT_EQ(w.targets[i].next, ev[++pos[w.user_id]]);
      }
    }
  }
}

TEST(Dataset, ValidateCatchesBrokenInvariants) {
  Dataset ds = testing::make_dataset(1, 2, {{0, 0, 10}, {0, 1, 20}});
  ds.validate();
  Dataset unsorted = ds;
  std::swap(unsorted.trajectories[0].events[0],
            unsorted.trajectories[0].events[1]);
  EXPECT_THROW(unsorted.validate(), DataError);
  Dataset bad_poi = ds;
  bad_poi.trajectories[0].events[0].poi_id = 5;
  EXPECT_THROW(bad_poi.validate(), DataError);
  Dataset missing_coord = ds;
  missing_coord.poi_coords.pop_back();
  EXPECT_THROW(missing_coord.validate(), DataError);
}

}  // namespace
}  // namespace strelay
