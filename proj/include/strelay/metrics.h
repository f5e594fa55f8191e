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

#ifndef STRELAY_METRICS_H_
#define STRELAY_METRICS_H_

#include <filesystem>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "strelay/ingest.h"
#include "strelay/trainer.h"

namespace strelay {

// Number of POIs scoring at least as high as the target, the target
// included. Ties therefore count against the target.
int rank_of_target(std::span<const double> scores, int target);

struct EvalResult {
  std::map<int, double> acc;   // K -> Acc@K
  std::map<int, double> ndcg;  // K -> NDCG@K
  double mrr = 0.0;
  size_t n_predictions = 0;
};

inline const std::vector<int> kDefaultKs = {1, 5, 10};

// Acc@K = mean [rank <= K]; NDCG@K = mean [rank <= K] / log2(rank + 1);
// MRR = mean 1 / rank.
EvalResult metrics_from_ranks(std::span<const int> ranks,
                              std::span<const int> ks = kDefaultKs);

// One scored test step.
struct RankedStep {
  int user_id = 0;
  int target_poi = 0;
  int rank = 0;
};

// Ranks the true next POI of every (input, next) pair of `test_ds`, using
// only the current event of each step as query context.
std::vector<RankedStep> rank_test_steps(const Checkpoint& ckpt,
                                        const Dataset& test_ds);

EvalResult evaluate(const Checkpoint& ckpt, const Dataset& test_ds,
                    std::span<const int> ks = kDefaultKs);

struct Grouping {
  enum class Kind { kNone, kRogMedian, kLabelFile };
  Kind kind = Kind::kNone;
  std::filesystem::path label_file;  // for kLabelFile
};

struct GroupedEvalResult {
  EvalResult overall;
  std::vector<std::pair<std::string, EvalResult>> groups;  // sorted by name

  // Rows `metric,group,value,n`; the overall rows use group "all".
  void write_csv(std::ostream& out) const;
  void write_table(std::ostream& out) const;
};

// Splits users at the median radius of gyration (computed on `train_ds`):
// "long" when strictly above the median, "short" otherwise. Users without
// training events are "unlabeled".
std::map<int, std::string> rog_median_groups(const Dataset& train_ds);

// Label file rows: kind (user|poi) TAB dense id TAB group. All rows must
// share one kind; poi labels group steps by their target POI.
struct LabelTable {
  bool by_poi = false;
  std::map<int, std::string> labels;
};
LabelTable read_label_file(const std::filesystem::path& path);

GroupedEvalResult grouped_evaluate(const Checkpoint& ckpt,
                                   const Dataset& test_ds,
                                   const Dataset& train_ds,
                                   const Grouping& grouping,
                                   std::span<const int> ks = kDefaultKs);

// Groups already-ranked steps by user (or target POI) label.
GroupedEvalResult group_ranks(std::span<const RankedStep> steps,
                              const std::map<int, std::string>& labels,
                              bool by_poi, std::span<const int> ks);

}  // namespace strelay

#endif  // STRELAY_METRICS_H_
