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

#include "strelay/metrics.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "strelay/common.h"
#include "strelay/entropy.h"

namespace strelay {

int rank_of_target(std::span<const double> scores, int target) {
  if (target < 0 || target >= static_cast<int>(scores.size())) {
    throw DataError("target " + std::to_string(target) + " outside score vector");
  }
  const double s = scores[target];
  int rank = 0;
  for (double v : scores) rank += v >= s ? 1 : 0;
  return rank;
}

EvalResult metrics_from_ranks(std::span<const int> ranks,
                              std::span<const int> ks) {
  EvalResult r;
  r.n_predictions = ranks.size();
  for (int k : ks) {
    r.acc[k] = 0.0;
    r.ndcg[k] = 0.0;
  }
  if (ranks.empty()) return r;
  double rr = 0.0;
  for (int rank : ranks) {
    if (rank < 1) throw DataError("rank must be >= 1");
    rr += 1.0 / rank;
    for (int k : ks) {
      if (rank <= k) {
        r.acc[k] += 1.0;
        r.ndcg[k] += 1.0 / std::log2(rank + 1.0);
      }
    }
  }
  const double n = static_cast<double>(ranks.size());
  r.mrr = rr / n;
  for (int k : ks) {
    r.acc[k] /= n;
    r.ndcg[k] /= n;
  }
  return r;
}

std::vector<RankedStep> rank_test_steps(const Checkpoint& ckpt,
                                        const Dataset& test_ds) {
  if (test_ds.num_users != ckpt.num_users || test_ds.num_pois != ckpt.num_pois) {
    throw DataError("vocabulary mismatch: checkpoint has " +
                    std::to_string(ckpt.num_users) + " users / " +
                    std::to_string(ckpt.num_pois) + " POIs, dataset has " +
                    std::to_string(test_ds.num_users) + " / " +
                    std::to_string(test_ds.num_pois));
  }
  StrelayModel model = ckpt.model();
  std::vector<RankedStep> out;
  for (const Window& w : make_windows(test_ds, ckpt.config.seq_len)) {
    const auto scores = model.predict_poi_scores(w);
    for (size_t i = 0; i < w.inputs.size(); ++i) {
      const int target = w.targets[i].next.poi_id;
      out.push_back({w.user_id, target, rank_of_target(scores[i], target)});
    }
  }
  return out;
}

namespace {

std::vector<int> ranks_of(std::span<const RankedStep> steps) {
  std::vector<int> ranks;
  ranks.reserve(steps.size());
  for (const auto& s : steps) ranks.push_back(s.rank);
  return ranks;
}

}  // namespace

EvalResult evaluate(const Checkpoint& ckpt, const Dataset& test_ds,
                    std::span<const int> ks) {
  const auto steps = rank_test_steps(ckpt, test_ds);
  return metrics_from_ranks(ranks_of(steps), ks);
}

std::map<int, std::string> rog_median_groups(const Dataset& train_ds) {
  std::vector<std::pair<int, double>> rogs;
  for (const auto& traj : train_ds.trajectories) {
    if (traj.events.empty()) continue;
    rogs.emplace_back(traj.user_id, radius_of_gyration(traj, train_ds));
  }
  std::map<int, std::string> groups;
  if (rogs.empty()) return groups;
  std::vector<double> values;
  for (const auto& [u, r] : rogs) values.push_back(r);
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  const double median =
      n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  for (const auto& [u, r] : rogs) groups[u] = r > median ? "long" : "short";
  return groups;
}

LabelTable read_label_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open label file " + path.string());
  LabelTable table;
  std::string line, kind_seen;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string kind, id, group;
    if (!std::getline(fields, kind, '\t') || !std::getline(fields, id, '\t') ||
        !std::getline(fields, group) || group.empty()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected kind<TAB>id<TAB>group");
    }
    if (kind != "user" && kind != "poi") {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": kind must be user or poi");
    }
    if (!kind_seen.empty() && kind != kind_seen) {
      throw DataError(path.string() + ": mixes user and poi labels");
    }
    kind_seen = kind;
    int dense;
    try {
      size_t pos = 0;
      dense = std::stoi(id, &pos);
      if (pos != id.size() || dense < 0) throw std::invalid_argument(id);
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": bad id '" + id + "'");
    }
    table.labels[dense] = group;
  }
  table.by_poi = kind_seen == "poi";
  return table;
}

GroupedEvalResult group_ranks(std::span<const RankedStep> steps,
                              const std::map<int, std::string>& labels,
                              bool by_poi, std::span<const int> ks) {
  GroupedEvalResult out;
  out.overall = metrics_from_ranks(ranks_of(steps), ks);
  std::map<std::string, std::vector<int>> buckets;
  for (const auto& s : steps) {
    const int key = by_poi ? s.target_poi : s.user_id;
    const auto it = labels.find(key);
    buckets[it == labels.end() ? "unlabeled" : it->second].push_back(s.rank);
  }
  for (const auto& [name, ranks] : buckets) {
    out.groups.emplace_back(name, metrics_from_ranks(ranks, ks));
  }
  return out;
}

GroupedEvalResult grouped_evaluate(const Checkpoint& ckpt,
                                   const Dataset& test_ds,
                                   const Dataset& train_ds,
                                   const Grouping& grouping,
                                   std::span<const int> ks) {
  const auto steps = rank_test_steps(ckpt, test_ds);
  switch (grouping.kind) {
    case Grouping::Kind::kNone: {
      GroupedEvalResult out;
      out.overall = metrics_from_ranks(ranks_of(steps), ks);
      return out;
    }
    case Grouping::Kind::kRogMedian: {
      GroupedEvalResult out =
          group_ranks(steps, rog_median_groups(train_ds), false, ks);
      // Both halves are always reported, even when one is empty.
      for (const char* name : {"long", "short"}) {
        const bool present =
            std::any_of(out.groups.begin(), out.groups.end(),
                        [&](const auto& g) { return g.first == name; });
        if (!present) out.groups.emplace_back(name, metrics_from_ranks({}, ks));
      }
      std::sort(out.groups.begin(), out.groups.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      return out;
    }
    case Grouping::Kind::kLabelFile: {
      const LabelTable table = read_label_file(grouping.label_file);
      return group_ranks(steps, table.labels, table.by_poi, ks);
    }
  }
  throw UsageError("unknown grouping");
}

namespace {

void write_rows(std::ostream& out, const std::string& group,
                const EvalResult& r) {
  const auto n = r.n_predictions;
  for (const auto& [k, v] : r.acc) {
    out << "acc@" << k << ',' << group << ',' << v << ',' << n << '\n';
  }
  for (const auto& [k, v] : r.ndcg) {
    out << "ndcg@" << k << ',' << group << ',' << v << ',' << n << '\n';
  }
  out << "mrr," << group << ',' << r.mrr << ',' << n << '\n';
}

}  // namespace

void GroupedEvalResult::write_csv(std::ostream& out) const {
  out << "metric,group,value,n\n";
  out << std::fixed << std::setprecision(6);
  write_rows(out, "all", overall);
  for (const auto& [name, r] : groups) write_rows(out, name, r);
}

void GroupedEvalResult::write_table(std::ostream& out) const {
  std::vector<std::pair<std::string, const EvalResult*>> rows = {
      {"all", &overall}};
  for (const auto& [name, r] : groups) rows.emplace_back(name, &r);
  out << std::left << std::setw(12) << "group";
  for (const auto& [k, v] : overall.acc) {
    out << std::setw(10) << ("Acc@" + std::to_string(k));
  }
  for (const auto& [k, v] : overall.ndcg) {
    out << std::setw(10) << ("NDCG@" + std::to_string(k));
  }
  out << std::setw(10) << "MRR" << "n\n";
  out << std::fixed << std::setprecision(4);
  for (const auto& [name, r] : rows) {
    out << std::setw(12) << name;
    for (const auto& [k, v] : r->acc) out << std::setw(10) << v;
    for (const auto& [k, v] : r->ndcg) out << std::setw(10) << v;
    out << std::setw(10) << r->mrr << r->n_predictions << '\n';
  }
}

}  // namespace strelay
