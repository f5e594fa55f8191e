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

// strelay: command-line entry point.
//
//   strelay ingest <input.tsv> --out <dataset.tsv> [--min-checkins 100]
//   strelay entropy <dataset.tsv> [--dt 1 --M 24 --dd 1 --N 30] [--out e.csv]
//   strelay train <dataset.tsv> --out <model.ckpt> [--config f] [--variant v]
//                 [--encoder e] [--seed s] [--set key=value ...]
//   strelay eval <model.ckpt> <dataset.tsv> [--group none|rog_median|labels:f]
//                [--out metrics.csv]
//   strelay synth --out <dataset.tsv> [--config f] [--seed s] [--rules r.tsv]
//   strelay gradcheck [--d 4 --M 6 --N 5 --users 3 --pois 10 --encoder gru]
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "strelay/common.h"
#include "strelay/config.h"
#include "strelay/entropy.h"
#include "strelay/gradcheck.h"
#include "strelay/ingest.h"
#include "strelay/metrics.h"
#include "strelay/synthgen.h"
#include "strelay/trainer.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace strelay {
namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

// Flags > config file > defaults.
json gather_config(const std::string& config_path,
                   const std::vector<std::string>& sets, const json& flags) {
  json cfg = json::object();
  if (!config_path.empty()) cfg = load_config_file(config_path);
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw UsageError("--set expects key=value, got '" + kv + "'");
    }
    cfg[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  merge_config(cfg, flags);
  return cfg;
}

Dataset load_dataset(const std::string& path) {
  if (!fs::exists(path)) throw DataError("dataset not found: " + path);
  return parse_checkins(path, /*write_map=*/false);
}

struct IngestArgs {
  std::string input, out;
  int min_checkins = 100;
};

void run_ingest(const IngestArgs& a) {
  const Dataset raw = parse_checkins(a.input);
  const Dataset ds = filter_users(raw, a.min_checkins);
  write_checkins(ds, a.out);
  write_idmap(ds, a.out + ".idmap.tsv");
  std::cout << "users " << ds.num_users << " pois " << ds.num_pois
            << " checkins " << ds.num_checkins() << '\n';
}

struct EntropyArgs {
  std::string dataset, out, config;
  std::optional<double> dt, dd;
  std::optional<int> M, N;
};

void run_entropy(const EntropyArgs& a) {
  json flags = json::object();
  if (a.dt) flags["dt"] = *a.dt;
  if (a.M) flags["M"] = *a.M;
  if (a.dd) flags["dd"] = *a.dd;
  if (a.N) flags["N"] = *a.N;
  const json cfg = gather_config(a.config, {}, flags);
  TrainConfig defaults;
  for (const auto& [key, v] : cfg.items()) {
    if (key != "dt" && key != "M" && key != "dd" && key != "N") {
      throw UsageError("unknown config key '" + key + "' for entropy");
    }
  }
  const IntervalSpec spec = TrainConfig::from_json(cfg, defaults).spec;
  const Dataset ds = load_dataset(a.dataset);
  const EntropyReport report = entropy_report(ds, spec);
  if (!a.out.empty()) report.write_csv(fs::path(a.out));
  report.write_summary(std::cout);
}

struct TrainArgs {
  std::string dataset, out, config, variant, encoder;
  std::optional<uint64_t> seed;
  std::vector<std::string> sets;
};

void run_train(const TrainArgs& a) {
  json flags = json::object();
  if (!a.variant.empty()) flags["variant"] = a.variant;
  if (!a.encoder.empty()) flags["encoder"] = a.encoder;
  if (a.seed) flags["seed"] = *a.seed;
  const TrainConfig cfg =
      TrainConfig::from_json(gather_config(a.config, a.sets, flags));
  cfg.validate();
  const Dataset ds = load_dataset(a.dataset);
  const auto [train_ds, test_ds] = chrono_split(ds, cfg.train_frac);
  std::cout << std::setprecision(10);
  const Checkpoint ckpt = train(train_ds, cfg, [](int epoch, double loss) {
    std::cout << epoch << '\t' << loss << std::endl;
  });
  save_checkpoint(ckpt, a.out);
}

struct EvalArgs {
  std::string ckpt, dataset, group = "none", out;
};

Grouping parse_grouping(const std::string& g) {
  if (g == "none") return {};
  if (g == "rog_median") return {Grouping::Kind::kRogMedian, {}};
  if (g.rfind("labels:", 0) == 0 && g.size() > 7) {
    return {Grouping::Kind::kLabelFile, g.substr(7)};
  }
  throw UsageError("--group expects none, rog_median or labels:<file>");
}

void run_eval(const EvalArgs& a) {
  const Grouping grouping = parse_grouping(a.group);
  const Checkpoint ckpt = load_checkpoint(a.ckpt);
  const Dataset ds = load_dataset(a.dataset);
  const auto [train_ds, test_ds] = chrono_split(ds, ckpt.config.train_frac);
  const GroupedEvalResult result =
      grouped_evaluate(ckpt, test_ds, train_ds, grouping);
  result.write_table(std::cout);
  if (!a.out.empty()) {
    std::ofstream out(a.out);
    if (!out) throw DataError("cannot write " + a.out);
    result.write_csv(out);
  }
}

struct SynthArgs {
  std::string out, config, rules;
  std::optional<uint64_t> seed;
  std::vector<std::string> sets;
};

void run_synth(const SynthArgs& a) {
  json flags = json::object();
  if (a.seed) flags["seed"] = *a.seed;
  const SynthConfig cfg =
      SynthConfig::from_json(gather_config(a.config, a.sets, flags));
  const SynthData data = generate(cfg);
  write_checkins(data.dataset, a.out);
  const fs::path rules = a.rules.empty()
                             ? fs::path(a.out).parent_path() / "rules.tsv"
                             : fs::path(a.rules);
  write_rules(data.rules, rules);
  std::cout << "users " << data.dataset.num_users << " pois "
            << data.dataset.num_pois << " checkins "
            << data.dataset.num_checkins() << '\n';
}

int run_gradcheck(const ModelGradCheckOptions& o) {
  const ad::GradCheckResult r = check_model_gradients(o);
  std::cout << std::scientific << std::setprecision(3)
            << "max_rel_error " << r.max_rel_error << " (" << r.worst_param
            << "[" << r.worst_index << "] analytic " << r.analytic
            << " numeric " << r.numeric << ", " << r.entries_checked
            << " entries)\n";
  return r.max_rel_error < 1e-4 ? 0 : kExitNumeric;
}

int run(int argc, char** argv) {
  CLI::App app{"STRelay next-location prediction toolkit"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Parse, filter and canonicalize a check-in log");
  c_ingest->add_option("input", ingest.input, "Tab-separated check-in log")->required();
  c_ingest->add_option("--out", ingest.out, "Canonical dataset path")->required();
  c_ingest->add_option("--min-checkins", ingest.min_checkins, "Minimum events per user");

  EntropyArgs ent;
  auto* c_entropy = app.add_subcommand("entropy", "Per-user mobility entropy report");
  c_entropy->add_option("dataset", ent.dataset)->required();
  c_entropy->add_option("--dt", ent.dt, "Hours per temporal bin");
  c_entropy->add_option("--M", ent.M, "Temporal bin count");
  c_entropy->add_option("--dd", ent.dd, "Kilometers per spatial bin");
  c_entropy->add_option("--N", ent.N, "Spatial bin count");
  c_entropy->add_option("--config", ent.config);
  c_entropy->add_option("--out", ent.out, "CSV output path");

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train a model on the first split of a dataset");
  c_train->add_option("dataset", tr.dataset)->required();
  c_train->add_option("--out", tr.out, "Checkpoint path")->required();
  c_train->add_option("--config", tr.config, "JSON or key=value file");
  c_train->add_option("--variant", tr.variant,
                      "full|no_spatial|no_temporal|no_relaying|no_context");
  c_train->add_option("--encoder", tr.encoder, "gru|flashback");
  c_train->add_option("--seed", tr.seed);
  c_train->add_option("--set", tr.sets, "Override any config key (key=value)");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Evaluate a checkpoint on the held-out split");
  c_eval->add_option("ckpt", ev.ckpt)->required();
  c_eval->add_option("dataset", ev.dataset)->required();
  c_eval->add_option("--group", ev.group, "none|rog_median|labels:<file>");
  c_eval->add_option("--out", ev.out, "CSV output path");

  SynthArgs sy;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  c_synth->add_option("--out", sy.out, "Dataset path")->required();
  c_synth->add_option("--config", sy.config);
  c_synth->add_option("--seed", sy.seed);
  c_synth->add_option("--rules", sy.rules, "Rule table path (default rules.tsv next to --out)");
  c_synth->add_option("--set", sy.sets, "Override any config key (key=value)");

  ModelGradCheckOptions gc;
  std::string gc_encoder = "gru", gc_variant = "full";
  auto* c_grad = app.add_subcommand("gradcheck", "Finite-difference check of a full model step");
  c_grad->add_option("--d", gc.d);
  c_grad->add_option("--M", gc.M);
  c_grad->add_option("--N", gc.N);
  c_grad->add_option("--users", gc.users);
  c_grad->add_option("--pois", gc.pois);
  c_grad->add_option("--events", gc.events_per_user, "Events per user");
  c_grad->add_option("--eps", gc.eps, "Finite-difference step");
  c_grad->add_option("--hidden-dim", gc.hidden_dim);
  c_grad->add_option("--encoder", gc_encoder);
  c_grad->add_option("--variant", gc_variant);
  c_grad->add_option("--seed", gc.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*c_ingest) run_ingest(ingest);
    else if (*c_entropy) run_entropy(ent);
    else if (*c_train) run_train(tr);
    else if (*c_eval) run_eval(ev);
    else if (*c_synth) run_synth(sy);
    else if (*c_grad) {
      gc.encoder = parse_encoder(gc_encoder);
      gc.variant = parse_variant(gc_variant);
      return run_gradcheck(gc);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}

}  // namespace
}  // namespace strelay

int main(int argc, char** argv) { return strelay::run(argc, argv); }
