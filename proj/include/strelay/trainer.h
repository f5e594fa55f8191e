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

#ifndef STRELAY_TRAINER_H_
#define STRELAY_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "strelay/diffcore.h"
#include "strelay/ingest.h"
#include "strelay/model.h"
#include "strelay/model_config.h"

namespace strelay {

enum class OptimizerKind { kSgd, kAdam };

struct TrainConfig {
  int d = 10;
  int mlp_hidden = 10;
  double lr = 0.01;
  int epochs = 25;
  uint64_t seed = 1;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int seq_len = 20;
  double train_frac = 0.8;
  Variant variant = Variant::kFull;
  EncoderConfig encoder;
  IntervalSpec spec;

  void validate() const;
  ModelConfig model_config(int num_users, int num_pois) const;

  nlohmann::json to_json() const;
  // Overrides fields of `base` with the keys present in `j`. Values may be
  // JSON-typed or strings. Unknown keys throw UsageError naming the key.
  static TrainConfig from_json(const nlohmann::json& j, TrainConfig base);
  static TrainConfig from_json(const nlohmann::json& j) {
    return from_json(j, TrainConfig{});
  }
};

// Adam (or plain SGD) over every tensor of a ParamStore.
class Optimizer {
 public:
  Optimizer(const TrainConfig& cfg, const ad::ParamStore& params);
  void step(ad::ParamStore& params);

 private:
  OptimizerKind kind_;
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::map<std::string, std::vector<double>> m_, v_;
};

inline constexpr uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  uint32_t version = kCheckpointVersion;
  TrainConfig config;
  int num_users = 0;
  int num_pois = 0;
  ad::ParamStore params;
  int epoch = 0;
  double final_loss = 0.0;
  uint64_t rng_state = 0;

  ModelConfig model_config() const {
    return config.model_config(num_users, num_pois);
  }
  StrelayModel model() const { return StrelayModel(model_config(), params); }
};

// Called once per epoch with the mean per-step L_total.
using EpochCallback = std::function<void(int epoch, double mean_loss)>;

// Windows `train_ds`, labels interval targets and runs `cfg.epochs` epochs of
// per-window updates over a seeded shuffle.
Checkpoint train(const Dataset& train_ds, const TrainConfig& cfg,
                 const EpochCallback& on_epoch = {});

// Canonical little-endian encoding: "STRL", u32 version, u32 config length +
// JSON, u32 users, u32 pois, u32 epoch, f64 final loss, u64 RNG state,
// u32 tensor count, then per tensor: u32 name length + name, u32 rows,
// u32 cols, rows * cols f64 values.
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace strelay

#endif  // STRELAY_TRAINER_H_
