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

#include "strelay/model.h"

#include <string>

#include "strelay/embeddings.h"
#include "strelay/history_encoders.h"
#include "strelay/relay_context.h"

namespace strelay {

ad::ParamStore StrelayModel::make_params(const ModelConfig& cfg, Rng& rng) {
  cfg.validate();
  ad::ParamStore params;
  Embeddings::register_params(cfg, params, rng);
  RelayContext::register_params(cfg, params, rng);
  HistoryEncoder::register_params(cfg, params, rng);
  Heads::register_params(cfg, params, rng);
  return params;
}

StrelayModel::StrelayModel(const ModelConfig& cfg, Rng& rng)
    : cfg_(cfg), params_(make_params(cfg, rng)) {}

StrelayModel::StrelayModel(const ModelConfig& cfg, ad::ParamStore params)
    : cfg_(cfg), params_(std::move(params)) {
  Rng scratch(0);
  const ad::ParamStore expected = make_params(cfg, scratch);
  for (const auto& [name, t] : expected.tensors()) {
    if (!params_.contains(name)) {
      throw DataError("parameter " + name + " missing");
    }
    const ad::Tensor& got = params_.get(name);
    if (got.rows != t.rows || got.cols != t.cols) {
      throw DataError("parameter " + name + " has shape " +
                      std::to_string(got.rows) + "x" +
                      std::to_string(got.cols) + ", expected " +
                      std::to_string(t.rows) + "x" + std::to_string(t.cols));
    }
  }
  for (const auto& [name, t] : params_.tensors()) {
    if (!expected.contains(name)) {
      throw DataError("unexpected parameter " + name);
    }
  }
}

WindowForward StrelayModel::forward(ad::Tape& tape, const Window& window) {
  if (window.inputs.empty() || window.inputs.size() != window.targets.size()) {
    throw DataError("malformed window");
  }
  const Embeddings emb = Embeddings::bind(tape, params_);
  RelayContext context(tape, params_, cfg_, emb);
  HistoryEncoder encoder(tape, params_, cfg_, emb);
  Heads heads(tape, params_, cfg_);

  for (const CheckIn& x : window.inputs) {
    if (x.user_id < 0 || x.user_id >= cfg_.num_users || x.poi_id < 0 ||
        x.poi_id >= cfg_.num_pois) {
      throw DataError("window references ids outside the model vocabulary");
    }
  }

  WindowForward fwd;
  const std::vector<ad::Var> hidden = encoder.encode(window.inputs);
  std::vector<ad::Var> totals;
  for (size_t i = 0; i < window.inputs.size(); ++i) {
    const CheckIn& x = window.inputs[i];
    const StepTarget& target = window.targets[i];
    if (target.next.poi_id < 0 || target.next.poi_id >= cfg_.num_pois) {
      throw DataError("target POI outside the model vocabulary");
    }
    ContextBundle ctx = context.build(x.user_id, x.timestamp, x.poi_id);
    const ad::Var ec = fuse(tape, hidden[i], ctx);
    HeadOutputs out = heads.predict(ec);
    StepTargets t{target.next.poi_id, {}, {}};
    if (target.tau) t.tau = target.tau->index;
    if (target.rho) t.rho = target.rho->index;
    StepLosses losses = heads.losses(out, t);
    totals.push_back(losses.total);
    fwd.steps.push_back(losses);
    fwd.outputs.push_back(out);
    fwd.contexts.push_back(ctx);
  }
  fwd.loss = ad::sum(tape, totals);
  return fwd;
}

std::vector<std::vector<double>> StrelayModel::predict_poi_scores(
    const Window& window) {
  // Inference needs no interval targets; stand-ins keep forward() simple.
  Window w = window;
  for (auto& t : w.targets) {
    if (!t.tau) t.tau = IntervalIndex{IntervalKind::kTemporal, 0};
    if (!t.rho) t.rho = IntervalIndex{IntervalKind::kSpatial, 0};
  }
  ad::Tape tape(false);
  const WindowForward fwd = forward(tape, w);
  std::vector<std::vector<double>> scores;
  scores.reserve(fwd.outputs.size());
  for (const auto& out : fwd.outputs) {
    const auto v = tape.value(out.poi_logits);
    scores.emplace_back(v.begin(), v.end());
  }
  return scores;
}

}  // namespace strelay
