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

#include "strelay/relay_context.h"

#include "strelay/geospace.h"

namespace strelay {

void Embeddings::register_params(const ModelConfig& cfg,
                                 ad::ParamStore& params, Rng& rng) {
  params.add_uniform("emb.user", cfg.num_users, cfg.d, cfg.d, rng);
  params.add_uniform("emb.time", kHoursPerWeek, cfg.d, cfg.d, rng);
  params.add_uniform("emb.poi", cfg.num_pois, cfg.d, cfg.d, rng);
}

Embeddings Embeddings::bind(ad::Tape& tape, ad::ParamStore& params) {
  return {tape.param(params.get("emb.user")), tape.param(params.get("emb.time")),
          tape.param(params.get("emb.poi"))};
}

void RelayContext::register_params(const ModelConfig& cfg,
                                   ad::ParamStore& params, Rng& rng) {
  const int d = cfg.d;
  if (uses_temporal(cfg.variant)) {
    params.add_uniform("ctx.tau.cand", cfg.spec.M, d, d, rng);
    params.add_uniform("ctx.tau.wq", 2 * d, d, 2 * d, rng);
    params.add_uniform("ctx.tau.wk", d, d, d, rng);
    params.add_uniform("ctx.tau.wv", d, d, d, rng);
  }
  if (uses_spatial(cfg.variant)) {
    const int query = cfg.variant == Variant::kFull ? 3 * d : 2 * d;
    params.add_uniform("ctx.rho.cand", cfg.spec.N, d, d, rng);
    params.add_uniform("ctx.rho.wq", query, d, query, rng);
    params.add_uniform("ctx.rho.wk", d, d, d, rng);
    params.add_uniform("ctx.rho.wv", d, d, d, rng);
  }
}

RelayContext::RelayContext(ad::Tape& tape, ad::ParamStore& params,
                           const ModelConfig& cfg, const Embeddings& emb)
    : tape_(tape), cfg_(cfg), emb_(emb) {
  if (uses_temporal(cfg.variant)) {
    const ad::Var cand = tape.param(params.get("ctx.tau.cand"));
    tau_wq_ = tape.param(params.get("ctx.tau.wq"));
    tau_kv_ = ad::project_kv(tape, cand, cand,
                             tape.param(params.get("ctx.tau.wk")),
                             tape.param(params.get("ctx.tau.wv")));
  }
  if (uses_spatial(cfg.variant)) {
    const ad::Var cand = tape.param(params.get("ctx.rho.cand"));
    rho_wq_ = tape.param(params.get("ctx.rho.wq"));
    rho_kv_ = ad::project_kv(tape, cand, cand,
                             tape.param(params.get("ctx.rho.wk")),
                             tape.param(params.get("ctx.rho.wv")));
  }
}

ad::AttentionOut RelayContext::temporal(int user, int64_t timestamp) {
  if (!tau_wq_.valid()) throw Error("temporal context disabled by variant");
  const ad::Var e_u = ad::embed(tape_, emb_.user, user);
  const ad::Var e_t = ad::embed(tape_, emb_.time, hour_in_week(timestamp));
  return ad::attend(tape_, ad::concat(tape_, {e_u, e_t}), tau_wq_, tau_kv_);
}

ad::AttentionOut RelayContext::spatial(int user, ad::Var e_tau_hat, int poi) {
  if (!rho_wq_.valid()) throw Error("spatial context disabled by variant");
  const ad::Var e_u = ad::embed(tape_, emb_.user, user);
  const ad::Var e_l = ad::embed(tape_, emb_.poi, poi);
  const ad::Var query = e_tau_hat.valid()
                            ? ad::concat(tape_, {e_u, e_tau_hat, e_l})
                            : ad::concat(tape_, {e_u, e_l});
  return ad::attend(tape_, query, rho_wq_, rho_kv_);
}

ContextBundle RelayContext::build(int user, int64_t timestamp, int poi) {
  ContextBundle b;
  switch (cfg_.variant) {
    case Variant::kFull: {
      const auto tau = temporal(user, timestamp);
      const auto rho = spatial(user, tau.output, poi);
      b = {tau.output, rho.output, ad::concat(tape_, {tau.output, rho.output}),
           tau.weights, rho.weights};
      break;
    }
    case Variant::kNoRelaying: {
      const auto tau = temporal(user, timestamp);
      const auto rho = spatial(user, ad::Var{}, poi);
      b = {tau.output, rho.output, ad::concat(tape_, {tau.output, rho.output}),
           tau.weights, rho.weights};
      break;
    }
    case Variant::kNoSpatial: {
      const auto tau = temporal(user, timestamp);
      b.e_tau_hat = tau.output;
      b.e_st = tau.output;
      b.tau_weights = tau.weights;
      break;
    }
    case Variant::kNoTemporal: {
      const auto rho = spatial(user, ad::Var{}, poi);
      b.e_rho_hat = rho.output;
      b.e_st = rho.output;
      b.rho_weights = rho.weights;
      break;
    }
    case Variant::kNoContext:
      break;
  }
  return b;
}

}  // namespace strelay
