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

#include "strelay/heads.h"

#include <string>

namespace strelay {
namespace {

void register_head(const std::string& name, int in, int hidden, int out,
                   ad::ParamStore& params, Rng& rng) {
  params.add_uniform(name + ".w0", in, hidden, in, rng);
  params.add_zeros(name + ".b0", 1, hidden);
  params.add_uniform(name + ".w1", hidden, out, hidden, rng);
  params.add_zeros(name + ".b1", 1, out);
}

std::vector<ad::Dense> bind_head(const std::string& name, ad::Tape& tape,
                                 ad::ParamStore& params) {
  return {{tape.param(params.get(name + ".w0")),
           tape.param(params.get(name + ".b0"))},
          {tape.param(params.get(name + ".w1")),
           tape.param(params.get(name + ".b1"))}};
}

}  // namespace

ad::Var fuse(ad::Tape& tape, ad::Var h, const ContextBundle& ctx) {
  if (!ctx.e_st.valid()) return h;
  return ad::concat(tape, {h, ctx.e_st});
}

void Heads::register_params(const ModelConfig& cfg, ad::ParamStore& params,
                            Rng& rng) {
  const int in = cfg.encoder.hidden_dim + cfg.context_dim();
  register_head("head.poi", in, cfg.mlp_hidden, cfg.num_pois, params, rng);
  if (uses_temporal(cfg.variant)) {
    register_head("head.tau", in, cfg.mlp_hidden, cfg.spec.M, params, rng);
  }
  if (uses_spatial(cfg.variant)) {
    register_head("head.rho", in, cfg.mlp_hidden, cfg.spec.N, params, rng);
  }
}

Heads::Heads(ad::Tape& tape, ad::ParamStore& params, const ModelConfig& cfg)
    : tape_(tape) {
  poi_ = bind_head("head.poi", tape, params);
  if (uses_temporal(cfg.variant)) tau_ = bind_head("head.tau", tape, params);
  if (uses_spatial(cfg.variant)) rho_ = bind_head("head.rho", tape, params);
}

HeadOutputs Heads::predict(ad::Var context) {
  HeadOutputs out;
  out.poi_logits = ad::mlp(tape_, context, poi_);
  if (!tau_.empty()) out.tau_logits = ad::mlp(tape_, context, tau_);
  if (!rho_.empty()) out.rho_logits = ad::mlp(tape_, context, rho_);
  return out;
}

StepLosses Heads::losses(const HeadOutputs& out, const StepTargets& targets) {
  StepLosses l;
  l.poi = ad::cross_entropy(tape_, out.poi_logits, targets.poi);
  l.total = l.poi;
  if (out.tau_logits.valid()) {
    if (!targets.tau) throw Error("temporal bin target missing; label first");
    l.tau = ad::cross_entropy(tape_, out.tau_logits, *targets.tau);
    l.total = ad::add(tape_, l.total, l.tau);
  }
  if (out.rho_logits.valid()) {
    if (!targets.rho) throw Error("spatial bin target missing; label first");
    l.rho = ad::cross_entropy(tape_, out.rho_logits, *targets.rho);
    l.total = ad::add(tape_, l.total, l.rho);
  }
  return l;
}

}  // namespace strelay
