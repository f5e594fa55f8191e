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

#include "strelay/history_encoders.h"

#include <algorithm>
#include <cmath>

#include "strelay/geospace.h"

namespace strelay {

std::vector<double> flashback_weights(std::span<const CheckIn> past,
                                      const CheckIn& now,
                                      const EncoderConfig& cfg) {
  if (past.empty()) throw Error("flashback: no hidden states");
  // Computed in log space, shifted by the max, so distant states underflow
  // to zero without the sum collapsing.
  std::vector<double> logw(past.size());
  for (size_t j = 0; j < past.size(); ++j) {
    const double days =
        static_cast<double>(now.timestamp - past[j].timestamp) / 86400.0;
    const double hundreds_km = haversine_km(now.coord, past[j].coord) / 100.0;
    logw[j] = -cfg.alpha * days - cfg.beta * hundreds_km;
    if (!std::isfinite(logw[j])) throw NumericError("flashback: non-finite weight");
  }
  const double mx = *std::max_element(logw.begin(), logw.end());
  double total = 0.0;
  for (double& w : logw) total += (w = std::exp(w - mx));
  for (double& w : logw) w /= total;
  return logw;
}

ad::Var flashback_aggregate(ad::Tape& tape, std::span<const ad::Var> hiddens,
                            std::span<const CheckIn> past, const CheckIn& now,
                            const EncoderConfig& cfg) {
  if (hiddens.size() != past.size()) {
    throw ad::ShapeError("flashback: one event per hidden state required");
  }
  const auto w = flashback_weights(past, now, cfg);
  return ad::weighted_sum(tape, hiddens, w);
}

void HistoryEncoder::register_params(const ModelConfig& cfg,
                                     ad::ParamStore& params, Rng& rng) {
  const int in = 3 * cfg.d;
  const int h = cfg.encoder.hidden_dim;
  for (const char* g : {"z", "r", "n"}) {
    const std::string p = std::string("enc.gru.") + g;
    params.add_uniform(p + ".w", in, h, h, rng);
    params.add_uniform(p + ".u", h, h, h, rng);
    params.add_uniform(p + ".b", 1, h, h, rng);
  }
}

HistoryEncoder::HistoryEncoder(ad::Tape& tape, ad::ParamStore& params,
                               const ModelConfig& cfg, const Embeddings& emb)
    : tape_(tape), cfg_(cfg), emb_(emb) {
  auto bind = [&](const char* g) {
    const std::string p = std::string("enc.gru.") + g;
    return Gate{tape.param(params.get(p + ".w")),
                tape.param(params.get(p + ".u")),
                tape.param(params.get(p + ".b"))};
  };
  z_ = bind("z");
  r_ = bind("r");
  n_ = bind("n");
}

ad::Var HistoryEncoder::features(const CheckIn& x) {
  return ad::concat(tape_, {ad::embed(tape_, emb_.poi, x.poi_id),
                            ad::embed(tape_, emb_.time, hour_in_week(x.timestamp)),
                            ad::embed(tape_, emb_.user, x.user_id)});
}

ad::Var HistoryEncoder::gate_preact(const Gate& g, ad::Var x, ad::Var h) {
  return ad::add_bias(
      tape_, ad::add(tape_, ad::matmul(tape_, x, g.w), ad::matmul(tape_, h, g.u)),
      g.b);
}

ad::Var HistoryEncoder::zero_state() {
  return tape_.constant(
      1, cfg_.encoder.hidden_dim,
      std::vector<double>(static_cast<size_t>(cfg_.encoder.hidden_dim), 0.0));
}

ad::Var HistoryEncoder::step(ad::Var state, const CheckIn& x) {
  if (tape_.cols(state) != cfg_.encoder.hidden_dim || tape_.rows(state) != 1) {
    throw ad::ShapeError("encoder state has the wrong shape");
  }
  const ad::Var in = features(x);
  const ad::Var z = ad::sigmoid(tape_, gate_preact(z_, in, state));
  const ad::Var r = ad::sigmoid(tape_, gate_preact(r_, in, state));
  const ad::Var n = ad::tanh(
      tape_, ad::add_bias(tape_,
                          ad::add(tape_, ad::matmul(tape_, in, n_.w),
                                  ad::matmul(tape_, ad::mul(tape_, r, state), n_.u)),
                          n_.b));
  // h' = (1 - z) * n + z * h = n + z * (h - n)
  return ad::add(tape_, n, ad::mul(tape_, z, ad::sub(tape_, state, n)));
}

std::vector<ad::Var> HistoryEncoder::encode(std::span<const CheckIn> inputs) {
  if (inputs.empty()) throw Error("encode_history: empty window");
  std::vector<ad::Var> states;
  states.reserve(inputs.size());
  ad::Var h = zero_state();
  for (const CheckIn& x : inputs) {
    h = step(h, x);
    states.push_back(h);
  }
  if (cfg_.encoder.kind == EncoderKind::kGru) return states;

  std::vector<ad::Var> out;
  out.reserve(states.size());
  const size_t window = static_cast<size_t>(cfg_.encoder.context_window);
  for (size_t i = 0; i < states.size(); ++i) {
    const size_t first = i + 1 > window ? i + 1 - window : 0;
    if (first == i) {
      out.push_back(states[i]);
      continue;
    }
    out.push_back(flashback_aggregate(
        tape_, std::span<const ad::Var>(states).subspan(first, i + 1 - first),
        inputs.subspan(first, i + 1 - first), inputs[i], cfg_.encoder));
  }
  return out;
}

}  // namespace strelay
