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

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "strelay/geospace.h"
#include "strelay/gradcheck.h"

namespace strelay {
namespace {

ModelConfig config(Variant v, EncoderKind e = EncoderKind::kGru) {
  ModelConfig cfg;
  cfg.num_users = 3;
  cfg.num_pois = 10;
  cfg.d = 4;
  cfg.mlp_hidden = 4;
  cfg.spec = IntervalSpec{1.0, 6, 1.0, 5};
  cfg.variant = v;
  cfg.encoder.kind = e;
  cfg.encoder.hidden_dim = 4;
  return cfg;
}

std::vector<Window> windows(const ModelConfig& cfg, uint64_t seed = 3) {
  const Dataset ds = random_tiny_dataset(cfg.num_users, cfg.num_pois, 6, seed);
  return label_targets(make_windows(ds, 20), ds, cfg.spec);
}

TEST(ModelConfig, ParsingAndValidation) {
  for (Variant v : {Variant::kFull, Variant::kNoSpatial, Variant::kNoTemporal,
                    Variant::kNoRelaying, Variant::kNoContext}) {
    EXPECT_EQ(parse_variant(to_string(v)), v);
  }
  EXPECT_EQ(parse_encoder("flashback"), EncoderKind::kFlashback);
  EXPECT_THROW(parse_variant("parallel"), UsageError);
  EXPECT_THROW(parse_encoder("lstm"), UsageError);
  ModelConfig bad = config(Variant::kFull);
  bad.encoder.context_window = 0;
  EXPECT_THROW(bad.validate(), UsageError);
  bad = config(Variant::kFull);
  bad.encoder.alpha = -1;
  EXPECT_THROW(bad.validate(), UsageError);
}

TEST(StrelayModel, ParameterSetsPerVariant) {
  Rng rng(1);
  const auto none = StrelayModel::make_params(config(Variant::kNoSpatial), rng);
  EXPECT_FALSE(none.contains("ctx.rho.cand"));
  EXPECT_FALSE(none.contains("head.rho.w0"));
  EXPECT_TRUE(none.contains("head.tau.w0"));
  const auto base = StrelayModel::make_params(config(Variant::kNoContext), rng);
  for (const auto& [name, t] : base.tensors()) {
    EXPECT_NE(name.rfind("ctx.", 0), 0u) << name;
  }
  EXPECT_EQ(base.get("head.poi.w0").rows, 4);  // e^c = h_i only
}

TEST(StrelayModel, AdoptingParamsValidatesShapes) {
  const ModelConfig cfg = config(Variant::kFull);
  Rng rng(2);
  ad::ParamStore ps = StrelayModel::make_params(cfg, rng);
  StrelayModel ok(cfg, ps);

  ad::ParamStore wrong = ps;
  wrong.get("ctx.rho.wq").rows = 8;
  wrong.get("ctx.rho.wq").value.resize(32);
  try {
    StrelayModel m(cfg, wrong);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("ctx.rho.wq"), std::string::npos);
  }
  EXPECT_THROW(StrelayModel(config(Variant::kNoRelaying), ps), DataError);
}

TEST(StrelayModel, ForwardRejectsOutOfVocabularyIds) {
  const ModelConfig cfg = config(Variant::kFull);
  Rng rng(3);
  StrelayModel model(cfg, rng);
  Window w = windows(cfg)[0];
  w.inputs[0].poi_id = 10;
  ad::Tape tape;
  EXPECT_THROW(model.forward(tape, w), DataError);
  Window t = windows(cfg)[0];
  t.targets[0].next.poi_id = 11;
  EXPECT_THROW(model.forward(tape, t), DataError);
}

TEST(StrelayModel, ForwardIsBitIdenticalAndScoresMatchLogits) {
  const ModelConfig cfg = config(Variant::kFull, EncoderKind::kFlashback);
  Rng rng(4);
  StrelayModel model(cfg, rng);
  const Window w = windows(cfg)[1];
  auto run = [&] {
    ad::Tape tape;
    const WindowForward f = model.forward(tape, w);
    std::vector<double> logits;
    for (const auto& o : f.outputs) {
      const auto v = tape.value(o.poi_logits);
      logits.insert(logits.end(), v.begin(), v.end());
    }
    return std::pair{tape.scalar(f.loss), logits};
  };
  const auto a = run();
  EXPECT_EQ(a, run());
  std::vector<double> flat;
  for (const auto& row : model.predict_poi_scores(w)) {
    flat.insert(flat.end(), row.begin(), row.end());
  }
  EXPECT_EQ(flat, a.second);
}

TEST(StrelayModel, WindowLossIsSumOfStepTotals) {
  const ModelConfig cfg = config(Variant::kNoRelaying);
  Rng rng(5);
  StrelayModel model(cfg, rng);
  ad::Tape tape;
  const WindowForward f = model.forward(tape, windows(cfg)[0]);
  double total = 0;
  for (const StepLosses& s : f.steps) total += tape.scalar(s.total);
  EXPECT_DOUBLE_EQ(tape.scalar(f.loss), total);
}

// The default check: full variant, GRU encoder, step 1e-6.
TEST(ModelGradients, DefaultFullStepPasses) {
  const ad::GradCheckResult r = check_model_gradients({});
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst_param << "[" << r.worst_index
                                   << "]";
  EXPECT_GT(r.entries_checked, 1000u);
}

// With a coarser step the difference quotient is far above rounding noise,
// so every entry of every variant must agree closely.
TEST(ModelGradients, EveryVariantAtCoarseStep) {
  for (Variant v : {Variant::kFull, Variant::kNoSpatial, Variant::kNoTemporal,
                    Variant::kNoRelaying, Variant::kNoContext}) {
    for (EncoderKind e : {EncoderKind::kGru, EncoderKind::kFlashback}) {
      ModelGradCheckOptions o;
      o.variant = v;
      o.encoder = e;
      o.eps = 1e-3;
      const ad::GradCheckResult r = check_model_gradients(o);
      EXPECT_LT(r.max_rel_error, 1e-4)
          << to_string(v) << "/" << to_string(e) << " " << r.worst_param;
    }
  }
}

TEST(ModelGradients, DegenerateShapes) {
  ModelGradCheckOptions o;
  o.d = 1;
  o.M = 1;
  o.N = 1;
  o.eps = 1e-3;
  EXPECT_LT(check_model_gradients(o).max_rel_error, 1e-4);
}

}  // namespace
}  // namespace strelay
