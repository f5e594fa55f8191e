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

#include "strelay/gradcheck.h"

#include <vector>

#include "strelay/geospace.h"
#include "strelay/model.h"

namespace strelay {

Dataset random_tiny_dataset(int users, int pois, int events_per_user,
                            uint64_t seed) {
  if (users < 1 || pois < 1 || events_per_user < 2) {
    throw UsageError("tiny dataset needs users, pois >= 1 and >= 2 events");
  }
  Rng rng(seed);
  Dataset ds;
  ds.num_users = users;
  ds.num_pois = pois;
  for (int p = 0; p < pois; ++p) {
    ds.poi_coords.push_back({1.0 + rng.uniform(0.0, 0.05),
                             1.0 + rng.uniform(0.0, 0.05)});
    ds.poi_labels.push_back(std::to_string(p));
  }
  for (int u = 0; u < users; ++u) {
    ds.user_labels.push_back(std::to_string(u));
    Trajectory traj{u, {}};
    int64_t t = 1333324800 + static_cast<int64_t>(rng.below(7 * 86400));
    for (int i = 0; i < events_per_user; ++i) {
      if (i > 0) t += static_cast<int64_t>(rng.below(8 * 3600));
      const int poi = static_cast<int>(rng.below(pois));
      traj.events.push_back({u, poi, ds.poi_coords[poi], t});
    }
    ds.trajectories.push_back(std::move(traj));
  }
  ds.validate();
  return ds;
}

ad::GradCheckResult check_model_gradients(const ModelGradCheckOptions& o) {
  ModelConfig cfg;
  cfg.num_users = o.users;
  cfg.num_pois = o.pois;
  cfg.d = o.d;
  cfg.mlp_hidden = o.d;
  cfg.spec = IntervalSpec{1.0, o.M, 1.0, o.N};
  cfg.variant = o.variant;
  cfg.encoder.kind = o.encoder;
  cfg.encoder.hidden_dim = o.hidden_dim;
  // Flashback decay constants sized to the tiny patch so weights vary.
  cfg.encoder.alpha = 0.1;
  cfg.encoder.beta = 100.0;

  const Dataset ds = random_tiny_dataset(o.users, o.pois, o.events_per_user,
                                         o.seed);
  const std::vector<Window> windows =
      label_targets(make_windows(ds, o.events_per_user), ds, cfg.spec);
  Rng rng(o.seed ^ 0x5eedULL);
  StrelayModel model(cfg, rng);
  // One term per head per step; their sum is the summed window loss.
  const ad::LossTermsFn loss = [&](ad::Tape& tape) {
    std::vector<ad::Var> parts;
    for (const Window& w : windows) {
      for (const StepLosses& s : model.forward(tape, w).steps) {
        for (const ad::Var v : {s.poi, s.tau, s.rho}) {
          if (v.valid()) parts.push_back(v);
        }
      }
    }
    return parts;
  };
  return ad::grad_check(loss, model.params(), o.eps);
}

}  // namespace strelay
