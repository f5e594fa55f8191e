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

#include "strelay/trainer.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "strelay/geospace.h"

namespace strelay {
namespace {

using nlohmann::json;

int as_int(const json& v, const std::string& key) {
  try {
    if (v.is_number_integer()) return v.get<int>();
    if (v.is_string()) {
      size_t pos = 0;
      const std::string s = v.get<std::string>();
      const int x = std::stoi(s, &pos);
      if (pos == s.size()) return x;
    }
  } catch (const std::exception&) {
  }
  throw UsageError("config key '" + key + "' expects an integer");
}

uint64_t as_u64(const json& v, const std::string& key) {
  try {
    if (v.is_number_unsigned()) return v.get<uint64_t>();
    if (v.is_number_integer() && v.get<int64_t>() >= 0) {
      return static_cast<uint64_t>(v.get<int64_t>());
    }
    if (v.is_string()) {
      size_t pos = 0;
      const std::string s = v.get<std::string>();
      const uint64_t x = std::stoull(s, &pos);
      if (pos == s.size() && !s.empty() && s[0] != '-') return x;
    }
  } catch (const std::exception&) {
  }
  throw UsageError("config key '" + key + "' expects a non-negative integer");
}

double as_double(const json& v, const std::string& key) {
  try {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      size_t pos = 0;
      const std::string s = v.get<std::string>();
      const double x = std::stod(s, &pos);
      if (pos == s.size()) return x;
    }
  } catch (const std::exception&) {
  }
  throw UsageError("config key '" + key + "' expects a number");
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw UsageError("config key '" + key + "' expects a string");
  return v.get<std::string>();
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw UsageError("lr must be >= 0");
  if (epochs < 1) throw UsageError("epochs must be >= 1");
  if (d < 1 || mlp_hidden < 1) throw UsageError("d and mlp_hidden must be >= 1");
  if (seq_len < 1) throw UsageError("seq_len must be >= 1");
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw UsageError("train_frac must lie in (0, 1)");
  }
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 &&
        adam_beta2 < 1.0 && adam_eps > 0.0)) {
    throw UsageError("invalid Adam constants");
  }
  encoder.validate();
  spec.validate();
}

ModelConfig TrainConfig::model_config(int num_users, int num_pois) const {
  ModelConfig m;
  m.num_users = num_users;
  m.num_pois = num_pois;
  m.d = d;
  m.mlp_hidden = mlp_hidden;
  m.spec = spec;
  m.variant = variant;
  m.encoder = encoder;
  return m;
}

json TrainConfig::to_json() const {
  json j;
  j["d"] = d;
  j["mlp_hidden"] = mlp_hidden;
  j["lr"] = lr;
  j["epochs"] = epochs;
  j["seed"] = seed;
  j["optimizer"] = optimizer == OptimizerKind::kAdam ? "adam" : "sgd";
  j["adam_beta1"] = adam_beta1;
  j["adam_beta2"] = adam_beta2;
  j["adam_eps"] = adam_eps;
  j["seq_len"] = seq_len;
  j["train_frac"] = train_frac;
  j["variant"] = std::string(to_string(variant));
  j["encoder"] = std::string(to_string(encoder.kind));
  j["hidden_dim"] = encoder.hidden_dim;
  j["alpha"] = encoder.alpha;
  j["beta"] = encoder.beta;
  j["context_window"] = encoder.context_window;
  j["dt"] = spec.dt;
  j["M"] = spec.M;
  j["dd"] = spec.dd;
  j["N"] = spec.N;
  return j;
}

TrainConfig TrainConfig::from_json(const json& j, TrainConfig c) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "d") c.d = as_int(v, key);
    else if (key == "mlp_hidden") c.mlp_hidden = as_int(v, key);
    else if (key == "lr") c.lr = as_double(v, key);
    else if (key == "epochs") c.epochs = as_int(v, key);
    else if (key == "seed") c.seed = as_u64(v, key);
    else if (key == "optimizer") {
      const std::string s = as_string(v, key);
      if (s == "adam") c.optimizer = OptimizerKind::kAdam;
      else if (s == "sgd") c.optimizer = OptimizerKind::kSgd;
      else throw UsageError("unknown optimizer '" + s + "'");
    } else if (key == "adam_beta1") c.adam_beta1 = as_double(v, key);
    else if (key == "adam_beta2") c.adam_beta2 = as_double(v, key);
    else if (key == "adam_eps") c.adam_eps = as_double(v, key);
    else if (key == "seq_len") c.seq_len = as_int(v, key);
    else if (key == "train_frac") c.train_frac = as_double(v, key);
    else if (key == "variant") c.variant = parse_variant(as_string(v, key));
    else if (key == "encoder") c.encoder.kind = parse_encoder(as_string(v, key));
    else if (key == "hidden_dim") c.encoder.hidden_dim = as_int(v, key);
    else if (key == "alpha") c.encoder.alpha = as_double(v, key);
    else if (key == "beta") c.encoder.beta = as_double(v, key);
    else if (key == "context_window") c.encoder.context_window = as_int(v, key);
    else if (key == "dt") c.spec.dt = as_double(v, key);
    else if (key == "M") c.spec.M = as_int(v, key);
    else if (key == "dd") c.spec.dd = as_double(v, key);
    else if (key == "N") c.spec.N = as_int(v, key);
    else throw UsageError("unknown config key '" + key + "'");
  }
  return c;
}

Optimizer::Optimizer(const TrainConfig& cfg, const ad::ParamStore& params)
    : kind_(cfg.optimizer),
      lr_(cfg.lr),
      beta1_(cfg.adam_beta1),
      beta2_(cfg.adam_beta2),
      eps_(cfg.adam_eps) {
  for (const auto& [name, t] : params.tensors()) {
    m_[name].assign(t.size(), 0.0);
    v_[name].assign(t.size(), 0.0);
  }
}

void Optimizer::step(ad::ParamStore& params) {
  ++t_;
  if (kind_ == OptimizerKind::kSgd) {
    for (auto& [name, t] : params.tensors()) {
      for (size_t i = 0; i < t.size(); ++i) t.value[i] -= lr_ * t.grad[i];
    }
    return;
  }
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (auto& [name, t] : params.tensors()) {
    auto& m = m_.at(name);
    auto& v = v_.at(name);
    for (size_t i = 0; i < t.size(); ++i) {
      const double g = t.grad[i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
      t.value[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  }
}

Checkpoint train(const Dataset& train_ds, const TrainConfig& cfg,
                 const EpochCallback& on_epoch) {
  cfg.validate();
  const std::vector<Window> windows = label_targets(
      make_windows(train_ds, cfg.seq_len), train_ds, cfg.spec);
  if (windows.empty()) throw DataError("no training windows");

  Rng rng(cfg.seed);
  StrelayModel model(cfg.model_config(train_ds.num_users, train_ds.num_pois),
                     rng);
  Optimizer opt(cfg, model.params());
  std::vector<size_t> order(windows.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  double mean_loss = 0.0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }
    double loss_sum = 0.0;
    size_t steps = 0;
    for (size_t k = 0; k < order.size(); ++k) {
      const Window& w = windows[order[k]];
      model.params().zero_grad();
      ad::Tape tape;
      const WindowForward fwd = model.forward(tape, w);
      const double loss = tape.scalar(fwd.loss);
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) +
                           ", step " + std::to_string(k));
      }
      tape.backward(fwd.loss);
      opt.step(model.params());
      loss_sum += loss;
      steps += w.inputs.size();
    }
    mean_loss = loss_sum / static_cast<double>(steps);
    if (on_epoch) on_epoch(epoch, mean_loss);
  }

  Checkpoint ckpt;
  ckpt.config = cfg;
  ckpt.num_users = train_ds.num_users;
  ckpt.num_pois = train_ds.num_pois;
  ckpt.params = std::move(model.params());
  ckpt.epoch = cfg.epochs;
  ckpt.final_loss = mean_loss;
  ckpt.rng_state = rng.state();
  return ckpt;
}

// --- Serialization ----------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'S', 'T', 'R', 'L'};
static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

class Writer {
 public:
  template <typename T>
  void put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out_.append(buf, sizeof(T));
  }
  void put_bytes(const std::string& s) {
    put<uint32_t>(static_cast<uint32_t>(s.size()));
    out_ += s;
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_bytes(const char* what) {
    const uint32_t n = get<uint32_t>(what);
    need(n, what);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }
  size_t offset() const { return pos_; }

 private:
  void need(size_t n, const char* what) {
    if (in_.size() - pos_ < n) {
      throw DataError("corrupt checkpoint: truncated " + std::string(what) +
                      " at offset " + std::to_string(pos_));
    }
  }

  const std::string& in_;
  size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  for (char c : kMagic) w.put<char>(c);
  w.put<uint32_t>(ckpt.version);
  w.put_bytes(ckpt.config.to_json().dump());
  w.put<uint32_t>(static_cast<uint32_t>(ckpt.num_users));
  w.put<uint32_t>(static_cast<uint32_t>(ckpt.num_pois));
  w.put<uint32_t>(static_cast<uint32_t>(ckpt.epoch));
  w.put<double>(ckpt.final_loss);
  w.put<uint64_t>(ckpt.rng_state);
  w.put<uint32_t>(static_cast<uint32_t>(ckpt.params.tensors().size()));
  for (const auto& [name, t] : ckpt.params.tensors()) {
    w.put_bytes(name);
    w.put<uint32_t>(static_cast<uint32_t>(t.rows));
    w.put<uint32_t>(static_cast<uint32_t>(t.cols));
    for (double v : t.value) w.put<double>(v);
  }
  return w.take();
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  for (char c : kMagic) {
    if (r.get<char>("magic") != c) {
      throw DataError("corrupt checkpoint: bad magic");
    }
  }
  Checkpoint ckpt;
  ckpt.version = r.get<uint32_t>("version");
  if (ckpt.version != kCheckpointVersion) {
    throw DataError("checkpoint version " + std::to_string(ckpt.version) +
                    " is not supported (expected " +
                    std::to_string(kCheckpointVersion) + ")");
  }
  const std::string cfg_text = r.get_bytes("config");
  try {
    ckpt.config = TrainConfig::from_json(nlohmann::json::parse(cfg_text));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("corrupt checkpoint config: ") + e.what());
  }
  ckpt.num_users = static_cast<int>(r.get<uint32_t>("num_users"));
  ckpt.num_pois = static_cast<int>(r.get<uint32_t>("num_pois"));
  ckpt.epoch = static_cast<int>(r.get<uint32_t>("epoch"));
  ckpt.final_loss = r.get<double>("final_loss");
  ckpt.rng_state = r.get<uint64_t>("rng_state");
  const uint32_t count = r.get<uint32_t>("tensor count");
  for (uint32_t k = 0; k < count; ++k) {
    const std::string name = r.get_bytes("tensor name");
    const uint32_t rows = r.get<uint32_t>("tensor rows");
    const uint32_t cols = r.get<uint32_t>("tensor cols");
    if (rows == 0 || cols == 0 || rows > (1u << 24) || cols > (1u << 24)) {
      throw DataError("corrupt checkpoint: tensor " + name + " has shape " +
                      std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (ckpt.params.contains(name)) {
      throw DataError("corrupt checkpoint: duplicate tensor " + name);
    }
    ad::Tensor& t = ckpt.params.add_zeros(name, static_cast<int>(rows),
                                          static_cast<int>(cols));
    for (double& v : t.value) v = r.get<double>("tensor data");
  }
  if (!r.done()) {
    throw DataError("corrupt checkpoint: trailing bytes at offset " +
                    std::to_string(r.offset()));
  }
  // Shapes must agree with what the stored configuration builds.
  StrelayModel(ckpt.model_config(), ckpt.params);
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  const std::string bytes = serialize_checkpoint(ckpt);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace strelay
