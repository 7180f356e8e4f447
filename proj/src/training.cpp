// Copyright 2026 The difftts Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "difftts/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <utility>

#include <json.hpp>

#include "difftts/audio.hpp"
#include "difftts/nn_ops.hpp"

namespace difftts {

namespace {

using nlohmann::json;

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

std::vector<UtteranceRecord> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path);
  std::vector<UtteranceRecord> records;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_tabs(line);
    if (fields.size() < 2 || fields[0].empty()) {
      throw IngestError("manifest line " + std::to_string(lineno) +
                        ": expected audio_path<TAB>transcript");
    }
    UtteranceRecord rec;
    rec.audio_path = fields[0];
    rec.transcript = fields[1];
    if (fields.size() > 2) rec.speaker_id = fields[2];
    if (fields.size() > 3 && !fields[3].empty()) {
      try {
        rec.duration_s = std::stod(fields[3]);
      } catch (const std::exception&) {
        throw IngestError("manifest line " + std::to_string(lineno) +
                          ": bad duration '" + fields[3] + "'");
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

NoiseSchedule build_schedule(const ScheduleSpec& spec) {
  if (spec.n_steps < 1) throw ConfigError("schedule needs n_steps >= 1");
  if (spec.kind == "linear") {
    return build_training_schedule(static_cast<int>(spec.n_steps),
                                   spec.beta_min, spec.beta_max);
  }
  if (spec.kind == "exp-cosine") {
    return build_inference_schedule(static_cast<int>(spec.n_steps));
  }
  throw ConfigError("unknown schedule kind '" + spec.kind +
                    "' (expected 'linear' or 'exp-cosine')");
}

std::string TrainConfig::to_json() const {
  json j;
  j["model"] = json::parse(model.to_json());
  j["frontend"] = json::parse(frontend.to_json());
  j["schedule"] = {{"kind", schedule.kind},
                   {"n_steps", schedule.n_steps},
                   {"beta_min", schedule.beta_min},
                   {"beta_max", schedule.beta_max}};
  j["sample_rate"] = sample_rate;
  j["length"] = length;
  j["batch_size"] = batch_size;
  j["total_steps"] = total_steps;
  j["checkpoint_every"] = checkpoint_every;
  j["log_every"] = log_every;
  j["lr"] = lr;
  j["warmup_steps"] = warmup_steps;
  j["adam_beta1"] = adam_beta1;
  j["adam_beta2"] = adam_beta2;
  j["adam_eps"] = adam_eps;
  j["seed"] = seed;
  return j.dump(2);
}

TrainConfig TrainConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad train config JSON: ") + e.what());
  }
  TrainConfig cfg;
  try {
    if (j.contains("model")) cfg.model = UNetConfig::from_json(j["model"].dump());
    if (j.contains("frontend"))
      cfg.frontend = FrontendSpec::from_json(j["frontend"].dump());
    if (j.contains("schedule")) {
      const json& s = j["schedule"];
      if (s.contains("kind")) cfg.schedule.kind = s["kind"].get<std::string>();
      if (s.contains("n_steps"))
        cfg.schedule.n_steps = s["n_steps"].get<std::int64_t>();
      if (s.contains("beta_min"))
        cfg.schedule.beta_min = s["beta_min"].get<double>();
      if (s.contains("beta_max"))
        cfg.schedule.beta_max = s["beta_max"].get<double>();
    }
    if (j.contains("sample_rate"))
      cfg.sample_rate = j["sample_rate"].get<std::int64_t>();
    if (j.contains("length")) cfg.length = j["length"].get<std::int64_t>();
    if (j.contains("batch_size"))
      cfg.batch_size = j["batch_size"].get<std::int64_t>();
    if (j.contains("total_steps"))
      cfg.total_steps = j["total_steps"].get<std::int64_t>();
    if (j.contains("checkpoint_every"))
      cfg.checkpoint_every = j["checkpoint_every"].get<std::int64_t>();
    if (j.contains("log_every"))
      cfg.log_every = j["log_every"].get<std::int64_t>();
    if (j.contains("lr")) cfg.lr = j["lr"].get<double>();
    if (j.contains("warmup_steps"))
      cfg.warmup_steps = j["warmup_steps"].get<std::int64_t>();
    if (j.contains("adam_beta1")) cfg.adam_beta1 = j["adam_beta1"].get<double>();
    if (j.contains("adam_beta2")) cfg.adam_beta2 = j["adam_beta2"].get<double>();
    if (j.contains("adam_eps")) cfg.adam_eps = j["adam_eps"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad train config field: ") + e.what());
  }
  return cfg;
}

TrainConfig TrainConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open train config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void TrainConfig::validate() const {
  model.validate();
  if (sample_rate < 1) throw ConfigError("sample_rate must be positive");
  if (length < 1) throw ConfigError("length must be positive");
  const std::int64_t sp = model.stride_product();
  if (length % sp != 0) {
    throw ConfigError("length " + std::to_string(length) +
                      " is not a multiple of the model stride product " +
                      std::to_string(sp));
  }
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (total_steps < 1) throw ConfigError("total_steps must be positive");
  if (checkpoint_every < 1) throw ConfigError("checkpoint_every must be positive");
  if (log_every < 1) throw ConfigError("log_every must be positive");
  if (!(lr >= 0.0)) throw ConfigError("lr must be non-negative");
  if (warmup_steps < 1) throw ConfigError("warmup_steps must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) ||
      !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ConfigError("adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be positive");
}

std::uint64_t TrainConfig::hash() const { return fnv1a64(to_json()); }

std::string config_diff_summary(const std::string& json_a,
                                const std::string& json_b) {
  json a, b;
  try {
    a = json::parse(json_a).flatten();
    b = json::parse(json_b).flatten();
  } catch (const json::exception&) {
    return "configs are not comparable as JSON";
  }
  std::vector<std::string> diffs;
  for (const auto& [key, val] : a.items()) {
    if (!b.contains(key)) {
      diffs.push_back(key + ": " + val.dump() + " vs <absent>");
    } else if (b[key] != val) {
      diffs.push_back(key + ": " + val.dump() + " vs " + b[key].dump());
    }
  }
  for (const auto& [key, val] : b.items()) {
    if (!a.contains(key)) diffs.push_back(key + ": <absent> vs " + val.dump());
  }
  if (diffs.empty()) return "no differing keys";
  std::string out;
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    if (i) out += "; ";
    out += diffs[i];
  }
  return out;
}

template <class S>
Trainer<S>::Trainer(const TrainConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
  cfg_.validate();
  schedule_ = build_schedule(cfg_.schedule);
  model_ = std::make_unique<UNet<S>>(cfg_.model, rng_);
  model_->set_trainable(true);
  frontend_ = make_frontend<S>(cfg_.frontend, rng_);
  if (frontend_.encoder->d_text() != cfg_.model.d_text) {
    throw ConfigError("text encoder width " +
                      std::to_string(frontend_.encoder->d_text()) +
                      " does not match model d_text " +
                      std::to_string(cfg_.model.d_text));
  }
  auto named = named_parameters();
  adam_m_.resize(named.size());
  adam_v_.resize(named.size());
  for (std::size_t i = 0; i < named.size(); ++i) {
    adam_m_[i].assign(static_cast<std::size_t>(named[i].second.numel()), 0.0);
    adam_v_[i].assign(static_cast<std::size_t>(named[i].second.numel()), 0.0);
  }
}

template <class S>
std::vector<std::pair<std::string, Tensor<S>>> Trainer<S>::named_parameters() {
  std::vector<std::pair<std::string, Tensor<S>>> out;
  for (auto& [name, t] : model_->parameters()) out.emplace_back("unet." + name, t);
  for (auto& [name, t] : frontend_.encoder->parameters()) {
    out.emplace_back("text_encoder." + name, t);
  }
  return out;
}

template <class S>
std::int64_t Trainer<S>::speaker_index(const std::string& speaker_id) const {
  if (cfg_.model.speaker_count <= 0 || speaker_id.empty()) return -1;
  std::int64_t idx = 0;
  try {
    std::size_t used = 0;
    idx = std::stoll(speaker_id, &used);
    if (used != speaker_id.size()) throw std::invalid_argument(speaker_id);
  } catch (const std::exception&) {
    throw IngestError("speaker id '" + speaker_id + "' is not an integer");
  }
  if (idx < 0 || idx >= cfg_.model.speaker_count) {
    throw IngestError("speaker id " + std::to_string(idx) +
                      " outside table of size " +
                      std::to_string(cfg_.model.speaker_count));
  }
  return idx;
}

template <class S>
TrainBatch<S> Trainer<S>::prepare_batch(
    const std::vector<UtteranceRecord>& records) {
  if (records.empty()) throw InputError("cannot build a batch from no records");
  std::vector<std::vector<double>> waves;
  std::vector<std::string> texts;
  std::vector<std::int64_t> speakers;
  waves.reserve(records.size());
  for (const auto& rec : records) {
    AudioBuffer buf = read_wav(rec.audio_path);
    std::vector<double> wav = buf.samples;
    if (buf.sample_rate != cfg_.sample_rate) {
      wav = resample(wav, buf.sample_rate, cfg_.sample_rate);
    }
    if (static_cast<std::int64_t>(wav.size()) > cfg_.length) {
      throw IngestError(rec.audio_path + ": " + std::to_string(wav.size()) +
                        " samples at " + std::to_string(cfg_.sample_rate) +
                        " Hz exceeds the " + std::to_string(cfg_.length) +
                        " sample window");
    }
    waves.push_back(std::move(wav));
    texts.push_back(rec.transcript);
    speakers.push_back(speaker_index(rec.speaker_id));
  }
  return make_batch(waves, texts, speakers);
}

template <class S>
TrainBatch<S> Trainer<S>::make_batch(
    const std::vector<std::vector<double>>& waveforms,
    const std::vector<std::string>& transcripts,
    const std::vector<std::int64_t>& speakers) {
  const std::int64_t b = static_cast<std::int64_t>(waveforms.size());
  if (b == 0) throw InputError("cannot build a batch from no records");
  if (transcripts.size() != waveforms.size() ||
      speakers.size() != waveforms.size()) {
    throw ParamError("waveforms, transcripts and speakers must align");
  }
  const std::int64_t l = cfg_.length;
  TrainBatch<S> batch;
  batch.clean = Tensor<S>::zeros({b, l});
  batch.weights = Tensor<S>::full({b, l}, S(0.1));
  for (std::int64_t i = 0; i < b; ++i) {
    const auto& wav = waveforms[static_cast<std::size_t>(i)];
    if (static_cast<std::int64_t>(wav.size()) > l) {
      throw InputError("waveform " + std::to_string(i) + " has " +
                       std::to_string(wav.size()) +
                       " samples, more than the " + std::to_string(l) +
                       " sample window");
    }
    S* crow = batch.clean.data() + i * l;
    S* wrow = batch.weights.data() + i * l;
    for (std::size_t t = 0; t < wav.size(); ++t) {
      crow[t] = static_cast<S>(wav[t]);
      wrow[t] = S(1);
    }
    batch.tokens.push_back(
        frontend_.tokenize(transcripts[static_cast<std::size_t>(i)]));
  }
  batch.speakers = speakers;
  draw_noise(batch);
  return batch;
}

template <class S>
void Trainer<S>::draw_noise(TrainBatch<S>& batch) {
  const std::int64_t b = batch.clean.shape()[0];
  const std::int64_t l = batch.clean.shape()[1];
  batch.sqrt_alpha_bar.resize(static_cast<std::size_t>(b));
  batch.epsilon = Tensor<S>::zeros({b, l});
  batch.noisy = Tensor<S>::zeros({b, l});
  for (std::int64_t i = 0; i < b; ++i) {
    const double sab = sample_noise_level(schedule_, rng_);
    batch.sqrt_alpha_bar[static_cast<std::size_t>(i)] = sab;
    const double sig = std::sqrt(std::max(0.0, 1.0 - sab * sab));
    const S* crow = batch.clean.data() + i * l;
    S* erow = batch.epsilon.data() + i * l;
    S* nrow = batch.noisy.data() + i * l;
    for (std::int64_t t = 0; t < l; ++t) {
      const double eps = rng_.normal();
      erow[t] = static_cast<S>(eps);
      nrow[t] = static_cast<S>(sab * static_cast<double>(crow[t]) + sig * eps);
    }
  }
}

template <class S>
LossBreakdown Trainer<S>::compute_loss(TrainBatch<S>& batch,
                                       Tensor<S>* total_out) {
  const std::int64_t b = batch.clean.shape()[0];
  const std::int64_t l = batch.clean.shape()[1];
  ConditioningSignals<S> cond;
  cond.sqrt_alpha_bar = batch.sqrt_alpha_bar;
  cond.speaker = batch.speakers;
  cond.texts.reserve(static_cast<std::size_t>(b));
  for (const auto& toks : batch.tokens) {
    cond.texts.push_back(frontend_.encode_text(toks));
  }
  auto pred = model_->predict(batch.noisy, cond);
  auto diff = ops::sub(pred.epsilon, batch.epsilon);
  auto wsq = ops::mul(batch.weights, ops::mul(diff, diff));

  LossBreakdown lb;
  lb.total = lb.residual = lb.omega = lb.log_omega = 0.0;
  std::vector<Tensor<S>> per;
  per.reserve(static_cast<std::size_t>(b));
  for (std::int64_t i = 0; i < b; ++i) {
    double den = 0.0;
    const S* wrow = batch.weights.data() + i * l;
    for (std::int64_t t = 0; t < l; ++t) den += static_cast<double>(wrow[t]);
    auto res = ops::mul_scalar(ops::sum_all(ops::select0(wsq, i)),
                               static_cast<S>(1.0 / den));
    auto om = ops::select0(pred.omega, i);
    auto tot = ops::add(ops::div(res, om), ops::log(om));
    lb.residual += static_cast<double>(res.item());
    lb.omega += static_cast<double>(om.item());
    lb.log_omega += std::log(static_cast<double>(om.item()));
    per.push_back(tot);
  }
  auto total = ops::mean_all(ops::stack0(per));
  lb.total = static_cast<double>(total.item());
  lb.residual /= static_cast<double>(b);
  lb.omega /= static_cast<double>(b);
  lb.log_omega /= static_cast<double>(b);
  if (total_out) *total_out = total;
  return lb;
}

template <class S>
LossBreakdown Trainer<S>::train_step(TrainBatch<S>& batch) {
  Tensor<S> total;
  LossBreakdown lb = compute_loss(batch, &total);
  if (!std::isfinite(lb.total)) {
    std::string levels;
    for (std::size_t i = 0; i < batch.sqrt_alpha_bar.size(); ++i) {
      if (i) levels += ", ";
      levels += std::to_string(batch.sqrt_alpha_bar[i]);
    }
    throw NumericError("non-finite loss at step " + std::to_string(step_ + 1) +
                       "; batch noise levels (sqrt alpha bar): " + levels);
  }
  total.backward();
  adam_update();
  ++step_;
  return lb;
}

template <class S>
double Trainer<S>::lr_for(std::uint64_t t) const {
  const double w = static_cast<double>(cfg_.warmup_steps);
  const double td = static_cast<double>(t);
  return cfg_.lr * std::min(td / w, std::sqrt(w / td));
}

template <class S>
double Trainer<S>::current_lr() const {
  return lr_for(std::max<std::uint64_t>(adam_t_, 1));
}

template <class S>
void Trainer<S>::adam_update() {
  ++adam_t_;
  const double lrt = lr_for(adam_t_);
  const double b1 = cfg_.adam_beta1;
  const double b2 = cfg_.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(adam_t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(adam_t_));
  auto named = named_parameters();
  for (std::size_t i = 0; i < named.size(); ++i) {
    Tensor<S>& p = named[i].second;
    const std::size_t n = static_cast<std::size_t>(p.numel());
    const std::vector<S>& g = p.grad();
    std::vector<double>& m = adam_m_[i];
    std::vector<double>& v = adam_v_[i];
    S* pv = p.data();
    for (std::size_t k = 0; k < n; ++k) {
      const double gk = static_cast<double>(g[k]);
      m[k] = b1 * m[k] + (1.0 - b1) * gk;
      v[k] = b2 * v[k] + (1.0 - b2) * gk * gk;
      const double update =
          lrt * (m[k] / c1) / (std::sqrt(v[k] / c2) + cfg_.adam_eps);
      pv[k] = static_cast<S>(static_cast<double>(pv[k]) - update);
    }
    p.zero_grad();
  }
}

template <class S>
std::uint64_t Trainer<S>::run_training(const std::string& manifest_path,
                                       const std::string& checkpoint_dir,
                                       const ProgressFn& progress) {
  const auto records = read_manifest(manifest_path);
  if (records.empty()) {
    throw InputError("manifest has no records: " + manifest_path);
  }
  std::string ckpt_path;
  if (!checkpoint_dir.empty()) {
    std::filesystem::create_directories(checkpoint_dir);
    ckpt_path = checkpoint_dir + "/checkpoint.dtts";
    if (std::filesystem::exists(ckpt_path)) load(ckpt_path);
  }
  while (step_ < static_cast<std::uint64_t>(cfg_.total_steps)) {
    std::vector<UtteranceRecord> picked;
    picked.reserve(static_cast<std::size_t>(cfg_.batch_size));
    for (std::int64_t i = 0; i < cfg_.batch_size; ++i) {
      picked.push_back(records[rng_.integer(records.size())]);
    }
    auto batch = prepare_batch(picked);
    const LossBreakdown lb = train_step(batch);
    const bool last = step_ == static_cast<std::uint64_t>(cfg_.total_steps);
    if (progress &&
        (step_ % static_cast<std::uint64_t>(cfg_.log_every) == 0 || last)) {
      progress(step_, lb, current_lr());
    }
    if (!ckpt_path.empty() &&
        (step_ % static_cast<std::uint64_t>(cfg_.checkpoint_every) == 0 ||
         last)) {
      save(ckpt_path);
    }
  }
  return step_;
}

template <class S>
void Trainer<S>::save(const std::string& path) const {
  Checkpoint ck;
  ck.config_hash = cfg_.hash();
  ck.step = step_;
  ck.config_json = cfg_.to_json();
  ck.rng_state = rng_.state();
  ck.extra_json = json{{"adam_t", adam_t_}}.dump();
  auto named = const_cast<Trainer<S>*>(this)->named_parameters();
  for (std::size_t i = 0; i < named.size(); ++i) {
    const Tensor<S>& t = named[i].second;
    NamedArray arr;
    arr.name = named[i].first;
    arr.shape = t.shape();
    arr.width = sizeof(S) == 8 ? 8 : 4;
    arr.data.assign(t.values().begin(), t.values().end());
    ck.params.push_back(std::move(arr));
    NamedArray m{"m." + named[i].first, t.shape(), adam_m_[i], 8};
    NamedArray v{"v." + named[i].first, t.shape(), adam_v_[i], 8};
    ck.opt.push_back(std::move(m));
    ck.opt.push_back(std::move(v));
  }
  save_checkpoint(path, ck);
}

namespace {

template <class S>
void apply_named_arrays(std::vector<std::pair<std::string, Tensor<S>>>& named,
                        const std::vector<NamedArray>& arrays,
                        const std::string& source) {
  if (arrays.size() != named.size()) {
    throw IoError(source + ": has " + std::to_string(arrays.size()) +
                  " parameter arrays, model expects " +
                  std::to_string(named.size()));
  }
  std::unordered_map<std::string, const NamedArray*> by_name;
  for (const auto& arr : arrays) by_name[arr.name] = &arr;
  for (auto& [name, t] : named) {
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw IoError(source + ": missing parameter '" + name + "'");
    }
    const NamedArray& arr = *it->second;
    if (arr.shape != t.shape()) {
      throw IoError(source + ": parameter '" + name + "' has shape " +
                    std::to_string(arr.data.size()) + " elements, expected " +
                    std::to_string(t.numel()));
    }
    S* dst = t.data();
    for (std::size_t k = 0; k < arr.data.size(); ++k) {
      dst[k] = static_cast<S>(arr.data[k]);
    }
  }
}

}  // namespace

template <class S>
void Trainer<S>::load(const std::string& path) {
  Checkpoint ck = load_checkpoint(path);
  if (ck.config_hash != cfg_.hash()) {
    throw ConfigError("checkpoint " + path +
                      " was written with a different config; differing keys: " +
                      config_diff_summary(ck.config_json, cfg_.to_json()));
  }
  auto named = named_parameters();
  apply_named_arrays(named, ck.params, path);
  std::unordered_map<std::string, const NamedArray*> opt_by_name;
  for (const auto& arr : ck.opt) opt_by_name[arr.name] = &arr;
  for (std::size_t i = 0; i < named.size(); ++i) {
    for (const char* pre : {"m.", "v."}) {
      auto it = opt_by_name.find(pre + named[i].first);
      if (it == opt_by_name.end()) {
        throw IoError(path + ": missing optimizer slot '" + pre +
                      named[i].first + "'");
      }
      auto& slot = pre[0] == 'm' ? adam_m_[i] : adam_v_[i];
      if (it->second->data.size() != slot.size()) {
        throw IoError(path + ": optimizer slot '" + pre + named[i].first +
                      "' has the wrong size");
      }
      slot = it->second->data;
    }
  }
  step_ = ck.step;
  rng_.set_state(ck.rng_state);
  adam_t_ = 0;
  if (!ck.extra_json.empty()) {
    try {
      const json j = json::parse(ck.extra_json);
      if (j.contains("adam_t")) adam_t_ = j["adam_t"].get<std::uint64_t>();
    } catch (const json::exception& e) {
      throw IoError(path + ": bad extra record: " + e.what());
    }
  }
}

template <class S>
ModelBundle<S> load_model_bundle(const std::string& checkpoint_path) {
  Checkpoint ck = load_checkpoint(checkpoint_path);
  ModelBundle<S> bundle;
  bundle.config = TrainConfig::from_json(ck.config_json);
  bundle.config.validate();
  Rng init_rng(1);
  bundle.model = std::make_unique<UNet<S>>(bundle.config.model, init_rng);
  bundle.frontend = make_frontend<S>(bundle.config.frontend, init_rng);
  std::vector<std::pair<std::string, Tensor<S>>> named;
  for (auto& [name, t] : bundle.model->parameters()) {
    named.emplace_back("unet." + name, t);
  }
  for (auto& [name, t] : bundle.frontend.encoder->parameters()) {
    named.emplace_back("text_encoder." + name, t);
  }
  apply_named_arrays(named, ck.params, checkpoint_path);
  bundle.model->set_trainable(false);
  bundle.step = ck.step;
  return bundle;
}

template class Trainer<float>;
template class Trainer<double>;
template ModelBundle<float> load_model_bundle<float>(const std::string&);
template ModelBundle<double> load_model_bundle<double>(const std::string&);

}  // namespace difftts
