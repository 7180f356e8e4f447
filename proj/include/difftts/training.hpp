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

#ifndef DIFFTTS_TRAINING_HPP
#define DIFFTTS_TRAINING_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "difftts/diffusion.hpp"
#include "difftts/schedule.hpp"
#include "difftts/serialize.hpp"
#include "difftts/text_frontend.hpp"
#include "difftts/unet.hpp"

namespace difftts {

struct UtteranceRecord {
  std::string audio_path;
  std::string transcript;
  std::string speaker_id;  // empty = unconditioned
  double duration_s = 0.0;
};

// Tab-separated lines: audio_path, transcript, speaker_id, duration_s.
std::vector<UtteranceRecord> read_manifest(const std::string& path);

struct ScheduleSpec {
  std::string kind = "linear";  // "linear" or "exp-cosine"
  std::int64_t n_steps = 1000;
  double beta_min = 1e-4;
  double beta_max = 0.02;
};

NoiseSchedule build_schedule(const ScheduleSpec& spec);

struct TrainConfig {
  UNetConfig model = UNetConfig::table1();
  FrontendSpec frontend;
  ScheduleSpec schedule;
  std::int64_t sample_rate = 24000;
  std::int64_t length = 262144;
  std::int64_t batch_size = 1;
  std::int64_t total_steps = 1000;
  std::int64_t checkpoint_every = 200;
  std::int64_t log_every = 10;
  double lr = 1e-4;
  std::int64_t warmup_steps = 100;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;

  std::string to_json() const;
  static TrainConfig from_json(const std::string& json);
  static TrainConfig load(const std::string& path);
  void validate() const;
  std::uint64_t hash() const;
};

// Lists config keys whose values differ, for resume-refusal messages.
std::string config_diff_summary(const std::string& json_a,
                                const std::string& json_b);

template <class S>
struct TrainBatch {
  Tensor<S> clean;    // [B, L] padded waveforms
  Tensor<S> weights;  // [B, L], 1.0 on real samples, 0.1 on padding
  std::vector<TokenSequence> tokens;
  std::vector<std::int64_t> speakers;
  // Per-step draws, refreshed by draw_noise.
  std::vector<double> sqrt_alpha_bar;
  Tensor<S> epsilon;  // [B, L]
  Tensor<S> noisy;    // [B, L]
};

template <class S>
class Trainer {
 public:
  explicit Trainer(const TrainConfig& cfg);

  // Pads each record's audio to the configured length and tokenizes
  // its transcript; draw_noise attaches the diffusion draws.
  TrainBatch<S> prepare_batch(const std::vector<UtteranceRecord>& records);
  TrainBatch<S> make_batch(const std::vector<std::vector<double>>& waveforms,
                           const std::vector<std::string>& transcripts,
                           const std::vector<std::int64_t>& speakers);
  void draw_noise(TrainBatch<S>& batch);

  LossBreakdown train_step(TrainBatch<S>& batch);

  using ProgressFn = std::function<void(std::uint64_t step,
                                        const LossBreakdown&, double lr)>;
  std::uint64_t run_training(const std::string& manifest_path,
                             const std::string& checkpoint_dir,
                             const ProgressFn& progress = {});

  void save(const std::string& path) const;
  void load(const std::string& path);

  std::uint64_t step() const { return step_; }
  UNet<S>& model() { return *model_; }
  Frontend<S>& frontend() { return frontend_; }
  const NoiseSchedule& schedule() const { return schedule_; }
  Rng& rng() { return rng_; }
  const TrainConfig& config() const { return cfg_; }
  double current_lr() const;

  // All trainable parameters with their checkpoint names.
  std::vector<std::pair<std::string, Tensor<S>>> named_parameters();

 private:
  LossBreakdown compute_loss(TrainBatch<S>& batch, Tensor<S>* total_out);
  void adam_update();
  double lr_for(std::uint64_t t) const;
  std::int64_t speaker_index(const std::string& speaker_id) const;

  TrainConfig cfg_;
  NoiseSchedule schedule_;
  Rng rng_;
  std::unique_ptr<UNet<S>> model_;
  Frontend<S> frontend_;
  std::uint64_t step_ = 0;
  std::uint64_t adam_t_ = 0;
  std::vector<std::vector<double>> adam_m_, adam_v_;
};

// Frozen model + frontend reconstructed from a training checkpoint.
template <class S>
struct ModelBundle {
  TrainConfig config;
  std::unique_ptr<UNet<S>> model;
  Frontend<S> frontend;
  std::uint64_t step = 0;
};

template <class S>
ModelBundle<S> load_model_bundle(const std::string& checkpoint_path);

extern template class Trainer<float>;
extern template class Trainer<double>;
extern template ModelBundle<float> load_model_bundle<float>(
    const std::string&);
extern template ModelBundle<double> load_model_bundle<double>(
    const std::string&);

}  // namespace difftts

#endif  // DIFFTTS_TRAINING_HPP
