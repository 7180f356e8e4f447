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

#ifndef DIFFTTS_INFERENCE_HPP
#define DIFFTTS_INFERENCE_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "difftts/schedule.hpp"
#include "difftts/text_frontend.hpp"
#include "difftts/unet.hpp"

namespace difftts {

struct SamplerConfig {
  int n_steps = 1000;
  std::uint64_t seed = 0;
  std::int64_t length = 262144;
  std::int64_t trim_chunk = 1024;
  double trim_cutoff = 0.02;

  void validate() const;
};

struct TrimResult {
  std::vector<double> samples;
  bool all_silent = false;
};

// Removes the maximal trailing run of chunks whose mean absolute
// amplitude is at or below the cutoff. A final partial chunk counts as
// a chunk. Interior quiet chunks are kept.
TrimResult trim_silence(std::span<const double> waveform,
                        const SamplerConfig& sampler);

// Per-sample known/unknown labeling for editing. reference holds the
// ground-truth values on known samples.
struct EditMask {
  std::vector<std::uint8_t> known;
  std::vector<double> reference;

  std::int64_t unknown_count() const;
  void validate(std::int64_t length) const;
};

// Marks [start_s, end_s) for regeneration: floor on the start sample,
// ceil on the end. Everything else, including padding out to `length`,
// stays known.
EditMask mask_from_span(std::span<const double> audio, double start_s,
                        double end_s, std::int64_t sample_rate,
                        std::int64_t length);

template <class S>
TrimResult synthesize(const std::string& text, UNet<S>& model,
                      Frontend<S>& frontend, const SamplerConfig& sampler);

// Ancestral sampling where the known region's predicted noise is
// overwritten with a fresh true-noise draw and the known region of y_n
// is re-projected onto the matching forward diffusion of the reference.
template <class S>
TrimResult prompt_synthesize(const std::string& text,
                             std::span<const double> prompt,
                             std::int64_t prompt_len, UNet<S>& model,
                             Frontend<S>& frontend,
                             const SamplerConfig& sampler);

// Same mechanics over an arbitrary mask. Returns the full window,
// untrimmed, so callers can cut it back to the input duration.
template <class S>
std::vector<double> inpaint(const std::string& text, const EditMask& mask,
                            UNet<S>& model, Frontend<S>& frontend,
                            const SamplerConfig& sampler);

struct ClassifyResult {
  std::size_t index = 0;
  std::vector<double> scores;
};

// Noise prediction for one noised window at the given level. The seam
// lets tests swap the network for a synthetic oracle.
using EpsilonPredictor = std::function<std::vector<double>(
    const std::vector<double>& noisy, double sqrt_alpha_bar)>;

ClassifyResult classify_with_predictor(
    std::span<const double> probe,
    const std::vector<std::vector<double>>& candidates,
    const EpsilonPredictor& predictor, int n_timesteps, Rng& rng,
    std::int64_t length, std::span<const double> draw_weights = {});

// Scores each candidate by the squared error between predicted and true
// noise on the probe region of the noised concatenation probe + candidate,
// averaged over n_timesteps draws of (alpha_bar, shared epsilon) with
// alpha_bar uniform in [0.04, 0.96]. Lowest score wins; ties take the
// lowest index. draw_weights overrides the uniform per-draw weighting.
template <class S>
ClassifyResult speaker_classify(std::span<const double> probe,
                                const std::vector<std::vector<double>>& candidates,
                                UNet<S>& model, Frontend<S>& frontend,
                                int n_timesteps, Rng& rng,
                                const SamplerConfig& sampler,
                                const std::string& transcript = "",
                                std::span<const double> draw_weights = {});

extern template TrimResult synthesize<float>(const std::string&, UNet<float>&,
                                             Frontend<float>&,
                                             const SamplerConfig&);
extern template TrimResult synthesize<double>(const std::string&,
                                              UNet<double>&, Frontend<double>&,
                                              const SamplerConfig&);
extern template TrimResult prompt_synthesize<float>(
    const std::string&, std::span<const double>, std::int64_t, UNet<float>&,
    Frontend<float>&, const SamplerConfig&);
extern template TrimResult prompt_synthesize<double>(
    const std::string&, std::span<const double>, std::int64_t, UNet<double>&,
    Frontend<double>&, const SamplerConfig&);
extern template std::vector<double> inpaint<float>(const std::string&,
                                                   const EditMask&,
                                                   UNet<float>&,
                                                   Frontend<float>&,
                                                   const SamplerConfig&);
extern template std::vector<double> inpaint<double>(const std::string&,
                                                    const EditMask&,
                                                    UNet<double>&,
                                                    Frontend<double>&,
                                                    const SamplerConfig&);
extern template ClassifyResult speaker_classify<float>(
    std::span<const double>, const std::vector<std::vector<double>>&,
    UNet<float>&, Frontend<float>&, int, Rng&, const SamplerConfig&,
    const std::string&, std::span<const double>);
extern template ClassifyResult speaker_classify<double>(
    std::span<const double>, const std::vector<std::vector<double>>&,
    UNet<double>&, Frontend<double>&, int, Rng&, const SamplerConfig&,
    const std::string&, std::span<const double>);

}  // namespace difftts

#endif  // DIFFTTS_INFERENCE_HPP
