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

#include "difftts/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "difftts/diffusion.hpp"

namespace difftts {

void SamplerConfig::validate() const {
  if (n_steps < 1) throw ParamError("sampler needs n_steps >= 1");
  if (length < 1) throw ParamError("sampler needs a positive length");
  if (trim_chunk < 1) throw ParamError("sampler needs trim_chunk >= 1");
  if (!(trim_cutoff >= 0.0)) throw ParamError("trim_cutoff must be >= 0");
}

TrimResult trim_silence(std::span<const double> waveform,
                        const SamplerConfig& sampler) {
  sampler.validate();
  const std::int64_t n = static_cast<std::int64_t>(waveform.size());
  const std::int64_t chunk = sampler.trim_chunk;
  const std::int64_t n_chunks = (n + chunk - 1) / chunk;
  std::int64_t last_loud = -1;
  for (std::int64_t c = 0; c < n_chunks; ++c) {
    const std::int64_t lo = c * chunk;
    const std::int64_t hi = std::min(n, lo + chunk);
    double acc = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) acc += std::fabs(waveform[i]);
    if (acc / static_cast<double>(hi - lo) > sampler.trim_cutoff) last_loud = c;
  }
  TrimResult out;
  if (last_loud < 0) {
    out.all_silent = n > 0;
    return out;
  }
  const std::int64_t keep = std::min(n, (last_loud + 1) * chunk);
  out.samples.assign(waveform.begin(), waveform.begin() + keep);
  return out;
}

std::int64_t EditMask::unknown_count() const {
  std::int64_t c = 0;
  for (const std::uint8_t k : known) c += k ? 0 : 1;
  return c;
}

void EditMask::validate(std::int64_t length) const {
  if (static_cast<std::int64_t>(known.size()) != length ||
      known.size() != reference.size()) {
    throw ShapeError("edit mask covers " + std::to_string(known.size()) +
                     " samples, expected " + std::to_string(length));
  }
  for (std::size_t i = 0; i < known.size(); ++i) {
    if (known[i] && !std::isfinite(reference[i])) {
      throw InputError("edit mask reference is not finite at sample " +
                       std::to_string(i));
    }
  }
}

EditMask mask_from_span(std::span<const double> audio, double start_s,
                        double end_s, std::int64_t sample_rate,
                        std::int64_t length) {
  if (sample_rate < 1) throw ParamError("sample rate must be positive");
  if (static_cast<std::int64_t>(audio.size()) > length) {
    throw InputError("audio of " + std::to_string(audio.size()) +
                     " samples does not fit the " + std::to_string(length) +
                     " sample window");
  }
  if (!(start_s >= 0.0) || !(end_s > start_s)) {
    throw InputError("edit span must satisfy 0 <= start < end");
  }
  const std::int64_t lo =
      static_cast<std::int64_t>(std::floor(start_s * sample_rate));
  const std::int64_t hi =
      static_cast<std::int64_t>(std::ceil(end_s * sample_rate));
  if (hi > static_cast<std::int64_t>(audio.size())) {
    throw InputError("edit span ends at sample " + std::to_string(hi) +
                     ", past the " + std::to_string(audio.size()) +
                     " sample input");
  }
  EditMask mask;
  mask.known.assign(static_cast<std::size_t>(length), 1);
  mask.reference.assign(static_cast<std::size_t>(length), 0.0);
  for (std::size_t i = 0; i < audio.size(); ++i) mask.reference[i] = audio[i];
  for (std::int64_t i = lo; i < hi; ++i) {
    mask.known[static_cast<std::size_t>(i)] = 0;
  }
  return mask;
}

namespace {

// Ancestral sampling shared by plain synthesis (no known samples),
// prompting and inpainting. Draw order per step is fixed: first the
// known-region noise, then the update noise z, so a run with an empty
// known set consumes the same stream as plain synthesis.
template <class S>
std::vector<double> sample_loop(UNet<S>& model, const TextEncoding<S>& enc,
                                const SamplerConfig& sampler,
                                const std::vector<std::uint8_t>* known,
                                const std::vector<double>* reference) {
  autograd::NoGradGuard guard;
  const std::int64_t l = sampler.length;
  const NoiseSchedule sched = build_inference_schedule(sampler.n_steps);
  Rng rng(sampler.seed);

  std::vector<double> y(static_cast<std::size_t>(l));
  for (auto& v : y) v = rng.normal();

  std::vector<std::size_t> known_idx;
  if (known) {
    for (std::size_t i = 0; i < known->size(); ++i) {
      if ((*known)[i]) known_idx.push_back(i);
    }
  }
  std::vector<double> eps_known(known_idx.size());
  std::vector<double> z;
  ConditioningSignals<S> cond;
  cond.speaker = {-1};
  cond.texts = {enc};
  Tensor<S> noisy = Tensor<S>::zeros({1, l});

  for (int n = sampler.n_steps; n >= 1; --n) {
    const double ab = sched.alpha_bar_at(n);
    const double sab = std::sqrt(ab);
    const double tail = std::sqrt(std::max(0.0, 1.0 - ab));
    for (std::size_t k = 0; k < known_idx.size(); ++k) {
      eps_known[k] = rng.normal();
      y[known_idx[k]] = sab * (*reference)[known_idx[k]] + tail * eps_known[k];
    }
    cond.sqrt_alpha_bar = {sab};
    S* nd = noisy.data();
    for (std::int64_t i = 0; i < l; ++i) nd[i] = static_cast<S>(y[i]);
    const auto pred = model.predict(noisy, cond);
    std::vector<double> eps(static_cast<std::size_t>(l));
    const S* pe = pred.epsilon.data();
    for (std::int64_t i = 0; i < l; ++i) eps[i] = static_cast<double>(pe[i]);
    for (std::size_t k = 0; k < known_idx.size(); ++k) {
      eps[known_idx[k]] = eps_known[k];
    }
    if (n > 1) {
      z.resize(static_cast<std::size_t>(l));
      for (auto& v : z) v = rng.normal();
    } else {
      z.clear();
    }
    y = reverse_step(y, eps, sched, n, z);
  }
  return y;
}

}  // namespace

template <class S>
TrimResult synthesize(const std::string& text, UNet<S>& model,
                      Frontend<S>& frontend, const SamplerConfig& sampler) {
  sampler.validate();
  autograd::NoGradGuard guard;
  const TextEncoding<S> enc = frontend.encode_text(text);
  const auto y = sample_loop(model, enc, sampler, nullptr, nullptr);
  return trim_silence(y, sampler);
}

template <class S>
TrimResult prompt_synthesize(const std::string& text,
                             std::span<const double> prompt,
                             std::int64_t prompt_len, UNet<S>& model,
                             Frontend<S>& frontend,
                             const SamplerConfig& sampler) {
  sampler.validate();
  if (prompt_len < 0) throw ParamError("prompt length must be >= 0");
  if (prompt_len > sampler.length) {
    throw InputError("prompt of " + std::to_string(prompt_len) +
                     " samples exceeds the " + std::to_string(sampler.length) +
                     " sample window");
  }
  if (prompt_len > static_cast<std::int64_t>(prompt.size())) {
    throw InputError("prompt length " + std::to_string(prompt_len) +
                     " exceeds the provided " + std::to_string(prompt.size()) +
                     " samples");
  }
  std::vector<std::uint8_t> known(static_cast<std::size_t>(sampler.length), 0);
  std::vector<double> reference(static_cast<std::size_t>(sampler.length), 0.0);
  for (std::int64_t i = 0; i < prompt_len; ++i) {
    if (!std::isfinite(prompt[static_cast<std::size_t>(i)])) {
      throw InputError("prompt is not finite at sample " + std::to_string(i));
    }
    known[static_cast<std::size_t>(i)] = 1;
    reference[static_cast<std::size_t>(i)] = prompt[static_cast<std::size_t>(i)];
  }
  autograd::NoGradGuard guard;
  const TextEncoding<S> enc = frontend.encode_text(text);
  const auto y = sample_loop(model, enc, sampler, &known, &reference);
  return trim_silence(y, sampler);
}

template <class S>
std::vector<double> inpaint(const std::string& text, const EditMask& mask,
                            UNet<S>& model, Frontend<S>& frontend,
                            const SamplerConfig& sampler) {
  sampler.validate();
  mask.validate(sampler.length);
  if (mask.unknown_count() == 0) {
    throw InputError("edit mask marks every sample known; nothing to generate");
  }
  autograd::NoGradGuard guard;
  const TextEncoding<S> enc = frontend.encode_text(text);
  return sample_loop(model, enc, sampler, &mask.known, &mask.reference);
}

ClassifyResult classify_with_predictor(
    std::span<const double> probe,
    const std::vector<std::vector<double>>& candidates,
    const EpsilonPredictor& predictor, int n_timesteps, Rng& rng,
    std::int64_t length, std::span<const double> draw_weights) {
  if (candidates.empty()) throw InputError("no candidates to classify against");
  if (n_timesteps < 1) throw ParamError("n_timesteps must be >= 1");
  if (!draw_weights.empty() &&
      static_cast<int>(draw_weights.size()) != n_timesteps) {
    throw ParamError("need one draw weight per timestep sample");
  }
  const std::int64_t l = length;
  const std::int64_t la = static_cast<std::int64_t>(probe.size());
  if (la == 0) throw InputError("probe waveform is empty");
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    if (la + static_cast<std::int64_t>(candidates[j].size()) > l) {
      throw InputError("candidate " + std::to_string(j) +
                       " does not fit next to the probe in the " +
                       std::to_string(l) + " sample window");
    }
  }

  std::vector<std::vector<double>> concat(candidates.size());
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    concat[j].assign(static_cast<std::size_t>(l), 0.0);
    std::copy(probe.begin(), probe.end(), concat[j].begin());
    std::copy(candidates[j].begin(), candidates[j].end(),
              concat[j].begin() + la);
  }

  ClassifyResult out;
  out.scores.assign(candidates.size(), 0.0);
  std::vector<double> eps(static_cast<std::size_t>(l));
  std::vector<double> noisy(static_cast<std::size_t>(l));
  const double uniform_w = 1.0 / static_cast<double>(n_timesteps);
  for (int t = 0; t < n_timesteps; ++t) {
    const double ab = rng.uniform(0.04, 0.96);
    const double sab = std::sqrt(ab);
    const double tail = std::sqrt(1.0 - ab);
    for (auto& v : eps) v = rng.normal();
    const double w = draw_weights.empty() ? uniform_w : draw_weights[t];
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      for (std::int64_t i = 0; i < l; ++i) {
        noisy[static_cast<std::size_t>(i)] =
            sab * concat[j][static_cast<std::size_t>(i)] +
            tail * eps[static_cast<std::size_t>(i)];
      }
      const std::vector<double> pred = predictor(noisy, sab);
      if (static_cast<std::int64_t>(pred.size()) != l) {
        throw ShapeError("predictor returned " + std::to_string(pred.size()) +
                         " samples, expected " + std::to_string(l));
      }
      double err = 0.0;
      for (std::int64_t i = 0; i < la; ++i) {
        const double d = pred[static_cast<std::size_t>(i)] -
                         eps[static_cast<std::size_t>(i)];
        err += d * d;
      }
      out.scores[j] += w * err;
    }
  }
  out.index = 0;
  for (std::size_t j = 1; j < out.scores.size(); ++j) {
    if (out.scores[j] < out.scores[out.index]) out.index = j;
  }
  return out;
}

template <class S>
ClassifyResult speaker_classify(std::span<const double> probe,
                                const std::vector<std::vector<double>>& candidates,
                                UNet<S>& model, Frontend<S>& frontend,
                                int n_timesteps, Rng& rng,
                                const SamplerConfig& sampler,
                                const std::string& transcript,
                                std::span<const double> draw_weights) {
  sampler.validate();
  autograd::NoGradGuard guard;
  // With no transcript, condition on a single placeholder token so
  // cross-attention still has one valid key.
  TokenSequence tokens;
  if (!transcript.empty()) tokens = frontend.tokenize(transcript);
  if (tokens.ids.empty()) tokens.ids.push_back(0);
  const TextEncoding<S> enc = frontend.encode_text(tokens);

  const std::int64_t l = sampler.length;
  Tensor<S> noisy_t = Tensor<S>::zeros({1, l});
  ConditioningSignals<S> cond;
  cond.speaker = {-1};
  cond.texts = {enc};
  auto predictor = [&](const std::vector<double>& noisy,
                       double sab) -> std::vector<double> {
    autograd::NoGradGuard inner;
    cond.sqrt_alpha_bar = {sab};
    S* nd = noisy_t.data();
    for (std::int64_t i = 0; i < l; ++i) {
      nd[i] = static_cast<S>(noisy[static_cast<std::size_t>(i)]);
    }
    const auto pred = model.predict(noisy_t, cond);
    std::vector<double> out(static_cast<std::size_t>(l));
    const S* pe = pred.epsilon.data();
    for (std::int64_t i = 0; i < l; ++i) {
      out[static_cast<std::size_t>(i)] = static_cast<double>(pe[i]);
    }
    return out;
  };
  return classify_with_predictor(probe, candidates, predictor, n_timesteps,
                                 rng, l, draw_weights);
}

template TrimResult synthesize<float>(const std::string&, UNet<float>&,
                                      Frontend<float>&, const SamplerConfig&);
template TrimResult synthesize<double>(const std::string&, UNet<double>&,
                                       Frontend<double>&, const SamplerConfig&);
template TrimResult prompt_synthesize<float>(const std::string&,
                                             std::span<const double>,
                                             std::int64_t, UNet<float>&,
                                             Frontend<float>&,
                                             const SamplerConfig&);
template TrimResult prompt_synthesize<double>(const std::string&,
                                              std::span<const double>,
                                              std::int64_t, UNet<double>&,
                                              Frontend<double>&,
                                              const SamplerConfig&);
template std::vector<double> inpaint<float>(const std::string&, const EditMask&,
                                            UNet<float>&, Frontend<float>&,
                                            const SamplerConfig&);
template std::vector<double> inpaint<double>(const std::string&,
                                             const EditMask&, UNet<double>&,
                                             Frontend<double>&,
                                             const SamplerConfig&);
template ClassifyResult speaker_classify<float>(
    std::span<const double>, const std::vector<std::vector<double>>&,
    UNet<float>&, Frontend<float>&, int, Rng&, const SamplerConfig&,
    const std::string&, std::span<const double>);
template ClassifyResult speaker_classify<double>(
    std::span<const double>, const std::vector<std::vector<double>>&,
    UNet<double>&, Frontend<double>&, int, Rng&, const SamplerConfig&,
    const std::string&, std::span<const double>);

}  // namespace difftts
