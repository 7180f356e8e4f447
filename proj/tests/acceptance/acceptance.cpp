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

// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
// the process exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "difftts/diffusion.hpp"
#include "difftts/inference.hpp"
#include "difftts/metrics.hpp"
#include "difftts/schedule.hpp"
#include "difftts/training.hpp"
#include "difftts/unet.hpp"

namespace {

using namespace difftts;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Criterion {
  int number;
  std::string label;
  std::function<bool(std::string&)> run;
};

std::vector<double> sine(double freq, double rate, std::int64_t n,
                         double amp) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    x[static_cast<std::size_t>(i)] =
        amp * std::sin(2.0 * std::numbers::pi * freq *
                       static_cast<double>(i) / rate);
  }
  return x;
}

FrontendSpec toy_frontend_spec() {
  FrontendSpec spec;
  spec.backend = "toy-char";
  spec.toy_d_model = 12;
  spec.toy_heads = 2;
  spec.toy_ff = 24;
  spec.length_max = 64;
  return spec;
}

// 1. Inference schedule endpoints, interior value, monotonicity.
bool check_schedule(std::string& detail) {
  const auto s = build_inference_schedule(1000);
  const double first = s.alpha_bar_at(0);
  const double last = s.alpha_bar_at(1000);
  const double mid = s.alpha_bar_at(500);
  bool ok = true;
  ok &= first == 1.0;
  ok &= std::fabs(last - 1e-7) <= 1e-12 * 1e-7;
  ok &= std::fabs(mid - 0.0777) <= 1e-4 * 0.0777;
  bool monotone = true;
  for (int n = 1; n <= 1000; ++n) {
    monotone &= s.alpha_bar_at(n) < s.alpha_bar_at(n - 1);
  }
  ok &= monotone;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "ab0=%.12f ab500=%.10f ab1000=%.3e monotone=%d", first, mid,
                last, monotone ? 1 : 0);
  detail = buf;
  return ok;
}

// 2. Forward-process moments on a unit-variance input.
bool check_forward_moments(std::string& detail) {
  const std::int64_t n = 100000;
  std::vector<double> y0(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    y0[static_cast<std::size_t>(i)] =
        std::numbers::sqrt2 *
        std::sin(2.0 * std::numbers::pi * 7.0 * static_cast<double>(i) /
                 static_cast<double>(n));
  }
  Rng rng(17);
  bool ok = true;
  std::string parts;
  for (const double ab : {0.1, 0.5, 0.9}) {
    std::vector<double> eps(static_cast<std::size_t>(n));
    for (auto& v : eps) v = rng.normal();
    const auto noisy = forward_diffuse(y0, std::sqrt(ab), eps);
    double mean = 0.0;
    for (const double v : noisy) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0, resid = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      const double v = noisy[static_cast<std::size_t>(i)];
      var += (v - mean) * (v - mean);
      const double r = v - std::sqrt(ab) * y0[static_cast<std::size_t>(i)];
      resid += r * r;
    }
    var /= static_cast<double>(n - 1);
    resid /= static_cast<double>(n);
    const bool here = std::fabs(mean) <= 0.02 &&
                      std::fabs(var - 1.0) <= 0.02 &&
                      std::fabs(resid - (1.0 - ab)) <= 0.02 * (1.0 - ab);
    ok &= here;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "[ab=%.1f mean=%+.4f var=%.4f nv=%.4f]",
                  ab, mean, var, resid);
    parts += buf;
  }
  detail = parts;
  return ok;
}

// 3. Finite-difference gradient check through the full toy network.
bool check_gradients(std::string& detail) {
  Rng rng(11);
  UNet<double> net(UNetConfig::toy(), rng);
  // Zero-initialized projections would leave whole branches without
  // downstream influence; nudge them so every mechanism carries gradient.
  for (auto& [name, p] : net.parameters()) {
    bool all_zero = true;
    for (const double v : p.values()) {
      if (v != 0.0) {
        all_zero = false;
        break;
      }
    }
    if (all_zero) {
      for (auto& v : p.values()) v = 0.05 * rng.normal();
    }
  }

  const std::int64_t l = 64;
  Rng drng(23);
  Tensor<double> noisy = Tensor<double>::zeros({1, l});
  for (std::int64_t i = 0; i < l; ++i) noisy.data()[i] = drng.normal();

  Frontend<double> frontend =
      make_frontend<double>(toy_frontend_spec(), drng);
  ConditioningSignals<double> cond;
  cond.sqrt_alpha_bar = {0.6};
  cond.speaker = {-1};
  cond.texts = {frontend.encode_text("check me")};

  auto loss_value = [&]() {
    autograd::NoGradGuard guard;
    const auto pred = net.predict(noisy, cond);
    double acc = 0.0;
    for (std::int64_t i = 0; i < pred.epsilon.numel(); ++i) {
      const double v = pred.epsilon.data()[i];
      acc += v * std::cos(static_cast<double>(i % 13));
    }
    acc += pred.omega.data()[0];
    return acc;
  };

  for (auto& [name, p] : net.parameters()) p.set_requires_grad(true);
  {
    const auto pred = net.predict(noisy, cond);
    Tensor<double> weighted = Tensor<double>::zeros({1});
    // Same weighting as loss_value, built through the tape.
    std::vector<double> w(static_cast<std::size_t>(pred.epsilon.numel()));
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] = std::cos(static_cast<double>(i % 13));
    }
    Tensor<double> wt =
        Tensor<double>::from_vector({pred.epsilon.numel()}, std::move(w));
    auto flat = ops::reshape(pred.epsilon, {pred.epsilon.numel()});
    auto loss = ops::add(ops::sum_all(ops::mul(flat, wt)),
                         ops::sum_all(pred.omega));
    loss.backward();
  }

  Rng pick(97);
  auto& params = net.parameters();
  double max_rel = 0.0;
  std::string worst;
  const int n_samples = 220;
  const double h = 1e-5;
  for (int s = 0; s < n_samples; ++s) {
    const std::size_t ti =
        static_cast<std::size_t>(pick.integer(params.size()));
    auto& [name, p] = params[ti];
    const std::int64_t ei = static_cast<std::int64_t>(
        pick.integer(static_cast<std::uint64_t>(p.numel())));
    const double analytic = p.grad()[ei];
    const double keep = p.values()[static_cast<std::size_t>(ei)];
    p.values()[static_cast<std::size_t>(ei)] = keep + h;
    const double up = loss_value();
    p.values()[static_cast<std::size_t>(ei)] = keep - h;
    const double dn = loss_value();
    p.values()[static_cast<std::size_t>(ei)] = keep;
    const double fd = (up - dn) / (2.0 * h);
    const double denom = std::max({std::fabs(fd), std::fabs(analytic), 1e-8});
    const double rel =
        (std::fabs(fd) < 1e-10 && std::fabs(analytic) < 1e-10)
            ? 0.0
            : std::fabs(fd - analytic) / denom;
    if (rel > max_rel) {
      max_rel = rel;
      worst = name;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "sampled=%d max_rel=%.2e worst=%s",
                n_samples, max_rel, worst.c_str());
  detail = buf;
  return max_rel <= 1e-3;
}

// 4. Full-size config shape contract on one forward pass.
bool check_shape_contract(std::string& detail) {
  Rng rng(3);
  UNet<float> net(UNetConfig::table1(), rng);
  autograd::NoGradGuard guard;
  const std::int64_t l = 262144;
  Tensor<float> noisy = Tensor<float>::zeros({1, l});
  for (std::int64_t i = 0; i < l; ++i) {
    noisy.data()[i] = 0.1f * static_cast<float>(std::sin(0.001 * i));
  }
  TextEncoding<float> enc;
  enc.vectors = Tensor<float>::zeros({64, 768});
  enc.mask.assign(64, 1);
  for (std::int64_t i = 0; i < enc.vectors.numel(); ++i) {
    enc.vectors.data()[i] = 0.01f * static_cast<float>(i % 29);
  }
  ConditioningSignals<float> cond;
  cond.sqrt_alpha_bar = {0.5};
  cond.speaker = {-1};
  cond.texts = {enc};

  const auto t0 = Clock::now();
  const auto pred = net.predict(noisy, cond);
  const double fwd_s = seconds_since(t0);

  bool finite = true;
  for (std::int64_t i = 0; i < pred.epsilon.numel(); ++i) {
    if (!std::isfinite(pred.epsilon.data()[i])) {
      finite = false;
      break;
    }
  }
  const bool ok = pred.epsilon.shape()[1] == l &&
                  net.last_bottleneck_length() == 64 && finite &&
                  fwd_s < 120.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "in=%lld bottleneck=%lld out=%lld finite=%d forward=%.1fs",
                static_cast<long long>(l),
                static_cast<long long>(net.last_bottleneck_length()),
                static_cast<long long>(pred.epsilon.shape()[1]), finite ? 1 : 0,
                fwd_s);
  detail = buf;
  return ok;
}

// 5. Overfit four short utterances, then resample them from scratch.
bool check_overfit(std::string& detail) {
  const auto t0 = Clock::now();
  const std::int64_t L = 2048;
  const int train_steps = 4000;

  TrainConfig cfg;
  cfg.model = UNetConfig::toy();
  cfg.frontend = toy_frontend_spec();
  cfg.schedule.kind = "exp-cosine";
  cfg.schedule.n_steps = 1000;
  cfg.sample_rate = 8000;
  cfg.length = L;
  cfg.batch_size = 4;
  cfg.total_steps = train_steps;
  cfg.lr = 3e-3;
  cfg.warmup_steps = 100;
  cfg.seed = 7;

  Trainer<float> trainer(cfg);
  const std::vector<std::string> texts = {"low hum", "soft wave", "slow tide",
                                          "deep tone"};
  const std::vector<std::vector<double>> waves = {
      sine(2.0, 8000.0, L, 0.5), sine(3.0, 8000.0, L, 0.45),
      sine(4.0, 8000.0, L, 0.55), sine(5.0, 8000.0, L, 0.5)};
  auto batch = trainer.make_batch(waves, texts, {-1, -1, -1, -1});
  for (int i = 0; i < train_steps; ++i) {
    if (i) trainer.draw_noise(batch);
    trainer.train_step(batch);
  }
  const double train_s = seconds_since(t0);

  EditMask everything;
  everything.known.assign(static_cast<std::size_t>(L), 0);
  everything.reference.assign(static_cast<std::size_t>(L), 0.0);
  SamplerConfig sampler;
  sampler.n_steps = 1000;
  sampler.length = L;
  sampler.seed = 1;

  double worst_snr = 1e9;
  std::string parts;
  for (std::size_t k = 0; k < texts.size(); ++k) {
    const auto out =
        inpaint(texts[k], everything, trainer.model(), trainer.frontend(),
                sampler);
    double se = 0.0, sig = 0.0;
    for (std::int64_t i = 0; i < L; ++i) {
      const double d =
          out[static_cast<std::size_t>(i)] - waves[k][static_cast<std::size_t>(i)];
      se += d * d;
      sig += waves[k][static_cast<std::size_t>(i)] *
             waves[k][static_cast<std::size_t>(i)];
    }
    const double snr = 10.0 * std::log10(sig / se);
    worst_snr = std::min(worst_snr, snr);
    char buf[48];
    std::snprintf(buf, sizeof(buf), "[%zu:%.1fdB]", k, snr);
    parts += buf;
  }
  const double total_s = seconds_since(t0);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "steps=%d train=%.0fs total=%.0fs worst_snr=%.1fdB %s",
                train_steps, train_s, total_s, worst_snr, parts.c_str());
  detail = buf;
  return worst_snr >= 10.0 && total_s <= 1800.0;
}

// 6. Known-region preservation for edits at three gap scales.
bool check_preservation(std::string& detail) {
  Rng rng(5);
  UNet<float> net(UNetConfig::toy(), rng);
  Rng frng(6);
  Frontend<float> frontend = make_frontend<float>(toy_frontend_spec(), frng);

  SamplerConfig sampler;
  sampler.n_steps = 50;
  sampler.length = 256;
  sampler.seed = 4;
  const double rate = 8000.0;
  const auto audio = sine(40.0, rate, sampler.length, 0.5);

  // A reference gap, then the same gap scaled about its center.
  const double gap_start = 0.012, gap_end = 0.02;
  const double mid = 0.5 * (gap_start + gap_end);
  const double half = 0.5 * (gap_end - gap_start);
  bool ok = true;
  std::string parts;
  for (const double scale : {0.8, 1.0, 1.2}) {
    const EditMask mask =
        mask_from_span(audio, mid - half * scale, mid + half * scale,
                       static_cast<std::int64_t>(rate), sampler.length);
    const auto out = inpaint("mind the gap", mask, net, frontend, sampler);
    double max_err = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (mask.known[i]) {
        max_err = std::max(max_err, std::fabs(out[i] - mask.reference[i]));
      }
    }
    ok &= out.size() == static_cast<std::size_t>(sampler.length);
    ok &= max_err <= 0.05;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "[%.1fx unknown=%lld err=%.2e]", scale,
                  static_cast<long long>(mask.unknown_count()), max_err);
    parts += buf;
  }

  // Prompt continuation has the same contract on the prompt region.
  const std::int64_t keep = 96;
  const auto res = prompt_synthesize("carry on", audio, keep, net, frontend,
                                     sampler);
  double prompt_err = 0.0;
  for (std::int64_t i = 0;
       i < std::min<std::int64_t>(keep, static_cast<std::int64_t>(res.samples.size()));
       ++i) {
    prompt_err = std::max(prompt_err,
                          std::fabs(res.samples[static_cast<std::size_t>(i)] -
                                    audio[static_cast<std::size_t>(i)]));
  }
  ok &= static_cast<std::int64_t>(res.samples.size()) >= keep;
  ok &= prompt_err <= 0.05;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "[prompt err=%.2e]", prompt_err);
  parts += buf;
  detail = parts;
  return ok;
}

// 7. Classifier accuracy rises with the number of timestep draws.
bool check_classifier_trend(std::string& detail) {
  const std::int64_t probe_len = 4, cand_len = 16;
  const std::int64_t length = probe_len + cand_len;
  const double delta = 0.18;
  EpsilonPredictor predictor = [probe_len, cand_len](
                                   const std::vector<double>& noisy,
                                   double sab) -> std::vector<double> {
    const double tail = std::sqrt(1.0 - sab * sab);
    double est = 0.0;
    for (std::int64_t i = probe_len; i < probe_len + cand_len; ++i) {
      est += noisy[static_cast<std::size_t>(i)];
    }
    est /= sab * static_cast<double>(cand_len);
    std::vector<double> eps(noisy.size(), 0.0);
    for (std::int64_t i = 0; i < probe_len; ++i) {
      eps[static_cast<std::size_t>(i)] =
          (noisy[static_cast<std::size_t>(i)] - sab * est) / tail;
    }
    return eps;
  };

  auto accuracy = [&](int n_timesteps) {
    Rng pick(41);
    const int trials = 500;
    int hits = 0;
    for (int trial = 0; trial < trials; ++trial) {
      const std::size_t truth = pick.uniform(0.0, 1.0) < 0.5 ? 0 : 1;
      const std::vector<std::vector<double>> candidates = {
          std::vector<double>(static_cast<std::size_t>(cand_len), 0.0),
          std::vector<double>(static_cast<std::size_t>(cand_len), delta)};
      const std::vector<double> probe(static_cast<std::size_t>(probe_len),
                                      truth == 0 ? 0.0 : delta);
      Rng rng(4100003 + static_cast<std::uint64_t>(trial));
      const ClassifyResult r = classify_with_predictor(
          probe, candidates, predictor, n_timesteps, rng, length);
      if (r.index == truth) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
  };

  const double a1 = accuracy(1);
  const double a4 = accuracy(4);
  const double a32 = accuracy(32);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "trials=500 acc(1)=%.3f acc(4)=%.3f acc(32)=%.3f",
                a1, a4, a32);
  detail = buf;
  return a1 < a4 && a4 < a32;
}

// 8. Distance metric against closed forms and sampled populations.
bool check_fsd(std::string& detail) {
  auto diag = [](std::vector<double> mu, std::vector<double> var) {
    SpeakerStats s;
    s.mu = std::move(mu);
    const std::size_t d = s.mu.size();
    s.cov.assign(d * d, 0.0);
    for (std::size_t k = 0; k < d; ++k) s.cov[k * d + k] = var[k];
    s.count = 2;
    return s;
  };

  bool ok = true;
  // Identical sets.
  const SpeakerStats self = diag({0.3, -0.2, 0.9}, {1.0, 0.5, 2.0});
  const double d_self = fsd(self, self);
  ok &= d_self <= 1e-6;

  // Symmetry.
  SpeakerStats a = diag({0.1, -0.4}, {1.5, 0.25});
  a.cov[1] = a.cov[2] = 0.2;
  const SpeakerStats b = diag({-0.3, 0.2}, {0.5, 2.0});
  const double sym_gap = std::fabs(fsd(a, b) - fsd(b, a));
  ok &= sym_gap <= 1e-8;

  // Sampled populations against the analytic value.
  const std::vector<double> mu_a = {0.0, 0.0, 0.0, 0.0};
  const std::vector<double> var_a = {1.0, 0.5, 2.0, 1.0};
  const std::vector<double> mu_b = {1.0, 0.0, 0.5, 0.0};
  const std::vector<double> var_b = {1.0, 1.0, 1.0, 2.0};
  double expected = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const double dm = mu_a[k] - mu_b[k];
    const double ds = std::sqrt(var_a[k]) - std::sqrt(var_b[k]);
    expected += dm * dm + ds * ds;
  }
  Rng rng(2024);
  auto draw = [&](const std::vector<double>& mu, const std::vector<double>& var,
                  int n) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(n),
                                          std::vector<double>(4));
    for (auto& row : rows) {
      for (std::size_t k = 0; k < 4; ++k) {
        row[k] = mu[k] + std::sqrt(var[k]) * rng.normal();
      }
    }
    return rows;
  };
  const double sampled =
      fsd(gaussian_stats(draw(mu_a, var_a, 10000)),
          gaussian_stats(draw(mu_b, var_b, 10000)));
  const double mc_rel = std::fabs(sampled - expected) / expected;
  ok &= mc_rel <= 0.05;

  // Self-split distance shrinks as the sets grow.
  auto split_distance = [&](int n) {
    return fsd(gaussian_stats(draw(mu_a, var_a, n)),
               gaussian_stats(draw(mu_a, var_a, n)));
  };
  const double coarse = split_distance(100);
  const double fine = split_distance(4000);
  ok &= fine < coarse;

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "self=%.1e sym_gap=%.1e mc_rel=%.3f split100=%.4f split4000=%.4f",
                d_self, sym_gap, mc_rel, coarse, fine);
  detail = buf;
  return ok;
}

// 9. Silence trimming at the chunked boundary.
bool check_trimming(std::string& detail) {
  SamplerConfig sampler;  // trim_chunk 1024, trim_cutoff 0.02
  bool ok = true;

  // Four loud chunks then three at mean magnitude 0.01.
  std::vector<double> wav(7 * 1024, 0.01);
  for (std::size_t i = 0; i < 4 * 1024; ++i) wav[i] = 0.5;
  const auto trimmed = trim_silence(wav, sampler);
  ok &= trimmed.samples.size() == 4 * 1024;
  ok &= !trimmed.all_silent;

  // Chunks at 0.5 are all retained.
  const std::vector<double> loud(5 * 1024, 0.5);
  const auto kept = trim_silence(loud, sampler);
  ok &= kept.samples.size() == loud.size();

  // Idempotence.
  const auto twice = trim_silence(trimmed.samples, sampler);
  ok &= twice.samples == trimmed.samples;

  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "trimmed=%zu/%zu kept=%zu idempotent=%d",
                trimmed.samples.size(), wav.size(), kept.samples.size(),
                twice.samples == trimmed.samples ? 1 : 0);
  detail = buf;
  return ok;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "inference schedule oracle", check_schedule},
      {2, "forward process moments", check_forward_moments},
      {3, "gradient check", check_gradients},
      {4, "full-size shape contract", check_shape_contract},
      {5, "overfit and resample", check_overfit},
      {6, "known-region preservation", check_preservation},
      {7, "classifier timestep trend", check_classifier_trend},
      {8, "speaker distance oracle", check_fsd},
      {9, "silence trimming", check_trimming},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = Clock::now();
    bool ok = false;
    std::string detail;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double dt = seconds_since(t0);
    std::printf("%s criterion %d: %s (%s) [%.1fs]\n", ok ? "PASS" : "FAIL",
                c.number, c.label.c_str(), detail.c_str(), dt);
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures > 0) {
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
