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
#include <numbers>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "difftts/text_frontend.hpp"
#include "difftts/unet.hpp"

namespace {

using namespace difftts;

struct ToyStack {
  Rng model_rng;
  Rng frontend_rng;
  UNet<float> model;
  Frontend<float> frontend;

  explicit ToyStack(std::uint64_t seed = 7)
      : model_rng(seed),
        frontend_rng(11),
        model(UNetConfig::toy(), model_rng),
        frontend(make_frontend<float>(toy_frontend_spec(), frontend_rng)) {}

  static FrontendSpec toy_frontend_spec() {
    FrontendSpec spec;
    spec.backend = "toy-char";
    spec.toy_d_model = 12;
    spec.toy_heads = 2;
    spec.toy_ff = 24;
    spec.length_max = 64;
    return spec;
  }
};

SamplerConfig small_sampler() {
  SamplerConfig s;
  s.n_steps = 6;
  s.seed = 123;
  s.length = 128;
  s.trim_chunk = 32;
  s.trim_cutoff = 0.0;
  return s;
}

std::vector<double> loud_sine(std::int64_t n, double amp = 0.5,
                              double cycles = 3.0) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    x[static_cast<std::size_t>(i)] =
        amp * std::sin(2.0 * std::numbers::pi * cycles *
                       static_cast<double>(i) / static_cast<double>(n));
  }
  return x;
}

}  // namespace

TEST_CASE("trim_silence drops trailing quiet chunks only") {
  SamplerConfig s;
  s.trim_chunk = 4;
  s.trim_cutoff = 0.02;

  SUBCASE("trailing silence removed at a chunk boundary") {
    std::vector<double> x(16, 0.0);
    for (int i = 0; i < 8; ++i) x[static_cast<std::size_t>(i)] = 0.5;
    const auto r = trim_silence(x, s);
    CHECK_FALSE(r.all_silent);
    REQUIRE(r.samples.size() == 8);
    for (int i = 0; i < 8; ++i) CHECK(r.samples[static_cast<std::size_t>(i)] == 0.5);
  }

  SUBCASE("sub-threshold tail counts as silence") {
    std::vector<double> x(16, 0.01);
    for (int i = 0; i < 4; ++i) x[static_cast<std::size_t>(i)] = 0.5;
    const auto r = trim_silence(x, s);
    CHECK(r.samples.size() == 4);
  }

  SUBCASE("mean exactly at the cutoff is silent") {
    std::vector<double> x(4, 0.02);
    const auto r = trim_silence(x, s);
    CHECK(r.all_silent);
    CHECK(r.samples.empty());
  }

  SUBCASE("interior quiet chunks are kept") {
    std::vector<double> x(12, 0.0);
    for (int i = 0; i < 4; ++i) x[static_cast<std::size_t>(i)] = 0.5;
    for (int i = 8; i < 12; ++i) x[static_cast<std::size_t>(i)] = 0.5;
    const auto r = trim_silence(x, s);
    REQUIRE(r.samples.size() == 12);
    CHECK(r.samples[5] == 0.0);
  }

  SUBCASE("loud partial last chunk is kept whole") {
    std::vector<double> x(10, 0.5);
    const auto r = trim_silence(x, s);
    CHECK(r.samples.size() == 10);
  }

  SUBCASE("trimming is idempotent") {
    std::vector<double> x(20, 0.0);
    for (int i = 0; i < 7; ++i) x[static_cast<std::size_t>(i)] = 0.4;
    const auto once = trim_silence(x, s);
    const auto twice = trim_silence(once.samples, s);
    CHECK(twice.samples == once.samples);
  }

  SUBCASE("all-silent input reports the flag") {
    std::vector<double> x(16, 0.001);
    const auto r = trim_silence(x, s);
    CHECK(r.all_silent);
    CHECK(r.samples.empty());
  }

  SUBCASE("empty input is not flagged silent") {
    const auto r = trim_silence(std::vector<double>{}, s);
    CHECK_FALSE(r.all_silent);
    CHECK(r.samples.empty());
  }

  SUBCASE("bad sampler settings are rejected") {
    SamplerConfig bad = s;
    bad.trim_chunk = 0;
    CHECK_THROWS_AS(trim_silence(std::vector<double>(4, 0.1), bad), ParamError);
    bad = s;
    bad.trim_cutoff = -0.1;
    CHECK_THROWS_AS(trim_silence(std::vector<double>(4, 0.1), bad), ParamError);
  }
}

TEST_CASE("sampler config validation") {
  SamplerConfig s = small_sampler();
  CHECK_NOTHROW(s.validate());
  s.n_steps = 0;
  CHECK_THROWS_AS(s.validate(), ParamError);
  s = small_sampler();
  s.length = 0;
  CHECK_THROWS_AS(s.validate(), ParamError);
}

TEST_CASE("edit mask bookkeeping and validation") {
  EditMask m;
  m.known = {1, 1, 0, 0, 1};
  m.reference = {0.1, 0.2, 0.0, 0.0, 0.5};
  CHECK(m.unknown_count() == 2);
  CHECK_NOTHROW(m.validate(5));
  CHECK_THROWS_AS(m.validate(6), ShapeError);

  m.reference.pop_back();
  CHECK_THROWS_AS(m.validate(5), ShapeError);

  m.reference.push_back(std::nan(""));
  CHECK_THROWS_AS(m.validate(5), InputError);

  // Garbage is fine where the mask says unknown.
  m.reference[4] = 0.5;
  m.reference[2] = std::nan("");
  CHECK_NOTHROW(m.validate(5));
}

TEST_CASE("mask_from_span marks the edit window") {
  const std::vector<double> audio = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};

  SUBCASE("span bounds round outward to whole samples") {
    const EditMask m = mask_from_span(audio, 0.25, 0.55, 10, 12);
    REQUIRE(m.known.size() == 12);
    REQUIRE(m.reference.size() == 12);
    for (std::size_t i = 0; i < 12; ++i) {
      const bool in_span = i >= 2 && i < 6;
      CHECK(m.known[i] == (in_span ? 0 : 1));
    }
    for (std::size_t i = 0; i < 8; ++i) CHECK(m.reference[i] == audio[i]);
    for (std::size_t i = 8; i < 12; ++i) CHECK(m.reference[i] == 0.0);
    CHECK(m.unknown_count() == 4);
  }

  SUBCASE("padding beyond the input stays known") {
    const EditMask m = mask_from_span(audio, 0.0, 0.2, 10, 16);
    for (std::size_t i = 8; i < 16; ++i) CHECK(m.known[i] == 1);
  }

  SUBCASE("invalid spans are rejected") {
    CHECK_THROWS_AS(mask_from_span(audio, -0.1, 0.5, 10, 12), InputError);
    CHECK_THROWS_AS(mask_from_span(audio, 0.5, 0.5, 10, 12), InputError);
    CHECK_THROWS_AS(mask_from_span(audio, 0.5, 0.3, 10, 12), InputError);
    CHECK_THROWS_WITH_AS(mask_from_span(audio, 0.2, 0.9, 10, 12),
                         doctest::Contains("past the"), InputError);
  }

  SUBCASE("bad rate and oversize audio are rejected") {
    CHECK_THROWS_AS(mask_from_span(audio, 0.1, 0.2, 0, 12), ParamError);
    CHECK_THROWS_AS(mask_from_span(audio, 0.1, 0.2, 10, 4), InputError);
  }
}

TEST_CASE("synthesize produces a finite deterministic window") {
  ToyStack t;
  SamplerConfig s = small_sampler();

  const TrimResult a = synthesize("hello there", t.model, t.frontend, s);
  REQUIRE_FALSE(a.all_silent);
  REQUIRE(static_cast<std::int64_t>(a.samples.size()) == s.length);
  for (const double v : a.samples) CHECK(std::isfinite(v));

  const TrimResult b = synthesize("hello there", t.model, t.frontend, s);
  CHECK(a.samples == b.samples);

  SamplerConfig s2 = s;
  s2.seed = 999;
  const TrimResult c = synthesize("hello there", t.model, t.frontend, s2);
  CHECK(a.samples != c.samples);
}

TEST_CASE("synthesize rejects window sizes the model cannot take") {
  ToyStack t;
  SamplerConfig s = small_sampler();
  s.length = 100;
  CHECK_THROWS_AS(synthesize("hi", t.model, t.frontend, s), ShapeError);
  s.length = 0;
  CHECK_THROWS_AS(synthesize("hi", t.model, t.frontend, s), ParamError);
}

TEST_CASE("prompt_synthesize with no prompt matches synthesize") {
  ToyStack t;
  const SamplerConfig s = small_sampler();
  const std::vector<double> prompt;
  const TrimResult plain = synthesize("same words", t.model, t.frontend, s);
  const TrimResult prompted =
      prompt_synthesize("same words", prompt, 0, t.model, t.frontend, s);
  CHECK(plain.samples == prompted.samples);
}

TEST_CASE("a fully known prompt is reproduced") {
  ToyStack t;
  SamplerConfig s = small_sampler();
  s.trim_cutoff = 0.02;
  const auto ref = loud_sine(s.length);
  const TrimResult out =
      prompt_synthesize("any text", ref, s.length, t.model, t.frontend, s);
  REQUIRE(out.samples.size() == ref.size());
  double max_err = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    max_err = std::max(max_err, std::fabs(out.samples[i] - ref[i]));
  }
  CHECK(max_err < 1e-6);
}

TEST_CASE("prompt continuation keeps the prompt region") {
  ToyStack t;
  const SamplerConfig s = small_sampler();
  const auto ref = loud_sine(s.length);
  const std::int64_t keep = 64;
  const TrimResult out =
      prompt_synthesize("carry on", ref, keep, t.model, t.frontend, s);
  REQUIRE(static_cast<std::int64_t>(out.samples.size()) >= keep);
  double max_err = 0.0;
  for (std::int64_t i = 0; i < keep; ++i) {
    max_err = std::max(
        max_err, std::fabs(out.samples[static_cast<std::size_t>(i)] -
                           ref[static_cast<std::size_t>(i)]));
  }
  CHECK(max_err < 1e-6);
}

TEST_CASE("prompt_synthesize input validation") {
  ToyStack t;
  const SamplerConfig s = small_sampler();
  std::vector<double> prompt(static_cast<std::size_t>(s.length) + 8, 0.1);
  CHECK_THROWS_AS(prompt_synthesize("x", prompt, s.length + 8, t.model,
                                    t.frontend, s),
                  InputError);
  CHECK_THROWS_AS(
      prompt_synthesize("x", std::vector<double>(4, 0.1), 8, t.model,
                        t.frontend, s),
      InputError);
  CHECK_THROWS_AS(
      prompt_synthesize("x", std::vector<double>(4, 0.1), -1, t.model,
                        t.frontend, s),
      ParamError);
  std::vector<double> bad(16, 0.1);
  bad[3] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(prompt_synthesize("x", bad, 16, t.model, t.frontend, s),
                  InputError);
}

TEST_CASE("inpaint regenerates only the masked span") {
  ToyStack t;
  const SamplerConfig s = small_sampler();
  const auto ref = loud_sine(s.length);
  EditMask m;
  m.known.assign(static_cast<std::size_t>(s.length), 1);
  m.reference = ref;
  for (std::size_t i = 40; i < 72; ++i) m.known[i] = 0;

  const std::vector<double> out = inpaint("fill it in", m, t.model, t.frontend, s);
  REQUIRE(static_cast<std::int64_t>(out.size()) == s.length);
  double max_err = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(std::isfinite(out[i]));
    if (m.known[i]) {
      max_err = std::max(max_err, std::fabs(out[i] - ref[i]));
    }
  }
  CHECK(max_err < 1e-6);

  const std::vector<double> again =
      inpaint("fill it in", m, t.model, t.frontend, s);
  CHECK(out == again);
}

TEST_CASE("inpaint rejects degenerate masks") {
  ToyStack t;
  const SamplerConfig s = small_sampler();
  EditMask m;
  m.known.assign(static_cast<std::size_t>(s.length), 1);
  m.reference.assign(static_cast<std::size_t>(s.length), 0.25);
  CHECK_THROWS_AS(inpaint("x", m, t.model, t.frontend, s), InputError);

  m.known.pop_back();
  m.reference.pop_back();
  CHECK_THROWS_AS(inpaint("x", m, t.model, t.frontend, s), ShapeError);
}

namespace {

// Candidates are constant-valued waveforms; the clean value doubles as the
// speaker identity. The predictor reads the candidate region back out of the
// noisy window and denoises the probe region against that estimate.
EpsilonPredictor make_region_predictor(std::int64_t probe_len,
                                       std::int64_t cand_len) {
  return [probe_len, cand_len](const std::vector<double>& noisy,
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
}

double classify_accuracy(int n_timesteps, int trials, double delta,
                         std::int64_t probe_len, std::int64_t cand_len,
                         std::uint64_t seed) {
  const std::int64_t length = probe_len + cand_len;
  const auto predictor = make_region_predictor(probe_len, cand_len);
  Rng pick(seed);
  int hits = 0;
  for (int trial = 0; trial < trials; ++trial) {
    const std::size_t truth = pick.uniform(0.0, 1.0) < 0.5 ? 0 : 1;
    const std::vector<std::vector<double>> candidates = {
        std::vector<double>(static_cast<std::size_t>(cand_len), 0.0),
        std::vector<double>(static_cast<std::size_t>(cand_len), delta)};
    const std::vector<double> probe(static_cast<std::size_t>(probe_len),
                                    truth == 0 ? 0.0 : delta);
    Rng rng(seed * 100003 + static_cast<std::uint64_t>(trial));
    const ClassifyResult r = classify_with_predictor(
        probe, candidates, predictor, n_timesteps, rng, length);
    if (r.index == truth) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(trials);
}

}  // namespace

TEST_CASE("classifier picks the lone candidate") {
  const auto predictor = make_region_predictor(4, 4);
  Rng rng(3);
  const std::vector<std::vector<double>> one = {{0.3, 0.3, 0.3, 0.3}};
  const ClassifyResult r =
      classify_with_predictor(std::vector<double>(4, 0.3), one, predictor, 2,
                              rng, 8);
  CHECK(r.index == 0);
  REQUIRE(r.scores.size() == 1);
  CHECK(std::isfinite(r.scores[0]));
}

TEST_CASE("well separated speakers classify perfectly") {
  // Values far apart relative to the draw noise: every trial must land.
  const double acc = classify_accuracy(4, 100, 4.0, 8, 16, 21);
  CHECK(acc == 1.0);
}

TEST_CASE("more timestep draws improve classification") {
  const int trials = 500;
  const double delta = 0.18;
  const double acc1 = classify_accuracy(1, trials, delta, 4, 16, 5);
  const double acc4 = classify_accuracy(4, trials, delta, 4, 16, 5);
  const double acc32 = classify_accuracy(32, trials, delta, 4, 16, 5);
  INFO("acc1=", acc1, " acc4=", acc4, " acc32=", acc32);
  CHECK(acc1 < acc4);
  CHECK(acc4 < acc32);
  CHECK(acc32 > 0.9);
}

TEST_CASE("candidate order does not change the decision") {
  const auto predictor = make_region_predictor(4, 4);
  const std::vector<std::vector<double>> fwd = {
      std::vector<double>(4, 0.0), std::vector<double>(4, 0.5),
      std::vector<double>(4, 1.0)};
  const std::vector<std::vector<double>> rev = {fwd[2], fwd[1], fwd[0]};
  const std::vector<double> probe(4, 0.5);

  Rng rng_a(77);
  const ClassifyResult a =
      classify_with_predictor(probe, fwd, predictor, 8, rng_a, 8);
  Rng rng_b(77);
  const ClassifyResult b =
      classify_with_predictor(probe, rev, predictor, 8, rng_b, 8);

  REQUIRE(a.scores.size() == 3);
  REQUIRE(b.scores.size() == 3);
  for (std::size_t j = 0; j < 3; ++j) CHECK(a.scores[j] == b.scores[2 - j]);
  CHECK(a.index == 1);
  CHECK(b.index == 1);
}

TEST_CASE("sharing noise across candidates cuts score variance") {
  const std::int64_t probe_len = 4;
  const std::int64_t cand_len = 16;
  const std::int64_t length = probe_len + cand_len;
  // Near-identical candidates: the shared draw cancels almost entirely in
  // the score gap, while fresh draws leave their own variance behind.
  const double delta = 0.05;
  const auto predictor = make_region_predictor(probe_len, cand_len);
  const std::vector<std::vector<double>> candidates = {
      std::vector<double>(static_cast<std::size_t>(cand_len), 0.0),
      std::vector<double>(static_cast<std::size_t>(cand_len), delta)};
  const std::vector<double> probe(static_cast<std::size_t>(probe_len), 0.0);

  const int trials = 2000;
  std::vector<double> shared_gap(static_cast<std::size_t>(trials));
  std::vector<double> indep_gap(static_cast<std::size_t>(trials));
  Rng rng(913);
  std::vector<double> noisy(static_cast<std::size_t>(length));
  std::vector<double> eps(static_cast<std::size_t>(length));
  for (int trial = 0; trial < trials; ++trial) {
    Rng shared_rng(2000 + static_cast<std::uint64_t>(trial));
    const ClassifyResult r = classify_with_predictor(
        probe, candidates, predictor, 1, shared_rng, length);
    shared_gap[static_cast<std::size_t>(trial)] = r.scores[1] - r.scores[0];

    // Counterfactual with a fresh noise draw per candidate.
    const double ab = rng.uniform(0.04, 0.96);
    const double sab = std::sqrt(ab);
    const double tail = std::sqrt(1.0 - ab);
    double scores[2] = {0.0, 0.0};
    for (std::size_t j = 0; j < 2; ++j) {
      for (auto& v : eps) v = rng.normal();
      for (std::int64_t i = 0; i < length; ++i) {
        const double clean = i < probe_len
                                 ? probe[static_cast<std::size_t>(i)]
                                 : candidates[j][static_cast<std::size_t>(
                                       i - probe_len)];
        noisy[static_cast<std::size_t>(i)] =
            sab * clean + tail * eps[static_cast<std::size_t>(i)];
      }
      const std::vector<double> pred = predictor(noisy, sab);
      for (std::int64_t i = 0; i < probe_len; ++i) {
        const double d = pred[static_cast<std::size_t>(i)] -
                         eps[static_cast<std::size_t>(i)];
        scores[j] += d * d;
      }
    }
    indep_gap[static_cast<std::size_t>(trial)] = scores[1] - scores[0];
  }

  auto variance = [](const std::vector<double>& xs) {
    const double mean =
        std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double acc = 0.0;
    for (const double x : xs) acc += (x - mean) * (x - mean);
    return acc / static_cast<double>(xs.size() - 1);
  };
  const double vs = variance(shared_gap);
  const double vi = variance(indep_gap);
  INFO("shared=", vs, " independent=", vi);
  CHECK(vi > 1.5 * vs);
}

TEST_CASE("classifier input validation") {
  const auto predictor = make_region_predictor(4, 4);
  Rng rng(1);
  const std::vector<double> probe(4, 0.1);
  const std::vector<std::vector<double>> cands = {std::vector<double>(4, 0.1)};

  CHECK_THROWS_AS(classify_with_predictor(probe, {}, predictor, 1, rng, 8),
                  InputError);
  CHECK_THROWS_AS(classify_with_predictor({}, cands, predictor, 1, rng, 8),
                  InputError);
  CHECK_THROWS_AS(classify_with_predictor(probe, cands, predictor, 0, rng, 8),
                  ParamError);
  CHECK_THROWS_WITH_AS(
      classify_with_predictor(probe, cands, predictor, 1, rng, 6),
      doctest::Contains("candidate 0"), InputError);
  const std::vector<double> weights = {0.5, 0.5};
  CHECK_THROWS_AS(
      classify_with_predictor(probe, cands, predictor, 3, rng, 8, weights),
      ParamError);
}

TEST_CASE("uniform draw weights match the default weighting") {
  const auto predictor = make_region_predictor(4, 8);
  const std::vector<double> probe(4, 0.2);
  const std::vector<std::vector<double>> cands = {
      std::vector<double>(8, 0.2), std::vector<double>(8, 0.9)};
  Rng rng_a(55);
  const ClassifyResult a =
      classify_with_predictor(probe, cands, predictor, 4, rng_a, 12);
  Rng rng_b(55);
  const std::vector<double> w(4, 0.25);
  const ClassifyResult b =
      classify_with_predictor(probe, cands, predictor, 4, rng_b, 12, w);
  CHECK(a.scores == b.scores);
  CHECK(a.index == b.index);
}

TEST_CASE("speaker_classify runs the model end to end") {
  ToyStack t;
  SamplerConfig s = small_sampler();
  const std::vector<double> probe = loud_sine(32, 0.4, 2.0);
  const std::vector<std::vector<double>> cands = {loud_sine(64, 0.4, 4.0),
                                                  loud_sine(64, 0.1, 9.0)};

  Rng rng_a(31);
  const ClassifyResult a =
      speaker_classify(probe, cands, t.model, t.frontend, 2, rng_a, s);
  REQUIRE(a.scores.size() == 2);
  CHECK(a.index < 2);
  for (const double v : a.scores) CHECK(std::isfinite(v));

  Rng rng_b(31);
  const ClassifyResult b =
      speaker_classify(probe, cands, t.model, t.frontend, 2, rng_b, s);
  CHECK(a.scores == b.scores);
  CHECK(a.index == b.index);

  Rng rng_c(31);
  const ClassifyResult c = speaker_classify(probe, cands, t.model, t.frontend,
                                            2, rng_c, s, "spoken words");
  CHECK(c.scores != a.scores);

  Rng rng_d(31);
  const std::vector<std::vector<double>> too_long = {
      std::vector<double>(static_cast<std::size_t>(s.length), 0.1)};
  CHECK_THROWS_AS(
      speaker_classify(probe, too_long, t.model, t.frontend, 1, rng_d, s),
      InputError);
}
