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

#include "difftts/schedule.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace difftts {

namespace {

// Derives alpha, sigma (and alpha_bar when not supplied) from beta.
void fill_derived(NoiseSchedule& s, bool recompute_alpha_bar) {
  const int n = s.n_steps;
  s.alpha.resize(n);
  for (int i = 0; i < n; ++i) s.alpha[i] = 1.0 - s.beta[i];
  if (recompute_alpha_bar) {
    s.alpha_bar.assign(n + 1, 1.0);
    for (int i = 0; i < n; ++i) s.alpha_bar[i + 1] = s.alpha_bar[i] * s.alpha[i];
  }
  s.sigma.resize(n);
  for (int i = 0; i < n; ++i) {
    const double var =
        (1.0 - s.alpha_bar[i]) / (1.0 - s.alpha_bar[i + 1]) * s.beta[i];
    s.sigma[i] = std::sqrt(var);
  }
  // The posterior variance is exactly zero at the first step because
  // alpha_bar(0) == 1; force it in case of rounding.
  s.sigma[0] = 0.0;
}

}  // namespace

void NoiseSchedule::validate() const {
  if (n_steps < 1) throw ParamError("schedule: n_steps must be >= 1");
  if (static_cast<int>(beta.size()) != n_steps ||
      static_cast<int>(alpha.size()) != n_steps ||
      static_cast<int>(sigma.size()) != n_steps ||
      static_cast<int>(alpha_bar.size()) != n_steps + 1) {
    throw ShapeError("schedule: array lengths inconsistent with n_steps");
  }
  if (alpha_bar[0] != 1.0) throw ParamError("schedule: alpha_bar[0] must be 1");
  for (int i = 0; i < n_steps; ++i) {
    if (!(beta[i] > 0.0 && beta[i] < 1.0))
      throw ParamError("schedule: beta out of (0,1) at step " +
                       std::to_string(i + 1));
    if (!(alpha_bar[i + 1] > 0.0 && alpha_bar[i + 1] < alpha_bar[i]))
      throw ParamError("schedule: alpha_bar not strictly decreasing in (0,1]");
    if (!(sigma[i] >= 0.0))
      throw ParamError("schedule: negative sigma at step " +
                       std::to_string(i + 1));
  }
}

NoiseSchedule build_training_schedule(int n_steps, double beta_min,
                                      double beta_max) {
  if (n_steps < 1) throw ParamError("build_training_schedule: n_steps must be >= 1");
  if (!(beta_min > 0.0) || !(beta_min <= beta_max) || !(beta_max < 1.0))
    throw ParamError("build_training_schedule: need 0 < beta_min <= beta_max < 1");
  NoiseSchedule s;
  s.n_steps = n_steps;
  s.beta.resize(n_steps);
  if (n_steps == 1) {
    s.beta[0] = beta_min;
  } else {
    for (int i = 0; i < n_steps; ++i)
      s.beta[i] =
          beta_min + (beta_max - beta_min) * static_cast<double>(i) /
                         static_cast<double>(n_steps - 1);
  }
  fill_derived(s, /*recompute_alpha_bar=*/true);
  s.validate();
  return s;
}

NoiseSchedule build_inference_schedule(int n_steps) {
  if (n_steps < 1) throw ParamError("build_inference_schedule: n_steps must be >= 1");
  NoiseSchedule s;
  s.n_steps = n_steps;
  s.alpha_bar.resize(n_steps + 1);
  const double log_floor = std::log(1e-7);
  const double half_pi = 1.57079632679489661923;
  for (int n = 0; n <= n_steps; ++n) {
    const double c =
        1.0 - std::cos(static_cast<double>(n) / n_steps * half_pi);
    s.alpha_bar[n] = std::exp(log_floor * std::pow(c, 1.5));
  }
  s.beta.resize(n_steps);
  for (int i = 0; i < n_steps; ++i)
    s.beta[i] = 1.0 - s.alpha_bar[i + 1] / s.alpha_bar[i];
  fill_derived(s, /*recompute_alpha_bar=*/false);
  s.validate();
  return s;
}

double sample_noise_level(const NoiseSchedule& schedule, Rng& rng) {
  const int n = 1 + static_cast<int>(rng.integer(
                        static_cast<std::uint64_t>(schedule.n_steps)));
  const double lo = std::sqrt(schedule.alpha_bar_at(n));
  const double hi = std::sqrt(schedule.alpha_bar_at(n - 1));
  return rng.uniform(lo, hi);
}

std::string NoiseSchedule::to_json_string() const {
  nlohmann::json j;
  j["n_steps"] = n_steps;
  j["beta"] = beta;
  j["alpha_bar"] = alpha_bar;
  return j.dump(2);
}

NoiseSchedule NoiseSchedule::from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("schedule parse failure: ") + e.what());
  }
  NoiseSchedule s;
  s.n_steps = j.at("n_steps").get<int>();
  s.beta = j.at("beta").get<std::vector<double>>();
  if (j.contains("alpha_bar")) {
    s.alpha_bar = j.at("alpha_bar").get<std::vector<double>>();
    fill_derived(s, /*recompute_alpha_bar=*/false);
  } else {
    fill_derived(s, /*recompute_alpha_bar=*/true);
  }
  s.validate();
  return s;
}

void NoiseSchedule::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open schedule file for write: " + path);
  out << to_json_string() << "\n";
  if (!out) throw IoError("write failure: " + path);
}

NoiseSchedule NoiseSchedule::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schedule file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_string(buf.str());
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

}  // namespace difftts
