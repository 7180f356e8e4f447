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

#ifndef DIFFTTS_SCHEDULE_HPP
#define DIFFTTS_SCHEDULE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "difftts/common.hpp"

namespace difftts {

// Per-step diffusion coefficients. Steps are 1-based in the accessors to
// match the usual recurrences; alpha_bar has n_steps + 1 entries with
// alpha_bar(0) == 1.
//
// sigma uses the posterior variance
//   sigma_n^2 = ((1 - alpha_bar_{n-1}) / (1 - alpha_bar_n)) * beta_n,
// which is identically zero at n == 1.
struct NoiseSchedule {
  int n_steps = 0;
  std::vector<double> beta;       // [n_steps], beta[i] is step i+1
  std::vector<double> alpha;      // [n_steps]
  std::vector<double> alpha_bar;  // [n_steps + 1], alpha_bar[0] == 1
  std::vector<double> sigma;      // [n_steps]

  double beta_at(int n) const { return beta.at(n - 1); }
  double alpha_at(int n) const { return alpha.at(n - 1); }
  double alpha_bar_at(int n) const { return alpha_bar.at(n); }
  double sigma_at(int n) const { return sigma.at(n - 1); }

  // Throws if any defining invariant is violated.
  void validate() const;

  // Plain JSON text round trip. Stores n_steps, beta and alpha_bar;
  // loading reuses the stored values bit-exactly and revalidates.
  void save(const std::string& path) const;
  static NoiseSchedule load(const std::string& path);

  std::string to_json_string() const;
  static NoiseSchedule from_json_string(const std::string& text);
};

// Linear beta ramp from beta_min to beta_max over n_steps.
NoiseSchedule build_training_schedule(int n_steps, double beta_min,
                                      double beta_max);

// Cumulative signal level
//   alpha_bar(n) = exp(ln(1e-7) * (1 - cos((n / n_steps) * pi / 2))^(3/2))
// for n = 0..n_steps, with betas derived from consecutive ratios.
NoiseSchedule build_inference_schedule(int n_steps);

// Continuous noise-level draw: picks a step n uniformly in 1..n_steps
// and returns a uniform draw between sqrt(alpha_bar(n)) and
// sqrt(alpha_bar(n - 1)).
double sample_noise_level(const NoiseSchedule& schedule, Rng& rng);

}  // namespace difftts

#endif  // DIFFTTS_SCHEDULE_HPP
