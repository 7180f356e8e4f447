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

#ifndef DIFFTTS_DIFFUSION_HPP
#define DIFFTTS_DIFFUSION_HPP

#include <span>
#include <vector>

#include "difftts/common.hpp"
#include "difftts/schedule.hpp"

namespace difftts {

// A corrupted training sample: y_tilde = sqrt_alpha_bar * y0 +
// sqrt(1 - alpha_bar) * epsilon.
struct NoisySample {
  std::vector<double> y_tilde;
  std::vector<double> epsilon;
  double sqrt_alpha_bar = 1.0;
};

// KL-form loss diagnostics: total = residual / omega + ln(omega).
struct LossBreakdown {
  double total = 0.0;
  double residual = 0.0;
  double omega = 1.0;
  double log_omega = 0.0;
};

// y_tilde = sqrt_alpha_bar * y0 + sqrt(1 - sqrt_alpha_bar^2) * epsilon.
std::vector<double> forward_diffuse(std::span<const double> y0,
                                    double sqrt_alpha_bar,
                                    std::span<const double> epsilon);

// One ancestral update with explicit coefficients:
//   y_prev = (y - beta / sqrt(1 - alpha_bar) * eps_pred) / sqrt(alpha)
//            + sigma * z.
std::vector<double> reverse_step(std::span<const double> y_n,
                                 std::span<const double> epsilon_pred,
                                 double alpha_n, double alpha_bar_n,
                                 double sigma_n, std::span<const double> z);

// Same update with coefficients taken from schedule step n (1-based).
// Pass an empty z for a deterministic final step.
std::vector<double> reverse_step(std::span<const double> y_n,
                                 std::span<const double> epsilon_pred,
                                 const NoiseSchedule& schedule, int n,
                                 std::span<const double> z);

// Weighted mean squared error between predictions and targets, weights
// normalized by total weighted mass, combined with the variance term:
//   total = residual / omega + ln(omega).
LossBreakdown weighted_kl_loss(std::span<const double> epsilon_pred,
                               std::span<const double> epsilon_true,
                               double omega,
                               std::span<const double> sample_weights);

// Diagnostic score identity: score = -epsilon / sqrt(1 - alpha_bar).
std::vector<double> score_from_epsilon(std::span<const double> epsilon,
                                       double alpha_bar);

}  // namespace difftts

#endif  // DIFFTTS_DIFFUSION_HPP
