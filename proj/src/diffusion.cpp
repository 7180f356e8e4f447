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

#include "difftts/diffusion.hpp"

#include <cmath>

namespace difftts {

std::vector<double> forward_diffuse(std::span<const double> y0,
                                    double sqrt_alpha_bar,
                                    std::span<const double> epsilon) {
  if (y0.size() != epsilon.size())
    throw ShapeError("forward_diffuse: y0 and epsilon lengths differ");
  if (!(sqrt_alpha_bar > 0.0 && sqrt_alpha_bar <= 1.0))
    throw ParamError("forward_diffuse: sqrt_alpha_bar must be in (0,1]");
  const double noise_scale =
      std::sqrt(std::max(0.0, 1.0 - sqrt_alpha_bar * sqrt_alpha_bar));
  std::vector<double> out(y0.size());
  for (std::size_t i = 0; i < y0.size(); ++i)
    out[i] = sqrt_alpha_bar * y0[i] + noise_scale * epsilon[i];
  return out;
}

std::vector<double> reverse_step(std::span<const double> y_n,
                                 std::span<const double> epsilon_pred,
                                 double alpha_n, double alpha_bar_n,
                                 double sigma_n, std::span<const double> z) {
  if (y_n.size() != epsilon_pred.size())
    throw ShapeError("reverse_step: waveform and epsilon lengths differ");
  if (!z.empty() && z.size() != y_n.size())
    throw ShapeError("reverse_step: z length differs");
  if (!(alpha_n > 0.0 && alpha_n <= 1.0))
    throw ParamError("reverse_step: alpha must be in (0,1]");
  if (!(alpha_bar_n > 0.0 && alpha_bar_n < 1.0))
    throw ParamError("reverse_step: alpha_bar must be in (0,1)");
  const double inv_sqrt_alpha = 1.0 / std::sqrt(alpha_n);
  const double eps_coeff = (1.0 - alpha_n) / std::sqrt(1.0 - alpha_bar_n);
  std::vector<double> out(y_n.size());
  for (std::size_t i = 0; i < y_n.size(); ++i) {
    out[i] = inv_sqrt_alpha * (y_n[i] - eps_coeff * epsilon_pred[i]);
    if (!z.empty()) out[i] += sigma_n * z[i];
  }
  return out;
}

std::vector<double> reverse_step(std::span<const double> y_n,
                                 std::span<const double> epsilon_pred,
                                 const NoiseSchedule& schedule, int n,
                                 std::span<const double> z) {
  if (n < 1 || n > schedule.n_steps)
    throw ParamError("reverse_step: step index out of range");
  return reverse_step(y_n, epsilon_pred, schedule.alpha_at(n),
                      schedule.alpha_bar_at(n), schedule.sigma_at(n), z);
}

LossBreakdown weighted_kl_loss(std::span<const double> epsilon_pred,
                               std::span<const double> epsilon_true,
                               double omega,
                               std::span<const double> sample_weights) {
  if (epsilon_pred.size() != epsilon_true.size() ||
      epsilon_pred.size() != sample_weights.size())
    throw ShapeError("weighted_kl_loss: array lengths differ");
  if (epsilon_pred.empty()) throw ShapeError("weighted_kl_loss: empty arrays");
  if (!(omega > 0.0)) throw DomainError("weighted_kl_loss: omega must be > 0");
  double weighted_sq = 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < epsilon_pred.size(); ++i) {
    const double d = epsilon_pred[i] - epsilon_true[i];
    weighted_sq += sample_weights[i] * d * d;
    mass += sample_weights[i];
  }
  if (!(mass > 0.0)) throw DomainError("weighted_kl_loss: zero weight mass");
  LossBreakdown b;
  b.residual = weighted_sq / mass;
  b.omega = omega;
  b.log_omega = std::log(omega);
  b.total = b.residual / omega + b.log_omega;
  return b;
}

std::vector<double> score_from_epsilon(std::span<const double> epsilon,
                                       double alpha_bar) {
  if (!(alpha_bar > 0.0 && alpha_bar < 1.0))
    throw DomainError("score_from_epsilon: alpha_bar must be in (0,1)");
  const double scale = -1.0 / std::sqrt(1.0 - alpha_bar);
  std::vector<double> out(epsilon.size());
  for (std::size_t i = 0; i < epsilon.size(); ++i) out[i] = scale * epsilon[i];
  return out;
}

}  // namespace difftts
