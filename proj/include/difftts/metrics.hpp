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

#ifndef DIFFTTS_METRICS_HPP
#define DIFFTTS_METRICS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "difftts/common.hpp"

namespace difftts {

struct SpeakerStats {
  std::vector<double> mu;   // [d]
  std::vector<double> cov;  // [d * d], row-major, symmetric
  std::int64_t count = 0;

  std::int64_t dim() const { return static_cast<std::int64_t>(mu.size()); }
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual std::vector<double> embed(std::span<const double> waveform,
                                    std::int64_t sample_rate) = 0;
  virtual std::int64_t dim() const = 0;
  virtual std::string name() const = 0;
};

// Deterministic stand-in for a speaker model: half the features are
// band magnitudes at fixed frequencies, half are segment RMS values.
class SyntheticEmbedder : public EmbeddingBackend {
 public:
  explicit SyntheticEmbedder(std::int64_t dim = 16);
  std::vector<double> embed(std::span<const double> waveform,
                            std::int64_t sample_rate) override;
  std::int64_t dim() const override { return dim_; }
  std::string name() const override { return "synthetic-v1"; }

 private:
  std::int64_t dim_;
};

// Embeds each waveform and normalizes every row to unit L2 norm.
// names, when given, label error messages; it must align with waveforms.
std::vector<std::vector<double>> embed_set(
    const std::vector<std::vector<double>>& waveforms,
    EmbeddingBackend& backend, std::int64_t sample_rate,
    const std::vector<std::string>* names = nullptr);

// Sample mean and unbiased sample covariance. Needs n >= 2 rows.
SpeakerStats gaussian_stats(const std::vector<std::vector<double>>& embeddings);

// ||mu_a - mu_b||^2 + tr(C_a + C_b - 2 (C_a C_b)^(1/2)), with the matrix
// square root taken through the symmetric product sqrt(C_a) C_b sqrt(C_a).
// Tiny negative eigenvalues are clamped; the result is clamped at 0.
double fsd(const SpeakerStats& a, const SpeakerStats& b);

}  // namespace difftts

#endif  // DIFFTTS_METRICS_HPP
