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

#include "difftts/metrics.hpp"

#include <algorithm>
#include <cmath>

// Alignment-based loop peeling would make results depend on buffer
// addresses; training determinism requires address-independent sums.
#define EIGEN_MAX_ALIGN_BYTES 0
#include <Eigen/Dense>

namespace difftts {

namespace {

using EMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                              Eigen::RowMajor>;

// Goertzel recurrence for a single bin magnitude.
double band_magnitude(std::span<const double> x, double normalized_freq) {
  const double w = 2.0 * 3.14159265358979323846 * normalized_freq;
  const double coeff = 2.0 * std::cos(w);
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (const double v : x) {
    s0 = v + coeff * s1 - s2;
    s2 = s1;
    s1 = s0;
  }
  const double power = s1 * s1 + s2 * s2 - coeff * s1 * s2;
  return std::sqrt(std::max(0.0, power)) / std::max<double>(1.0, x.size());
}

}  // namespace

SyntheticEmbedder::SyntheticEmbedder(std::int64_t dim) : dim_(dim) {
  if (dim < 2 || dim % 2 != 0) {
    throw ParamError("synthetic embedder dimension must be even and >= 2");
  }
}

std::vector<double> SyntheticEmbedder::embed(std::span<const double> waveform,
                                             std::int64_t sample_rate) {
  if (waveform.empty()) throw InputError("cannot embed an empty waveform");
  if (sample_rate < 1) throw ParamError("sample rate must be positive");
  const std::int64_t half = dim_ / 2;
  std::vector<double> out(static_cast<std::size_t>(dim_), 0.0);
  // Log-spaced bands between 50 Hz and 40% of the sample rate.
  const double f_lo = std::min(50.0, 0.1 * sample_rate);
  const double f_hi = 0.4 * static_cast<double>(sample_rate);
  for (std::int64_t k = 0; k < half; ++k) {
    const double frac = half == 1 ? 0.0
                                  : static_cast<double>(k) /
                                        static_cast<double>(half - 1);
    const double freq = f_lo * std::pow(f_hi / f_lo, frac);
    out[static_cast<std::size_t>(k)] =
        band_magnitude(waveform, freq / static_cast<double>(sample_rate));
  }
  const std::int64_t n = static_cast<std::int64_t>(waveform.size());
  for (std::int64_t k = 0; k < half; ++k) {
    const std::int64_t lo = k * n / half;
    const std::int64_t hi = std::max(lo + 1, (k + 1) * n / half);
    double acc = 0.0;
    for (std::int64_t i = lo; i < std::min(hi, n); ++i) {
      acc += waveform[static_cast<std::size_t>(i)] *
             waveform[static_cast<std::size_t>(i)];
    }
    out[static_cast<std::size_t>(half + k)] =
        std::sqrt(acc / static_cast<double>(std::max<std::int64_t>(
                            1, std::min(hi, n) - lo)));
  }
  return out;
}

std::vector<std::vector<double>> embed_set(
    const std::vector<std::vector<double>>& waveforms,
    EmbeddingBackend& backend, std::int64_t sample_rate,
    const std::vector<std::string>* names) {
  if (waveforms.size() < 2) {
    throw InputError("need at least 2 waveforms to characterize a set, got " +
                     std::to_string(waveforms.size()));
  }
  if (names && names->size() != waveforms.size()) {
    throw ParamError("names must align with waveforms");
  }
  std::vector<std::vector<double>> rows;
  rows.reserve(waveforms.size());
  for (std::size_t i = 0; i < waveforms.size(); ++i) {
    const std::string ident =
        names ? (*names)[i] : "waveform " + std::to_string(i);
    std::vector<double> e;
    try {
      e = backend.embed(waveforms[i], sample_rate);
    } catch (const Error& err) {
      throw IngestError("embedding failed for " + ident + ": " + err.what());
    }
    if (static_cast<std::int64_t>(e.size()) != backend.dim()) {
      throw IngestError("embedding for " + ident + " has dimension " +
                        std::to_string(e.size()) + ", backend promised " +
                        std::to_string(backend.dim()));
    }
    double norm = 0.0;
    for (const double v : e) norm += v * v;
    norm = std::sqrt(norm);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw DomainError("embedding for " + ident +
                        " cannot be normalized (zero or non-finite norm)");
    }
    for (double& v : e) v /= norm;
    rows.push_back(std::move(e));
  }
  return rows;
}

SpeakerStats gaussian_stats(
    const std::vector<std::vector<double>>& embeddings) {
  const std::int64_t n = static_cast<std::int64_t>(embeddings.size());
  if (n < 2) {
    throw InputError("covariance needs at least 2 embeddings, got " +
                     std::to_string(n));
  }
  const std::int64_t d = static_cast<std::int64_t>(embeddings[0].size());
  if (d < 1) throw InputError("embeddings must have at least one feature");
  for (const auto& row : embeddings) {
    if (static_cast<std::int64_t>(row.size()) != d) {
      throw ShapeError("embedding rows have mixed dimensions");
    }
  }
  SpeakerStats stats;
  stats.count = n;
  stats.mu.assign(static_cast<std::size_t>(d), 0.0);
  for (const auto& row : embeddings) {
    for (std::int64_t k = 0; k < d; ++k) {
      stats.mu[static_cast<std::size_t>(k)] += row[static_cast<std::size_t>(k)];
    }
  }
  for (double& v : stats.mu) v /= static_cast<double>(n);
  stats.cov.assign(static_cast<std::size_t>(d * d), 0.0);
  for (const auto& row : embeddings) {
    for (std::int64_t r = 0; r < d; ++r) {
      const double dr = row[static_cast<std::size_t>(r)] -
                        stats.mu[static_cast<std::size_t>(r)];
      for (std::int64_t c = 0; c < d; ++c) {
        const double dc = row[static_cast<std::size_t>(c)] -
                          stats.mu[static_cast<std::size_t>(c)];
        stats.cov[static_cast<std::size_t>(r * d + c)] += dr * dc;
      }
    }
  }
  for (double& v : stats.cov) v /= static_cast<double>(n - 1);
  return stats;
}

double fsd(const SpeakerStats& a, const SpeakerStats& b) {
  const std::int64_t d = a.dim();
  if (d < 1) throw InputError("stats are empty");
  if (b.dim() != d) {
    throw ShapeError("stats dimensions differ: " + std::to_string(d) +
                     " vs " + std::to_string(b.dim()));
  }
  if (a.cov.size() != static_cast<std::size_t>(d * d) ||
      b.cov.size() != static_cast<std::size_t>(d * d)) {
    throw ShapeError("covariance size does not match the mean dimension");
  }

  Eigen::Map<const EMatrix> ca_raw(a.cov.data(), d, d);
  Eigen::Map<const EMatrix> cb_raw(b.cov.data(), d, d);
  EMatrix ca = 0.5 * (ca_raw + ca_raw.transpose());
  EMatrix cb = 0.5 * (cb_raw + cb_raw.transpose());

  Eigen::SelfAdjointEigenSolver<EMatrix> eig_a(ca);
  if (eig_a.info() != Eigen::Success) {
    throw NumericError("eigendecomposition of the first covariance failed");
  }
  Eigen::VectorXd lam = eig_a.eigenvalues();
  const double scale_a = std::max(1.0, lam.cwiseAbs().maxCoeff());
  for (std::int64_t k = 0; k < d; ++k) {
    if (lam[k] < -1e-8 * scale_a) {
      throw DomainError("first covariance is not PSD: eigenvalue " +
                        std::to_string(lam[k]));
    }
    lam[k] = std::sqrt(std::max(0.0, lam[k]));
  }
  const EMatrix sqrt_a = eig_a.eigenvectors() * lam.asDiagonal() *
                         eig_a.eigenvectors().transpose();

  Eigen::SelfAdjointEigenSolver<EMatrix> eig_b(cb);
  if (eig_b.info() != Eigen::Success) {
    throw NumericError("eigendecomposition of the second covariance failed");
  }
  const double scale_b =
      std::max(1.0, eig_b.eigenvalues().cwiseAbs().maxCoeff());
  if (eig_b.eigenvalues().minCoeff() < -1e-8 * scale_b) {
    throw DomainError("second covariance is not PSD: eigenvalue " +
                      std::to_string(eig_b.eigenvalues().minCoeff()));
  }

  EMatrix inner = sqrt_a * cb * sqrt_a;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<EMatrix> eig_m(inner);
  if (eig_m.info() != Eigen::Success) {
    throw NumericError("eigendecomposition of the product term failed");
  }
  double trace_sqrt = 0.0;
  for (std::int64_t k = 0; k < d; ++k) {
    trace_sqrt += std::sqrt(std::max(0.0, eig_m.eigenvalues()[k]));
  }

  double mean_term = 0.0;
  for (std::int64_t k = 0; k < d; ++k) {
    const double diff = a.mu[static_cast<std::size_t>(k)] -
                        b.mu[static_cast<std::size_t>(k)];
    mean_term += diff * diff;
  }
  const double value = mean_term + ca.trace() + cb.trace() - 2.0 * trace_sqrt;
  if (value < -1e-6) {
    throw NumericError("distance came out negative beyond tolerance: " +
                       std::to_string(value));
  }
  return std::max(0.0, value);
}

}  // namespace difftts
