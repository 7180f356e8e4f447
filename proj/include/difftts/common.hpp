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

#ifndef DIFFTTS_COMMON_HPP
#define DIFFTTS_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace difftts {

// Error taxonomy. Anything user-caused (bad flags, bad files, bad input
// data) derives from UsageError so the CLI can map it to exit code 2;
// everything else maps to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

// Invalid argument values (out-of-range scalars, bad step counts).
class ParamError : public UsageError {
 public:
  using UsageError::UsageError;
};

// Mismatched array lengths / indivisible lengths.
class ShapeError : public UsageError {
 public:
  using UsageError::UsageError;
};

// Mathematically undefined request (division by zero, non-PSD matrix).
class DomainError : public UsageError {
 public:
  using UsageError::UsageError;
};

// Bad user input content (empty text, degenerate masks).
class InputError : public UsageError {
 public:
  using UsageError::UsageError;
};

// Missing or inconsistent configuration (unknown backend, hash mismatch).
class ConfigError : public UsageError {
 public:
  using UsageError::UsageError;
};

// Rejected records during dataset ingestion.
class IngestError : public UsageError {
 public:
  using UsageError::UsageError;
};

// File system / file format failures.
class IoError : public UsageError {
 public:
  using UsageError::UsageError;
};

// Internal numeric failure (non-finite loss). Not a usage error.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Deterministic random source. Wraps std::mt19937_64 but generates
// uniforms and normals with explicit arithmetic so that sequences are
// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller. No cached second value so the
  // engine state alone captures the generator state.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Uniform integer in [0, n).
  std::uint64_t integer(std::uint64_t n) {
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  std::string state() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  void set_state(const std::string& s) {
    std::istringstream is(s);
    is >> engine_;
    if (!is) throw IoError("invalid RNG state string");
  }

 private:
  std::mt19937_64 engine_;
};

// FNV-1a 64-bit. Used for config hashes persisted in checkpoints and
// sidecar metadata; stable across platforms.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v);

}  // namespace difftts

#endif  // DIFFTTS_COMMON_HPP
