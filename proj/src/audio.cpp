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

#include "difftts/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>

#include "difftts/common.hpp"

namespace difftts {

namespace {

std::uint32_t rd_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (std::uint32_t(p[1]) << 8) |
         (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}

std::uint16_t rd_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void wr_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void wr_u16(std::ostream& os, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8)};
  os.write(reinterpret_cast<const char*>(b), 2);
}

double i0(double x) {
  // Modified Bessel function of the first kind, order zero; power
  // series converges quickly for the beta values used here.
  double sum = 1.0, term = 1.0;
  for (int k = 1; k < 64; ++k) {
    term *= (x / (2.0 * k)) * (x / (2.0 * k));
    sum += term;
    if (term < 1e-16 * sum) break;
  }
  return sum;
}

}  // namespace

AudioBuffer read_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("wav: cannot open: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw IngestError("wav: not a RIFF/WAVE file: " + path);

  int sample_rate = 0;
  int channels = 0;
  int bits = 0;
  int format = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;

  std::size_t at = 12;
  while (at + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + at);
    const std::uint32_t len = rd_u32(bytes.data() + at + 4);
    const std::size_t body = at + 8;
    if (body + len > bytes.size())
      throw IngestError("wav: truncated chunk in " + path);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (len < 16) throw IngestError("wav: short fmt chunk in " + path);
      format = rd_u16(bytes.data() + body);
      channels = rd_u16(bytes.data() + body + 2);
      sample_rate = static_cast<int>(rd_u32(bytes.data() + body + 4));
      bits = rd_u16(bytes.data() + body + 14);
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = len;
    }
    at = body + len + (len & 1);
  }
  if (!data || sample_rate == 0)
    throw IngestError("wav: missing fmt/data chunk in " + path);
  if (format != 1 || bits != 16)
    throw IngestError("wav: only 16-bit PCM supported: " + path);
  if (channels != 1)
    throw IngestError("wav: only mono supported: " + path);

  AudioBuffer out;
  out.sample_rate = sample_rate;
  const std::size_t n = data_len / 2;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int16_t s =
        static_cast<std::int16_t>(data[2 * i] | (data[2 * i + 1] << 8));
    out.samples[i] = static_cast<double>(s) / 32768.0;
  }
  return out;
}

void write_wav(const std::string& path, std::span<const double> samples,
               int sample_rate) {
  if (sample_rate <= 0) throw ParamError("wav: sample rate must be positive");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("wav: cannot open for write: " + path);
  const std::uint32_t data_len =
      static_cast<std::uint32_t>(samples.size() * 2);
  os.write("RIFF", 4);
  wr_u32(os, 36 + data_len);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  wr_u32(os, 16);
  wr_u16(os, 1);  // PCM
  wr_u16(os, 1);  // mono
  wr_u32(os, static_cast<std::uint32_t>(sample_rate));
  wr_u32(os, static_cast<std::uint32_t>(sample_rate) * 2);
  wr_u16(os, 2);
  wr_u16(os, 16);
  os.write("data", 4);
  wr_u32(os, data_len);
  for (double v : samples) {
    const double c = std::clamp(v, -1.0, 1.0);
    const auto s = static_cast<std::int16_t>(std::lround(c * 32767.0));
    wr_u16(os, static_cast<std::uint16_t>(s));
  }
  if (!os) throw IoError("wav: write failed: " + path);
}

std::vector<double> resample(std::span<const double> x, int from_rate,
                             int to_rate) {
  if (from_rate <= 0 || to_rate <= 0)
    throw ParamError("resample: rates must be positive");
  if (from_rate == to_rate) return {x.begin(), x.end()};
  const std::int64_t n_in = static_cast<std::int64_t>(x.size());
  const std::int64_t n_out =
      (n_in * to_rate + from_rate - 1) / from_rate;  // ceil
  std::vector<double> y(static_cast<std::size_t>(n_out), 0.0);
  if (n_in == 0) return y;

  // Anti-alias at 90% of the lower Nyquist; 32 zero crossings,
  // Kaiser beta 8.6 (~90 dB stopband).
  const double ratio = static_cast<double>(to_rate) / from_rate;
  const double cutoff = 0.45 * std::min(1.0, ratio);  // cycles per input sample
  const double beta = 8.6;
  const int half_width =
      static_cast<int>(std::ceil(32.0 / std::min(1.0, ratio)));
  const double inv_i0b = 1.0 / i0(beta);

  for (std::int64_t t = 0; t < n_out; ++t) {
    const double center = static_cast<double>(t) / ratio;
    const std::int64_t lo =
        std::max<std::int64_t>(0, static_cast<std::int64_t>(
                                      std::ceil(center - half_width)));
    const std::int64_t hi = std::min<std::int64_t>(
        n_in - 1, static_cast<std::int64_t>(std::floor(center + half_width)));
    double acc = 0.0, wsum = 0.0;
    for (std::int64_t i = lo; i <= hi; ++i) {
      const double d = static_cast<double>(i) - center;
      const double u = d / half_width;
      const double win = i0(beta * std::sqrt(std::max(0.0, 1.0 - u * u))) *
                         inv_i0b;
      const double a = 2.0 * cutoff * d;
      const double sinc =
          (std::abs(a) < 1e-12)
              ? 1.0
              : std::sin(std::numbers::pi * a) / (std::numbers::pi * a);
      const double w = 2.0 * cutoff * sinc * win;
      acc += w * x[static_cast<std::size_t>(i)];
      wsum += w;
    }
    // wsum is the filter's DC gain at this phase; dividing keeps unity
    // gain for every rate ratio and at the edges.
    y[static_cast<std::size_t>(t)] = (wsum != 0.0) ? acc / wsum : 0.0;
  }
  return y;
}

}  // namespace difftts
