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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include <doctest.h>

#include "difftts/common.hpp"

namespace {

using namespace difftts;

void push_u32(std::vector<unsigned char>& b, std::uint32_t v) {
  b.push_back(static_cast<unsigned char>(v));
  b.push_back(static_cast<unsigned char>(v >> 8));
  b.push_back(static_cast<unsigned char>(v >> 16));
  b.push_back(static_cast<unsigned char>(v >> 24));
}

void push_u16(std::vector<unsigned char>& b, std::uint16_t v) {
  b.push_back(static_cast<unsigned char>(v));
  b.push_back(static_cast<unsigned char>(v >> 8));
}

void push_tag(std::vector<unsigned char>& b, const char* tag) {
  b.insert(b.end(), tag, tag + 4);
}

std::vector<unsigned char> wav_bytes(int channels, int bits, int rate,
                                     int format,
                                     const std::vector<std::int16_t>& pcm) {
  std::vector<unsigned char> b;
  push_tag(b, "RIFF");
  push_u32(b, 0);  // patched below
  push_tag(b, "WAVE");
  push_tag(b, "fmt ");
  push_u32(b, 16);
  push_u16(b, static_cast<std::uint16_t>(format));
  push_u16(b, static_cast<std::uint16_t>(channels));
  push_u32(b, static_cast<std::uint32_t>(rate));
  push_u32(b, static_cast<std::uint32_t>(rate * channels * bits / 8));
  push_u16(b, static_cast<std::uint16_t>(channels * bits / 8));
  push_u16(b, static_cast<std::uint16_t>(bits));
  push_tag(b, "data");
  push_u32(b, static_cast<std::uint32_t>(pcm.size() * 2));
  for (auto s : pcm) push_u16(b, static_cast<std::uint16_t>(s));
  const std::uint32_t riff = static_cast<std::uint32_t>(b.size() - 8);
  b[4] = static_cast<unsigned char>(riff);
  b[5] = static_cast<unsigned char>(riff >> 8);
  b[6] = static_cast<unsigned char>(riff >> 16);
  b[7] = static_cast<unsigned char>(riff >> 24);
  return b;
}

void dump(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream os(path, std::ios::binary);
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
}

std::vector<double> sine(double freq, int rate, std::size_t n,
                         double amp = 0.5) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = amp * std::sin(2.0 * std::numbers::pi * freq *
                          static_cast<double>(i) / rate);
  return x;
}

double zero_cross_freq(const std::vector<double>& x, int rate,
                       std::size_t skip) {
  std::size_t crossings = 0;
  for (std::size_t i = skip + 1; i + skip < x.size(); ++i)
    if ((x[i - 1] < 0.0) != (x[i] < 0.0)) ++crossings;
  const double seconds =
      static_cast<double>(x.size() - 2 * skip) / static_cast<double>(rate);
  return static_cast<double>(crossings) / (2.0 * seconds);
}

TEST_CASE("wav round trip stays within quantization error") {
  const auto x = sine(440.0, 16000, 1600, 0.8);
  const std::string path = "audio_roundtrip.wav";
  write_wav(path, x, 16000);
  const auto back = read_wav(path);
  std::filesystem::remove(path);

  CHECK(back.sample_rate == 16000);
  REQUIRE(back.samples.size() == x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(std::fabs(back.samples[i] - x[i]) <= 1.0 / 16384.0);
}

TEST_CASE("wav writer clamps out-of-range samples") {
  const std::vector<double> x = {2.0, -3.0, 0.0};
  const std::string path = "audio_clamp.wav";
  write_wav(path, x, 8000);
  const auto back = read_wav(path);
  std::filesystem::remove(path);
  CHECK(back.samples[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(back.samples[1] == doctest::Approx(-1.0).epsilon(1e-3));
  CHECK(back.samples[2] == 0.0);

  CHECK_THROWS_AS(write_wav("audio_bad_rate.wav", x, 0), ParamError);
}

TEST_CASE("wav reader rejects unsupported formats by name") {
  const std::vector<std::int16_t> pcm = {0, 1000, -1000, 0};

  auto expect_reject = [&](const std::string& path,
                           const std::vector<unsigned char>& bytes) {
    dump(path, bytes);
    try {
      read_wav(path);
      FAIL("expected IngestError for ", path);
    } catch (const IngestError& e) {
      CHECK(std::string(e.what()).find(path) != std::string::npos);
    }
    std::filesystem::remove(path);
  };

  expect_reject("audio_stereo.wav", wav_bytes(2, 16, 8000, 1, pcm));
  expect_reject("audio_8bit.wav", wav_bytes(1, 8, 8000, 1, pcm));
  expect_reject("audio_float.wav", wav_bytes(1, 16, 8000, 3, pcm));

  auto not_riff = wav_bytes(1, 16, 8000, 1, pcm);
  not_riff[0] = 'X';
  expect_reject("audio_not_riff.wav", not_riff);

  auto truncated = wav_bytes(1, 16, 8000, 1, pcm);
  truncated.resize(truncated.size() - 3);
  expect_reject("audio_truncated.wav", truncated);

  std::vector<unsigned char> no_data;
  push_tag(no_data, "RIFF");
  push_u32(no_data, 4);
  push_tag(no_data, "WAVE");
  expect_reject("audio_no_data.wav", no_data);

  try {
    read_wav("audio_missing_file.wav");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("audio_missing_file.wav") !=
          std::string::npos);
  }
}

TEST_CASE("wav reader skips padded junk chunks") {
  const std::vector<std::int16_t> pcm = {100, -100, 200};
  auto good = wav_bytes(1, 16, 8000, 1, pcm);
  // Splice an odd-length chunk between WAVE and fmt.
  std::vector<unsigned char> b(good.begin(), good.begin() + 12);
  push_tag(b, "junk");
  push_u32(b, 3);
  b.push_back(1);
  b.push_back(2);
  b.push_back(3);
  b.push_back(0);  // pad byte
  b.insert(b.end(), good.begin() + 12, good.end());
  const std::uint32_t riff = static_cast<std::uint32_t>(b.size() - 8);
  b[4] = static_cast<unsigned char>(riff);
  b[5] = static_cast<unsigned char>(riff >> 8);
  b[6] = static_cast<unsigned char>(riff >> 16);
  b[7] = static_cast<unsigned char>(riff >> 24);

  const std::string path = "audio_junk_chunk.wav";
  dump(path, b);
  const auto back = read_wav(path);
  std::filesystem::remove(path);
  REQUIRE(back.samples.size() == 3);
  CHECK(back.samples[0] == doctest::Approx(100.0 / 32768.0));
  CHECK(back.samples[2] == doctest::Approx(200.0 / 32768.0));
}

TEST_CASE("resample preserves tone frequency and level") {
  const auto x = sine(440.0, 16000, 8000, 0.5);
  const auto y = resample(x, 16000, 8000);
  CHECK(y.size() == 4000);

  CHECK(zero_cross_freq(y, 8000, 100) == doctest::Approx(440.0).epsilon(0.01));

  double rms = 0;
  for (std::size_t i = 100; i + 100 < y.size(); ++i) rms += y[i] * y[i];
  rms = std::sqrt(rms / static_cast<double>(y.size() - 200));
  CHECK(rms == doctest::Approx(0.5 / std::sqrt(2.0)).epsilon(0.02));
}

TEST_CASE("resample up and back reconstructs the interior") {
  const auto x = sine(300.0, 8000, 4000, 0.4);
  const auto up = resample(x, 8000, 16000);
  const auto back = resample(up, 16000, 8000);
  REQUIRE(back.size() >= x.size());
  double err = 0;
  std::size_t n = 0;
  for (std::size_t i = 200; i + 200 < x.size(); ++i, ++n) {
    const double d = back[i] - x[i];
    err += d * d;
  }
  CHECK(std::sqrt(err / static_cast<double>(n)) < 1e-3);
}

TEST_CASE("resample edge cases") {
  const std::vector<double> x = {0.1, 0.2, 0.3};
  const auto same = resample(x, 8000, 8000);
  CHECK(same == x);

  const std::vector<double> empty;
  CHECK(resample(empty, 8000, 16000).empty());

  CHECK_THROWS_AS(resample(x, 0, 8000), ParamError);
  CHECK_THROWS_AS(resample(x, 8000, -1), ParamError);
}

}  // namespace
