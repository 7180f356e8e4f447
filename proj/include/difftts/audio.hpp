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

#ifndef DIFFTTS_AUDIO_HPP
#define DIFFTTS_AUDIO_HPP

#include <span>
#include <string>
#include <vector>

namespace difftts {

struct AudioBuffer {
  std::vector<double> samples;  // amplitude in [-1, 1] nominal
  int sample_rate = 0;
};

// 16-bit PCM mono WAV only; anything else is rejected with the file
// name in the message.
AudioBuffer read_wav(const std::string& path);

void write_wav(const std::string& path, std::span<const double> samples,
               int sample_rate);

// Kaiser-windowed sinc resampler.
std::vector<double> resample(std::span<const double> x, int from_rate,
                             int to_rate);

}  // namespace difftts

#endif  // DIFFTTS_AUDIO_HPP
