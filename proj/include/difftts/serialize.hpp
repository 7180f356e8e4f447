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

#ifndef DIFFTTS_SERIALIZE_HPP
#define DIFFTTS_SERIALIZE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "difftts/tensor.hpp"

namespace difftts {

// One persisted array. Values are held as double in memory; the width
// field records the on-disk element size (4 or 8 bytes) so float32
// training state round-trips bit-exactly.
struct NamedArray {
  std::string name;
  Shape shape;
  std::vector<double> data;
  int width = 4;
};

// Checkpoint container: versioned, self-describing, single file.
// Layout: magic, format version, config hash, step count, then
// length-prefixed sections (config JSON, RNG state, extra JSON,
// parameter table, optimizer table).
struct Checkpoint {
  std::uint32_t version = 1;
  std::uint64_t config_hash = 0;
  std::uint64_t step = 0;
  std::string config_json;
  std::string rng_state;
  std::string extra_json;
  std::vector<NamedArray> params;
  std::vector<NamedArray> opt;
};

// Writes to a temporary file in the same directory, then renames.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);

// Reads and validates the whole file before returning, so a corrupt
// checkpoint never yields partial state.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace difftts

#endif  // DIFFTTS_SERIALIZE_HPP
