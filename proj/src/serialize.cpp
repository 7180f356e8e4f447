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

#include "difftts/serialize.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace difftts {

namespace {

constexpr char kMagic[8] = {'D', 'T', 'T', 'S', 'C', 'K', 'P', 'T'};

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void put_str(std::ostream& os, const std::string& s) {
  put_u64(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw IoError("checkpoint: truncated file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw IoError("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

std::string get_str(std::istream& is) {
  const auto n = get_u64(is);
  if (n > (1ULL << 32)) throw IoError("checkpoint: absurd string length");
  std::string s(static_cast<std::size_t>(n), '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  if (!is) throw IoError("checkpoint: truncated file");
  return s;
}

void put_array(std::ostream& os, const NamedArray& a) {
  put_str(os, a.name);
  put_u32(os, static_cast<std::uint32_t>(a.width));
  put_u32(os, static_cast<std::uint32_t>(a.shape.size()));
  for (auto d : a.shape) put_u64(os, static_cast<std::uint64_t>(d));
  if (a.width == 4) {
    std::vector<float> tmp(a.data.begin(), a.data.end());
    os.write(reinterpret_cast<const char*>(tmp.data()),
             static_cast<std::streamsize>(tmp.size() * 4));
  } else if (a.width == 8) {
    os.write(reinterpret_cast<const char*>(a.data.data()),
             static_cast<std::streamsize>(a.data.size() * 8));
  } else {
    throw IoError("checkpoint: unsupported element width");
  }
}

NamedArray get_array(std::istream& is) {
  NamedArray a;
  a.name = get_str(is);
  a.width = static_cast<int>(get_u32(is));
  if (a.width != 4 && a.width != 8)
    throw IoError("checkpoint: unsupported element width");
  const auto rank = get_u32(is);
  if (rank > 8) throw IoError("checkpoint: absurd tensor rank");
  a.shape.resize(rank);
  std::int64_t numel = 1;
  for (auto& d : a.shape) {
    d = static_cast<std::int64_t>(get_u64(is));
    if (d < 0 || d > (1LL << 40)) throw IoError("checkpoint: bad dimension");
    numel *= d;
  }
  a.data.resize(static_cast<std::size_t>(numel));
  if (a.width == 4) {
    std::vector<float> tmp(static_cast<std::size_t>(numel));
    is.read(reinterpret_cast<char*>(tmp.data()),
            static_cast<std::streamsize>(tmp.size() * 4));
    if (!is) throw IoError("checkpoint: truncated tensor data");
    std::copy(tmp.begin(), tmp.end(), a.data.begin());
  } else {
    is.read(reinterpret_cast<char*>(a.data.data()),
            static_cast<std::streamsize>(a.data.size() * 8));
    if (!is) throw IoError("checkpoint: truncated tensor data");
  }
  return a;
}

void put_table(std::ostream& os, const std::vector<NamedArray>& t) {
  put_u32(os, static_cast<std::uint32_t>(t.size()));
  for (const auto& a : t) put_array(os, a);
}

std::vector<NamedArray> get_table(std::istream& is) {
  const auto n = get_u32(is);
  if (n > 1000000) throw IoError("checkpoint: absurd table size");
  std::vector<NamedArray> t;
  t.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) t.push_back(get_array(is));
  return t;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("checkpoint: cannot open for write: " + tmp.string());
    os.write(kMagic, 8);
    put_u32(os, ckpt.version);
    put_u64(os, ckpt.config_hash);
    put_u64(os, ckpt.step);
    put_str(os, ckpt.config_json);
    put_str(os, ckpt.rng_state);
    put_str(os, ckpt.extra_json);
    put_table(os, ckpt.params);
    put_table(os, ckpt.opt);
    os.flush();
    if (!os) throw IoError("checkpoint: write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec)
    throw IoError("checkpoint: rename failed: " + tmp.string() + " -> " +
                  target.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("checkpoint: cannot open: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw IoError("checkpoint: bad magic in " + path);
  Checkpoint c;
  c.version = get_u32(is);
  if (c.version != 1)
    throw IoError("checkpoint: unsupported version " +
                  std::to_string(c.version));
  c.config_hash = get_u64(is);
  c.step = get_u64(is);
  c.config_json = get_str(is);
  c.rng_state = get_str(is);
  c.extra_json = get_str(is);
  c.params = get_table(is);
  c.opt = get_table(is);
  is.peek();
  if (!is.eof()) throw IoError("checkpoint: trailing bytes in " + path);
  return c;
}

}  // namespace difftts
