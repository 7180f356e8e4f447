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

#include "difftts/text_frontend.hpp"

#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <unordered_map>

#include "difftts/serialize.hpp"
#include "json.hpp"

namespace difftts {

namespace {

constexpr const char* kCharset = "abcdefghijklmnopqrstuvwxyz0123456789 '-.,?!";

using nlohmann::json;

template <class S>
Tensor<S> layer_norm_rows(const Tensor<S>& x, const Tensor<S>& g,
                          const Tensor<S>& b) {
  auto x3 = ops::reshape(x, Shape{x.dim(0), x.dim(1), std::int64_t(1)});
  auto y = ops::group_norm(x3, g, b, 1, 1e-5);
  return ops::reshape(y, x.shape());
}

}  // namespace

std::string normalize_text(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool in_space = true;  // leading whitespace dropped
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      if (!in_space) out.push_back(' ');
      in_space = true;
    } else {
      out.push_back(static_cast<char>(std::tolower(c)));
      in_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

TokenSequence CharTokenizer::tokenize(const std::string& text,
                                      std::int64_t length_max) const {
  const std::string norm = normalize_text(text);
  if (norm.empty()) throw InputError("tokenize: empty text");
  const std::string_view cs(kCharset);
  TokenSequence seq;
  for (char c : norm) {
    const auto pos = cs.find(c);
    seq.ids.push_back(pos == std::string_view::npos
                          ? 0
                          : static_cast<std::int64_t>(pos) + 1);
  }
  if (static_cast<std::int64_t>(seq.ids.size()) > length_max) {
    seq.ids.resize(static_cast<std::size_t>(length_max));
    seq.truncated = true;
  }
  return seq;
}

std::int64_t CharTokenizer::vocab_size() const {
  return static_cast<std::int64_t>(std::string_view(kCharset).size()) + 1;
}

WordPieceTokenizer::WordPieceTokenizer(const std::string& vocab_path) {
  std::ifstream is(vocab_path);
  if (!is) throw ConfigError("tokenizer vocabulary not found: " + vocab_path);
  std::string line;
  while (std::getline(is, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
      line.pop_back();
    if (line.empty()) continue;
    if (line == "[UNK]") unk_ = static_cast<std::int64_t>(pieces_.size());
    pieces_.push_back(line);
  }
  if (pieces_.empty())
    throw ConfigError("tokenizer vocabulary is empty: " + vocab_path);
  if (unk_ < 0)
    throw ConfigError("tokenizer vocabulary lacks [UNK]: " + vocab_path);
  for (std::size_t i = 0; i < pieces_.size(); ++i)
    lut_.emplace(pieces_[i], static_cast<std::int64_t>(i));
}

std::int64_t WordPieceTokenizer::id_of(const std::string& piece) const {
  auto it = lut_.find(piece);
  return it == lut_.end() ? -1 : it->second;
}

TokenSequence WordPieceTokenizer::tokenize(const std::string& text,
                                           std::int64_t length_max) const {
  const std::string norm = normalize_text(text);
  if (norm.empty()) throw InputError("tokenize: empty text");
  TokenSequence seq;
  std::size_t w0 = 0;
  while (w0 < norm.size()) {
    std::size_t w1 = norm.find(' ', w0);
    if (w1 == std::string::npos) w1 = norm.size();
    const std::string word = norm.substr(w0, w1 - w0);
    w0 = w1 + 1;
    if (word.empty()) continue;

    std::vector<std::int64_t> word_ids;
    std::size_t at = 0;
    bool failed = false;
    while (at < word.size()) {
      std::size_t end = word.size();
      std::int64_t match = -1;
      while (end > at) {
        std::string piece = word.substr(at, end - at);
        if (at > 0) piece = "##" + piece;
        auto it = lut_.find(piece);
        if (it != lut_.end()) {
          match = it->second;
          break;
        }
        --end;
      }
      if (match < 0) {
        failed = true;
        break;
      }
      word_ids.push_back(match);
      at = end;
    }
    if (failed)
      seq.ids.push_back(unk_);
    else
      seq.ids.insert(seq.ids.end(), word_ids.begin(), word_ids.end());
  }
  if (seq.ids.empty()) throw InputError("tokenize: no tokens produced");
  if (static_cast<std::int64_t>(seq.ids.size()) > length_max) {
    seq.ids.resize(static_cast<std::size_t>(length_max));
    seq.truncated = true;
  }
  return seq;
}

std::int64_t WordPieceTokenizer::vocab_size() const {
  return static_cast<std::int64_t>(pieces_.size());
}

template <class S>
std::string TransformerTextEncoder<S>::Config::to_json() const {
  json j;
  j["vocab_size"] = vocab_size;
  j["d_model"] = d_model;
  j["n_layers"] = n_layers;
  j["n_heads"] = n_heads;
  j["d_ff"] = d_ff;
  j["trainable"] = trainable;
  return j.dump();
}

template <class S>
typename TransformerTextEncoder<S>::Config
TransformerTextEncoder<S>::Config::from_json(const std::string& text) {
  json j = json::parse(text);
  Config c;
  c.vocab_size = j.at("vocab_size").get<std::int64_t>();
  c.d_model = j.at("d_model").get<std::int64_t>();
  c.n_layers = j.at("n_layers").get<std::int64_t>();
  c.n_heads = j.at("n_heads").get<std::int64_t>();
  c.d_ff = j.at("d_ff").get<std::int64_t>();
  c.trainable = j.at("trainable").get<bool>();
  return c;
}

template <class S>
void TransformerTextEncoder<S>::Config::validate() const {
  if (vocab_size < 1) throw ConfigError("text encoder: vocab_size < 1");
  if (d_model < 1 || n_layers < 0 || n_heads < 1 || d_ff < 1)
    throw ConfigError("text encoder: non-positive dimension");
  if (d_model % n_heads != 0)
    throw ConfigError("text encoder: heads must divide d_model");
}

template <class S>
TransformerTextEncoder<S>::TransformerTextEncoder(const Config& cfg, Rng& rng)
    : cfg_(cfg) {
  cfg_.validate();
  const auto d = cfg_.d_model;
  auto push = [&](const std::string& name, Shape shape, double stdev) {
    auto t = stdev > 0 ? Tensor<S>::randn(shape, rng, static_cast<S>(stdev))
                       : Tensor<S>::zeros(shape);
    tensors_.emplace_back(name, std::move(t));
  };
  auto ones = [&](const std::string& name, Shape shape) {
    tensors_.emplace_back(name, Tensor<S>::full(shape, S(1)));
  };
  push("emb", {cfg_.vocab_size, d}, 1.0 / std::sqrt(double(d)));
  for (std::int64_t i = 0; i < cfg_.n_layers; ++i) {
    const std::string p = "l" + std::to_string(i) + ".";
    ones(p + "ln1.g", {d});
    push(p + "ln1.b", {d}, 0);
    for (const char* w : {"wq", "wk", "wv", "wo"})
      push(p + w, {d, d}, 1.0 / std::sqrt(double(d)));
    for (const char* b : {"bq", "bk", "bv", "bo"}) push(p + b, {d}, 0);
    ones(p + "ln2.g", {d});
    push(p + "ln2.b", {d}, 0);
    push(p + "w1", {cfg_.d_ff, d}, 1.0 / std::sqrt(double(d)));
    push(p + "b1", {cfg_.d_ff}, 0);
    push(p + "w2", {d, cfg_.d_ff}, 1.0 / std::sqrt(double(cfg_.d_ff)));
    push(p + "b2", {d}, 0);
  }
  ones("ln.g", {d});
  push("ln.b", {d}, 0);
  if (cfg_.trainable)
    for (auto& [name, t] : tensors_) t.set_requires_grad(true);
}

template <class S>
std::vector<std::pair<std::string, Tensor<S>>>
TransformerTextEncoder<S>::parameters() {
  if (!cfg_.trainable) return {};
  return tensors_;
}

template <class S>
void TransformerTextEncoder<S>::save(const std::string& path) const {
  Checkpoint ckpt;
  ckpt.config_json = cfg_.to_json();
  ckpt.config_hash = fnv1a64(ckpt.config_json);
  for (const auto& [name, t] : tensors_) {
    NamedArray a;
    a.name = name;
    a.shape = t.shape();
    a.data.assign(t.values().begin(), t.values().end());
    a.width = sizeof(S) == 4 ? 4 : 8;
    ckpt.params.push_back(std::move(a));
  }
  save_checkpoint(path, ckpt);
}

template <class S>
std::unique_ptr<TransformerTextEncoder<S>> TransformerTextEncoder<S>::load(
    const std::string& path) {
  Checkpoint ckpt = load_checkpoint(path);
  Config cfg = Config::from_json(ckpt.config_json);
  // Loaded adapters act as frozen pretrained encoders.
  cfg.trainable = false;
  Rng dummy(0);
  auto enc = std::make_unique<TransformerTextEncoder<S>>(cfg, dummy);
  std::unordered_map<std::string, const NamedArray*> by_name;
  for (const auto& a : ckpt.params) by_name[a.name] = &a;
  for (auto& [name, t] : enc->tensors_) {
    auto it = by_name.find(name);
    if (it == by_name.end())
      throw IoError("text encoder checkpoint missing tensor: " + name);
    const NamedArray& a = *it->second;
    if (a.shape != t.shape())
      throw IoError("text encoder checkpoint shape mismatch: " + name);
    auto& v = t.values();
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = static_cast<S>(a.data[i]);
  }
  return enc;
}

template <class S>
TextEncoding<S> TransformerTextEncoder<S>::encode(const TokenSequence& tokens,
                                                  std::int64_t length_max) {
  if (cfg_.trainable) return run(tokens, length_max);
  autograd::NoGradGuard guard;
  return run(tokens, length_max);
}

template <class S>
TextEncoding<S> TransformerTextEncoder<S>::run(const TokenSequence& tokens,
                                               std::int64_t length_max) {
  const auto n = static_cast<std::int64_t>(tokens.ids.size());
  if (n < 1) throw InputError("encode_text: empty token sequence");
  if (n > length_max) throw ShapeError("encode_text: tokens exceed length_max");
  const auto d = cfg_.d_model;
  const auto v = cfg_.vocab_size;
  for (auto id : tokens.ids)
    if (id < 0 || id >= v)
      throw InputError("encode_text: token id out of vocabulary range");

  auto find = [&](const std::string& name) -> Tensor<S>& {
    for (auto& [k, t] : tensors_)
      if (k == name) return t;
    throw Error("text encoder: missing tensor " + name);
  };

  // Embedding lookup as one-hot matmul so gradients reach the table.
  std::vector<S> oh(static_cast<std::size_t>(n * v), S(0));
  for (std::int64_t t = 0; t < n; ++t)
    oh[t * v + tokens.ids[static_cast<std::size_t>(t)]] = S(1);
  auto h = ops::matmul(Tensor<S>::from_vector(Shape{n, v}, std::move(oh)),
                       find("emb"));
  h = ops::add(h, ops::positional_rows<S>(n, d));

  const auto heads = cfg_.n_heads;
  const auto dh = d / heads;
  const S scale = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dh)));
  for (std::int64_t i = 0; i < cfg_.n_layers; ++i) {
    const std::string p = "l" + std::to_string(i) + ".";
    auto a = layer_norm_rows(h, find(p + "ln1.g"), find(p + "ln1.b"));
    auto q = ops::linear(a, find(p + "wq"), find(p + "bq"));
    auto k = ops::linear(a, find(p + "wk"), find(p + "bk"));
    auto vv = ops::linear(a, find(p + "wv"), find(p + "bv"));
    std::vector<Tensor<S>> ctx;
    for (std::int64_t hd = 0; hd < heads; ++hd) {
      auto qh = ops::slice_cols(q, hd * dh, (hd + 1) * dh);
      auto kh = ops::slice_cols(k, hd * dh, (hd + 1) * dh);
      auto vh = ops::slice_cols(vv, hd * dh, (hd + 1) * dh);
      auto att = ops::softmax_rows(
          ops::mul_scalar(ops::matmul(qh, ops::transpose2d(kh)), scale));
      ctx.push_back(ops::matmul(att, vh));
    }
    h = ops::add(h, ops::linear(ops::concat_cols(ctx), find(p + "wo"),
                                find(p + "bo")));
    auto f = layer_norm_rows(h, find(p + "ln2.g"), find(p + "ln2.b"));
    f = ops::silu(ops::linear(f, find(p + "w1"), find(p + "b1")));
    h = ops::add(h, ops::linear(f, find(p + "w2"), find(p + "b2")));
  }
  h = layer_norm_rows(h, find("ln.g"), find("ln.b"));

  if (n < length_max) {
    auto ht = ops::transpose2d(h);
    auto pad = Tensor<S>::zeros(Shape{d, length_max - n});
    h = ops::transpose2d(ops::concat_cols<S>({ht, pad}));
  }
  TextEncoding<S> enc;
  enc.vectors = h;
  enc.mask.assign(static_cast<std::size_t>(length_max), 0);
  for (std::int64_t t = 0; t < n; ++t)
    enc.mask[static_cast<std::size_t>(t)] = 1;
  return enc;
}

std::string FrontendSpec::to_json() const {
  json j;
  j["backend"] = backend;
  j["weights_path"] = weights_path;
  j["vocab_path"] = vocab_path;
  j["length_max"] = length_max;
  j["toy_d_model"] = toy_d_model;
  j["toy_layers"] = toy_layers;
  j["toy_heads"] = toy_heads;
  j["toy_ff"] = toy_ff;
  return j.dump();
}

FrontendSpec FrontendSpec::from_json(const std::string& text) {
  json j = json::parse(text);
  FrontendSpec s;
  s.backend = j.value("backend", s.backend);
  s.weights_path = j.value("weights_path", s.weights_path);
  s.vocab_path = j.value("vocab_path", s.vocab_path);
  s.length_max = j.value("length_max", s.length_max);
  s.toy_d_model = j.value("toy_d_model", s.toy_d_model);
  s.toy_layers = j.value("toy_layers", s.toy_layers);
  s.toy_heads = j.value("toy_heads", s.toy_heads);
  s.toy_ff = j.value("toy_ff", s.toy_ff);
  return s;
}

template <class S>
Frontend<S> make_frontend(const FrontendSpec& spec, Rng& rng) {
  Frontend<S> f;
  f.length_max = spec.length_max;
  if (spec.length_max < 1)
    throw ConfigError("frontend: length_max must be positive");
  if (spec.backend == "toy-char") {
    auto tok = std::make_unique<CharTokenizer>();
    typename TransformerTextEncoder<S>::Config cfg;
    cfg.vocab_size = tok->vocab_size();
    cfg.d_model = spec.toy_d_model;
    cfg.n_layers = spec.toy_layers;
    cfg.n_heads = spec.toy_heads;
    cfg.d_ff = spec.toy_ff;
    cfg.trainable = true;
    f.tokenizer = std::move(tok);
    f.encoder = std::make_unique<TransformerTextEncoder<S>>(cfg, rng);
    return f;
  }
  if (spec.vocab_path.empty() || !std::filesystem::exists(spec.vocab_path))
    throw ConfigError("text encoder backend '" + spec.backend +
                      "' unavailable: vocabulary file not found at '" +
                      spec.vocab_path + "'");
  if (spec.weights_path.empty() || !std::filesystem::exists(spec.weights_path))
    throw ConfigError("text encoder backend '" + spec.backend +
                      "' unavailable: weights file not found at '" +
                      spec.weights_path + "'");
  auto tok = std::make_unique<WordPieceTokenizer>(spec.vocab_path);
  auto enc = TransformerTextEncoder<S>::load(spec.weights_path);
  if (enc->config().vocab_size != tok->vocab_size())
    throw ConfigError("text encoder backend '" + spec.backend +
                      "': vocabulary size " + std::to_string(tok->vocab_size()) +
                      " does not match checkpoint " +
                      std::to_string(enc->config().vocab_size));
  f.tokenizer = std::move(tok);
  f.encoder = std::move(enc);
  return f;
}

template class TransformerTextEncoder<float>;
template class TransformerTextEncoder<double>;
template Frontend<float> make_frontend<float>(const FrontendSpec&, Rng&);
template Frontend<double> make_frontend<double>(const FrontendSpec&, Rng&);

}  // namespace difftts
