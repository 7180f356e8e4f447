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

#ifndef DIFFTTS_TEXT_FRONTEND_HPP
#define DIFFTTS_TEXT_FRONTEND_HPP

#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "difftts/nn_ops.hpp"
#include "difftts/tensor.hpp"

namespace difftts {

struct TokenSequence {
  std::vector<std::int64_t> ids;
  bool truncated = false;
};

// Lowercases, collapses whitespace runs to single spaces, trims ends.
std::string normalize_text(const std::string& text);

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  // Throws InputError if the normalized text is empty; sets the
  // truncated flag when length_max cuts the sequence.
  virtual TokenSequence tokenize(const std::string& text,
                                 std::int64_t length_max) const = 0;
  virtual std::int64_t vocab_size() const = 0;
};

// Fixed ASCII charset, id 0 reserved for unknown bytes.
class CharTokenizer : public Tokenizer {
 public:
  TokenSequence tokenize(const std::string& text,
                         std::int64_t length_max) const override;
  std::int64_t vocab_size() const override;
};

// Greedy longest-match subword tokenizer over a newline-separated
// vocabulary file; continuation pieces carry the "##" prefix and the
// vocabulary must contain [UNK].
class WordPieceTokenizer : public Tokenizer {
 public:
  explicit WordPieceTokenizer(const std::string& vocab_path);
  TokenSequence tokenize(const std::string& text,
                         std::int64_t length_max) const override;
  std::int64_t vocab_size() const override;
  std::int64_t id_of(const std::string& piece) const;  // -1 if absent

 private:
  std::vector<std::string> pieces_;
  std::unordered_map<std::string, std::int64_t> lut_;
  std::int64_t unk_ = -1;
};

// Encoder memory for cross-attention: vectors is [length_max, d_text]
// with masked rows exactly zero.
template <class S>
struct TextEncoding {
  Tensor<S> vectors;
  std::vector<std::uint8_t> mask;

  std::int64_t length_max() const { return vectors.dim(0); }
  std::int64_t d_text() const { return vectors.dim(1); }
  std::int64_t valid_count() const {
    std::int64_t n = 0;
    for (auto b : mask) n += b ? 1 : 0;
    return n;
  }
};

template <class S>
class TextEncoder {
 public:
  virtual ~TextEncoder() = default;
  virtual TextEncoding<S> encode(const TokenSequence& tokens,
                                 std::int64_t length_max) = 0;
  virtual std::int64_t d_text() const = 0;
  // Empty for frozen backends.
  virtual std::vector<std::pair<std::string, Tensor<S>>> parameters() {
    return {};
  }
};

// Small pre-norm transformer encoder. Doubles as the trainable toy
// backend (random init) and as the frozen pretrained adapter (weights
// loaded from a checkpoint container).
template <class S>
class TransformerTextEncoder : public TextEncoder<S> {
 public:
  struct Config {
    std::int64_t vocab_size = 0;
    std::int64_t d_model = 16;
    std::int64_t n_layers = 1;
    std::int64_t n_heads = 2;
    std::int64_t d_ff = 32;
    bool trainable = true;

    std::string to_json() const;
    static Config from_json(const std::string& json);
    void validate() const;
  };

  TransformerTextEncoder(const Config& cfg, Rng& rng);
  static std::unique_ptr<TransformerTextEncoder> load(
      const std::string& checkpoint_path);
  void save(const std::string& checkpoint_path) const;

  TextEncoding<S> encode(const TokenSequence& tokens,
                         std::int64_t length_max) override;
  std::int64_t d_text() const override { return cfg_.d_model; }
  std::vector<std::pair<std::string, Tensor<S>>> parameters() override;
  std::vector<std::pair<std::string, Tensor<S>>>& named_tensors() {
    return tensors_;
  }
  const Config& config() const { return cfg_; }

 private:
  TextEncoding<S> run(const TokenSequence& tokens, std::int64_t length_max);

  Config cfg_;
  std::vector<std::pair<std::string, Tensor<S>>> tensors_;
};

// Backend selection for the frontend pair (tokenizer + encoder).
struct FrontendSpec {
  std::string backend = "toy-char";  // anything else is a pretrained name
  std::string weights_path;          // required for pretrained backends
  std::string vocab_path;            // required for pretrained backends
  std::int64_t length_max = 64;
  std::int64_t toy_d_model = 16;
  std::int64_t toy_layers = 1;
  std::int64_t toy_heads = 2;
  std::int64_t toy_ff = 32;

  std::string to_json() const;
  static FrontendSpec from_json(const std::string& json);
};

template <class S>
struct Frontend {
  std::unique_ptr<Tokenizer> tokenizer;
  std::unique_ptr<TextEncoder<S>> encoder;
  std::int64_t length_max = 64;

  TokenSequence tokenize(const std::string& text) const {
    return tokenizer->tokenize(text, length_max);
  }
  TextEncoding<S> encode_text(const TokenSequence& tokens) {
    return encoder->encode(tokens, length_max);
  }
  TextEncoding<S> encode_text(const std::string& text) {
    return encode_text(tokenize(text));
  }
};

template <class S>
Frontend<S> make_frontend(const FrontendSpec& spec, Rng& rng);

extern template class TransformerTextEncoder<float>;
extern template class TransformerTextEncoder<double>;
extern template Frontend<float> make_frontend<float>(const FrontendSpec&,
                                                     Rng&);
extern template Frontend<double> make_frontend<double>(const FrontendSpec&,
                                                       Rng&);

}  // namespace difftts

#endif  // DIFFTTS_TEXT_FRONTEND_HPP
