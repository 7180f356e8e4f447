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

#include "difftts/unet.hpp"

#include <cmath>

#include "json.hpp"

namespace difftts {

using nlohmann::json;

UNetConfig UNetConfig::table1() {
  UNetConfig c;
  c.dims = {128, 256, 512, 1024};
  c.kernel_sizes = {{5, 5}, {5, 5}, {5, 5}, {3, 3, 3, 3, 3}};
  c.strides = {{2, 2}, {2, 2}, {4}, {4, 2, 2, 2, 2}};
  c.adaptive_kernel = {{8, 8}, {4, 4}, {2}, {}};
  c.block_counts = {1, 1, 1, 1};
  c.self_attention = {0, 0, 0, 1};
  c.cross_attention = {0, 0, 0, 1};
  c.attention_heads = {0, 0, 0, 8};
  c.d_text = 768;
  c.speaker_count = 0;
  c.toy_scale = false;
  c.stem_kernel = 5;
  c.noise_dim = 128;
  c.speaker_dim = 128;
  c.norm_groups = 8;
  return c;
}

UNetConfig UNetConfig::toy() {
  UNetConfig c;
  c.dims = {6, 8};
  c.kernel_sizes = {{3, 3}, {3, 3}};
  c.strides = {{2, 2}, {4, 4}};
  c.adaptive_kernel = {{2, 2}, {}};
  c.block_counts = {1, 1};
  c.self_attention = {0, 1};
  c.cross_attention = {0, 1};
  c.attention_heads = {0, 2};
  c.d_text = 12;
  c.speaker_count = 0;
  c.toy_scale = true;
  c.stem_kernel = 3;
  c.noise_dim = 12;
  c.speaker_dim = 4;
  c.norm_groups = 2;
  return c;
}

void UNetConfig::validate() const {
  const auto nb = n_blocks();
  if (nb < 1) throw ConfigError("unet: no blocks configured");
  auto check_len = [&](std::size_t got, const char* what) {
    if (static_cast<std::int64_t>(got) != nb)
      throw ConfigError(std::string("unet: ") + what +
                        " list length does not match block count");
  };
  check_len(kernel_sizes.size(), "kernel_sizes");
  check_len(strides.size(), "strides");
  check_len(adaptive_kernel.size(), "adaptive_kernel");
  check_len(block_counts.size(), "block_counts");
  check_len(self_attention.size(), "self_attention");
  check_len(cross_attention.size(), "cross_attention");
  check_len(attention_heads.size(), "attention_heads");
  for (std::int64_t b = 0; b < nb; ++b) {
    if (dims[b] < 1) throw ConfigError("unet: non-positive block dimension");
    if (strides[b].empty()) throw ConfigError("unet: block has no stages");
    if (kernel_sizes[b].empty())
      throw ConfigError("unet: block has no kernel sizes");
    for (auto s : strides[b])
      if (s < 1) throw ConfigError("unet: non-positive stride");
    for (auto k : kernel_sizes[b])
      if (k < 1) throw ConfigError("unet: non-positive kernel size");
    for (auto m : adaptive_kernel[b])
      if (m < 1) throw ConfigError("unet: non-positive bank size");
    if (block_counts[b] < 1)
      throw ConfigError("unet: block_counts entries must be positive");
    if ((self_attention[b] || cross_attention[b])) {
      if (attention_heads[b] < 1)
        throw ConfigError("unet: attention block needs a head count");
      if (dims[b] % attention_heads[b] != 0)
        throw ConfigError("unet: heads must divide block dimension");
    }
  }
  if (d_text < 1) throw ConfigError("unet: d_text must be positive");
  if (speaker_count < 0) throw ConfigError("unet: negative speaker_count");
  if (noise_dim < 2 || noise_dim % 2 != 0)
    throw ConfigError("unet: noise_dim must be even and at least 2");
  if (speaker_dim < 1) throw ConfigError("unet: speaker_dim must be positive");
  if (stem_kernel < 1) throw ConfigError("unet: stem_kernel must be positive");
  if (norm_groups < 1) throw ConfigError("unet: norm_groups must be positive");
}

std::int64_t UNetConfig::kernel_at(std::int64_t b, std::int64_t j) const {
  const auto& ks = kernel_sizes[b];
  const auto idx = std::min<std::int64_t>(
      j, static_cast<std::int64_t>(ks.size()) - 1);
  return ks[idx];
}

std::int64_t UNetConfig::bank_at(std::int64_t b, std::int64_t j) const {
  const auto& bs = adaptive_kernel[b];
  if (bs.empty()) return 0;
  const auto idx = std::min<std::int64_t>(
      j, static_cast<std::int64_t>(bs.size()) - 1);
  return bs[idx];
}

std::int64_t UNetConfig::stride_product() const {
  std::int64_t p = 1;
  for (const auto& block : strides)
    for (auto s : block) p *= s;
  return p;
}

std::string UNetConfig::to_json() const {
  json j;
  j["dims"] = dims;
  j["kernel_sizes"] = kernel_sizes;
  j["strides"] = strides;
  j["adaptive_kernel"] = adaptive_kernel;
  j["block_counts"] = block_counts;
  j["self_attention"] = self_attention;
  j["cross_attention"] = cross_attention;
  j["attention_heads"] = attention_heads;
  j["d_text"] = d_text;
  j["speaker_count"] = speaker_count;
  j["toy_scale"] = toy_scale;
  j["stem_kernel"] = stem_kernel;
  j["noise_dim"] = noise_dim;
  j["speaker_dim"] = speaker_dim;
  j["norm_groups"] = norm_groups;
  return j.dump();
}

UNetConfig UNetConfig::from_json(const std::string& text) {
  json j = json::parse(text);
  UNetConfig c;
  c.dims = j.at("dims").get<std::vector<std::int64_t>>();
  c.kernel_sizes =
      j.at("kernel_sizes").get<std::vector<std::vector<std::int64_t>>>();
  c.strides = j.at("strides").get<std::vector<std::vector<std::int64_t>>>();
  c.adaptive_kernel =
      j.at("adaptive_kernel").get<std::vector<std::vector<std::int64_t>>>();
  c.block_counts = j.at("block_counts").get<std::vector<std::int64_t>>();
  c.self_attention =
      j.at("self_attention").get<std::vector<std::uint8_t>>();
  c.cross_attention =
      j.at("cross_attention").get<std::vector<std::uint8_t>>();
  c.attention_heads = j.at("attention_heads").get<std::vector<std::int64_t>>();
  c.d_text = j.at("d_text").get<std::int64_t>();
  c.speaker_count = j.at("speaker_count").get<std::int64_t>();
  c.toy_scale = j.at("toy_scale").get<bool>();
  c.stem_kernel = j.at("stem_kernel").get<std::int64_t>();
  c.noise_dim = j.at("noise_dim").get<std::int64_t>();
  c.speaker_dim = j.at("speaker_dim").get<std::int64_t>();
  c.norm_groups = j.at("norm_groups").get<std::int64_t>();
  return c;
}

std::uint64_t UNetConfig::hash() const { return fnv1a64(to_json()); }

std::vector<double> noise_level_embedding(double sqrt_alpha_bar,
                                          std::int64_t dim) {
  if (dim < 2 || dim % 2 != 0)
    throw ParamError("noise_level_embedding: dim must be even and >= 2");
  const double t = 5000.0 * sqrt_alpha_bar;
  const auto half = dim / 2;
  std::vector<double> e(static_cast<std::size_t>(dim));
  for (std::int64_t i = 0; i < half; ++i) {
    const double expo =
        (half == 1) ? 0.0 : -4.0 * static_cast<double>(i) / (half - 1);
    const double freq = std::pow(10.0, expo);
    e[i] = std::sin(t * freq);
    e[half + i] = std::cos(t * freq);
  }
  return e;
}

namespace {

std::int64_t norm_group_count(std::int64_t channels, std::int64_t cap) {
  auto g = std::min(channels, cap);
  while (channels % g != 0) --g;
  return g;
}

}  // namespace

template <class S>
UNet<S>::UNet(const UNetConfig& cfg, Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  const auto nb = cfg_.n_blocks();
  const auto cd = cfg_.cond_dim();

  auto randn = [&](const std::string& name, Shape shape, double stdev) {
    register_tensor(name, Tensor<S>::randn(shape, rng,
                                           static_cast<S>(stdev)));
  };
  auto zeros = [&](const std::string& name, Shape shape) {
    register_tensor(name, Tensor<S>::zeros(shape));
  };
  auto ones = [&](const std::string& name, Shape shape) {
    register_tensor(name, Tensor<S>::full(shape, S(1)));
  };

  randn("stem.w", {cfg_.dims[0], 1, cfg_.stem_kernel},
        1.0 / std::sqrt(double(cfg_.stem_kernel)));
  zeros("stem.b", {cfg_.dims[0]});

  if (cfg_.speaker_count > 0)
    randn("speaker.emb", {cfg_.speaker_count, cfg_.speaker_dim}, 1.0);

  std::int64_t c_prev = cfg_.dims[0];
  for (std::int64_t b = 0; b < nb; ++b)
    for (std::int64_t j = 0; j < cfg_.n_stages(b); ++j) {
      StageMeta m;
      m.prefix = "d" + std::to_string(b) + "." + std::to_string(j) + ".";
      m.c_in = c_prev;
      m.c_out = cfg_.dims[b];
      m.kernel = cfg_.kernel_at(b, j);
      m.stride = cfg_.stride_at(b, j);
      m.bank = cfg_.bank_at(b, j);
      m.units = cfg_.block_counts[b];
      m.self_attn = cfg_.self_attention[b] != 0;
      m.cross_attn = cfg_.cross_attention[b] != 0;
      m.heads = cfg_.attention_heads[b];
      down_.push_back(m);
      c_prev = m.c_out;
    }

  // Decoder stages mirror the encoder in exact reverse order; each
  // consumes the corresponding encoder stage's input as its skip.
  std::int64_t c_run = c_prev;
  for (auto it = down_.rbegin(); it != down_.rend(); ++it) {
    StageMeta m = *it;
    m.prefix = "u" + m.prefix.substr(1);
    m.c_out = it->c_in;
    m.c_in = c_run + it->c_in;
    up_.push_back(m);
    c_run = m.c_out;
  }

  auto build_conv = [&](const std::string& name, std::int64_t co,
                        std::int64_t ci, std::int64_t k, double scale) {
    randn(name + ".w", {co, ci, k}, scale / std::sqrt(double(ci * k)));
    zeros(name + ".b", {co});
  };

  for (const auto& list : {std::cref(down_), std::cref(up_)})
    for (const auto& m : list.get()) {
      build_conv(m.prefix + "main", m.c_out, m.c_in, m.kernel, 1.0);
      for (std::int64_t r = 0; r < m.units; ++r) {
        const std::string u = m.prefix + "u" + std::to_string(r) + ".";
        ones(u + "gn.g", {m.c_out});
        zeros(u + "gn.b", {m.c_out});
        if (m.bank > 0) {
          randn(u + "bank.w", {m.bank, m.c_out, m.c_out, m.kernel},
                1.0 / std::sqrt(double(m.c_out * m.kernel)));
          zeros(u + "bank.b", {m.c_out});
          zeros(u + "mix.w", {m.bank, cd});
          zeros(u + "mix.b", {m.bank});
        } else {
          zeros(u + "film.w", {2 * m.c_out, cd});
          zeros(u + "film.b", {2 * m.c_out});
          build_conv(u + "conv", m.c_out, m.c_out, m.kernel, 1.0);
        }
      }
      if (m.self_attn) {
        const std::string a = m.prefix + "sa.";
        ones(a + "gn.g", {m.c_out});
        zeros(a + "gn.b", {m.c_out});
        for (const char* w : {"wq", "wk", "wv", "wo"})
          randn(a + w, {m.c_out, m.c_out}, 1.0 / std::sqrt(double(m.c_out)));
        for (const char* bn : {"bq", "bk", "bv", "bo"}) zeros(a + bn, {m.c_out});
      }
      if (m.cross_attn) {
        const std::string a = m.prefix + "ca.";
        ones(a + "gn.g", {m.c_out});
        zeros(a + "gn.b", {m.c_out});
        randn(a + "wq", {m.c_out, m.c_out}, 1.0 / std::sqrt(double(m.c_out)));
        zeros(a + "bq", {m.c_out});
        randn(a + "wk", {m.c_out, cfg_.d_text},
              1.0 / std::sqrt(double(cfg_.d_text)));
        zeros(a + "bk", {m.c_out});
        randn(a + "wv", {m.c_out, cfg_.d_text},
              1.0 / std::sqrt(double(cfg_.d_text)));
        zeros(a + "bv", {m.c_out});
        randn(a + "wo", {m.c_out, m.c_out}, 1.0 / std::sqrt(double(m.c_out)));
        zeros(a + "bo", {m.c_out});
      }
    }

  randn("omega.w1", {cfg_.noise_dim, cfg_.noise_dim},
        1.0 / std::sqrt(double(cfg_.noise_dim)));
  zeros("omega.b1", {cfg_.noise_dim});
  zeros("omega.w2", {1, cfg_.noise_dim});
  zeros("omega.b2", {1});

  ones("out.gn.g", {cfg_.dims[0]});
  zeros("out.gn.b", {cfg_.dims[0]});
  build_conv("out", 1, cfg_.dims[0], cfg_.stem_kernel, 0.01);
}

template <class S>
void UNet<S>::register_tensor(const std::string& name, Tensor<S> t) {
  index_[name] = tensors_.size();
  tensors_.emplace_back(name, std::move(t));
}

template <class S>
Tensor<S>& UNet<S>::parameter(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unet: unknown parameter " + name);
  return tensors_[it->second].second;
}

template <class S>
std::int64_t UNet<S>::parameter_count() const {
  std::int64_t n = 0;
  for (const auto& [name, t] : tensors_) n += t.numel();
  return n;
}

template <class S>
void UNet<S>::set_trainable(bool trainable) {
  for (auto& [name, t] : tensors_) t.set_requires_grad(trainable);
}

template <class S>
Tensor<S> UNet<S>::norm(const std::string& prefix, const Tensor<S>& x) {
  const auto c = x.dim(1);
  return ops::group_norm(x, parameter(prefix + "gn.g"),
                         parameter(prefix + "gn.b"),
                         norm_group_count(c, cfg_.norm_groups), 1e-5);
}

template <class S>
Tensor<S> UNet<S>::conv_params(const std::string& prefix, const Tensor<S>& x,
                               std::int64_t stride, std::int64_t kernel) {
  const auto pad =
      stride == 1 ? kernel - 1 : std::max<std::int64_t>(0, kernel - stride);
  return ops::conv1d(x, parameter(prefix + ".w"), parameter(prefix + ".b"),
                     stride, pad / 2, pad - pad / 2);
}

template <class S>
Tensor<S> UNet<S>::film_modulate(const std::string& prefix, const Tensor<S>& x,
                                 const Tensor<S>& cond_vec) {
  const auto c = x.dim(1);
  auto& w = parameter(prefix + "film.w");
  if (w.dim(0) != 2 * c)
    throw ShapeError("film_modulate: projector expects " +
                     std::to_string(w.dim(0) / 2) + " channels, got " +
                     std::to_string(c));
  auto proj = ops::linear(cond_vec, w, parameter(prefix + "film.b"));
  auto scale = ops::add_scalar(ops::slice_cols(proj, 0, c), S(1));
  auto shift = ops::slice_cols(proj, c, 2 * c);
  return ops::film(x, scale, shift);
}

template <class S>
Tensor<S> UNet<S>::adaptive_conv(const std::string& prefix, const Tensor<S>& x,
                                 const Tensor<S>& cond_vec) {
  auto& bank = parameter(prefix + "bank.w");
  auto logits = ops::linear(cond_vec, parameter(prefix + "mix.w"),
                            parameter(prefix + "mix.b"));
  auto mix = ops::softmax_rows(logits);
  const auto k = bank.dim(3);
  return ops::mixed_conv1d(x, bank, parameter(prefix + "bank.b"), mix,
                           (k - 1) / 2, (k - 1) - (k - 1) / 2);
}

template <class S>
Tensor<S> UNet<S>::attend(const std::string& prefix, const Tensor<S>& x,
                          const std::vector<TextEncoding<S>>* texts,
                          std::int64_t heads) {
  const auto bsz = x.dim(0), c = x.dim(1), l = x.dim(2);
  if (c % heads != 0) throw ShapeError("attention: heads must divide channels");
  const auto dh = c / heads;
  const S scale = static_cast<S>(1.0 / std::sqrt(static_cast<double>(dh)));
  auto& wq = parameter(prefix + "wq");
  auto& bq = parameter(prefix + "bq");
  auto& wk = parameter(prefix + "wk");
  auto& bk = parameter(prefix + "bk");
  auto& wv = parameter(prefix + "wv");
  auto& bv = parameter(prefix + "bv");
  auto& wo = parameter(prefix + "wo");
  auto& bo = parameter(prefix + "bo");

  auto pos = ops::positional_rows<S>(l, c);
  std::vector<Tensor<S>> outs;
  outs.reserve(static_cast<std::size_t>(bsz));
  for (std::int64_t i = 0; i < bsz; ++i) {
    auto rows = ops::add(
        ops::transpose2d(ops::reshape(ops::select0(x, i), Shape{c, l})), pos);
    auto q = ops::linear(rows, wq, bq);
    Tensor<S> k, v;
    const std::vector<std::uint8_t>* mask = nullptr;
    if (texts) {
      const auto& enc = (*texts)[static_cast<std::size_t>(i)];
      if (enc.d_text() != cfg_.d_text)
        throw ShapeError("cross_attend: text width mismatch");
      k = ops::linear(enc.vectors, wk, bk);
      v = ops::linear(enc.vectors, wv, bv);
      mask = &enc.mask;
    } else {
      k = ops::linear(rows, wk, bk);
      v = ops::linear(rows, wv, bv);
    }
    std::vector<Tensor<S>> ctx;
    ctx.reserve(static_cast<std::size_t>(heads));
    for (std::int64_t h = 0; h < heads; ++h) {
      auto qh = ops::slice_cols(q, h * dh, (h + 1) * dh);
      auto kh = ops::slice_cols(k, h * dh, (h + 1) * dh);
      auto vh = ops::slice_cols(v, h * dh, (h + 1) * dh);
      auto att = ops::softmax_rows(
          ops::mul_scalar(ops::matmul(qh, ops::transpose2d(kh)), scale), mask);
      ctx.push_back(ops::matmul(att, vh));
    }
    auto o = ops::linear(ops::concat_cols(ctx), wo, bo);
    outs.push_back(ops::reshape(ops::transpose2d(o), Shape{c, l}));
  }
  return ops::stack0(outs);
}

template <class S>
Tensor<S> UNet<S>::self_attend(const std::string& prefix, const Tensor<S>& x,
                               std::int64_t heads) {
  return attend(prefix, x, nullptr, heads);
}

template <class S>
Tensor<S> UNet<S>::cross_attend(const std::string& prefix, const Tensor<S>& x,
                                const std::vector<TextEncoding<S>>& texts,
                                std::int64_t heads) {
  if (static_cast<std::int64_t>(texts.size()) != x.dim(0))
    throw ShapeError("cross_attend: one text encoding per example required");
  return attend(prefix, x, &texts, heads);
}

template <class S>
Tensor<S> UNet<S>::run_stage_body(const StageMeta& m, Tensor<S> h,
                                  const Tensor<S>& cond_vec,
                                  const std::vector<TextEncoding<S>>& texts) {
  for (std::int64_t r = 0; r < m.units; ++r) {
    const std::string u = m.prefix + "u" + std::to_string(r) + ".";
    auto a = norm(u, h);
    if (m.bank == 0) a = film_modulate(u, a, cond_vec);
    a = ops::silu(a);
    a = m.bank > 0 ? adaptive_conv(u, a, cond_vec)
                   : conv_params(u + "conv", a, 1, m.kernel);
    h = ops::add(h, a);
  }
  if (m.self_attn)
    h = ops::add(h, self_attend(m.prefix + "sa.", norm(m.prefix + "sa.", h),
                                m.heads));
  if (m.cross_attn)
    h = ops::add(h, cross_attend(m.prefix + "ca.", norm(m.prefix + "ca.", h),
                                 texts, m.heads));
  return h;
}

template <class S>
Tensor<S> UNet<S>::build_cond(const ConditioningSignals<S>& cond) {
  const auto bsz = static_cast<std::int64_t>(cond.sqrt_alpha_bar.size());
  std::vector<S> noise(static_cast<std::size_t>(bsz * cfg_.noise_dim));
  for (std::int64_t i = 0; i < bsz; ++i) {
    const double sab = cond.sqrt_alpha_bar[static_cast<std::size_t>(i)];
    if (!(sab > 0.0) || sab > 1.0)
      throw ParamError("predict_epsilon: sqrt_alpha_bar must be in (0, 1]");
    auto e = noise_level_embedding(sab, cfg_.noise_dim);
    for (std::int64_t d = 0; d < cfg_.noise_dim; ++d)
      noise[i * cfg_.noise_dim + d] = static_cast<S>(e[d]);
  }
  auto nt = Tensor<S>::from_vector(Shape{bsz, cfg_.noise_dim},
                                   std::move(noise));
  Tensor<S> st;
  if (cfg_.speaker_count > 0) {
    if (static_cast<std::int64_t>(cond.speaker.size()) != bsz)
      throw ShapeError("predict_epsilon: one speaker index per example");
    std::vector<S> oh(static_cast<std::size_t>(bsz * cfg_.speaker_count),
                      S(0));
    for (std::int64_t i = 0; i < bsz; ++i) {
      const auto s = cond.speaker[static_cast<std::size_t>(i)];
      if (s < 0 || s >= cfg_.speaker_count)
        throw ParamError("predict_epsilon: speaker index out of range");
      oh[i * cfg_.speaker_count + s] = S(1);
    }
    st = ops::matmul(
        Tensor<S>::from_vector(Shape{bsz, cfg_.speaker_count}, std::move(oh)),
        parameter("speaker.emb"));
  } else {
    st = Tensor<S>::zeros(Shape{bsz, cfg_.speaker_dim});
  }
  return ops::concat_cols<S>({nt, st});
}

template <class S>
EpsilonPrediction<S> UNet<S>::predict(const Tensor<S>& noisy,
                                      const ConditioningSignals<S>& cond) {
  if (noisy.rank() != 2)
    throw ShapeError("predict_epsilon: expected [batch, length] input");
  const auto bsz = noisy.dim(0), l = noisy.dim(1);
  const auto sp = cfg_.stride_product();
  if (l % sp != 0)
    throw ShapeError("predict_epsilon: input length must be a multiple of " +
                     std::to_string(sp));
  if (static_cast<std::int64_t>(cond.sqrt_alpha_bar.size()) != bsz)
    throw ShapeError("predict_epsilon: one noise level per example");
  if (static_cast<std::int64_t>(cond.texts.size()) != bsz)
    throw ShapeError("predict_epsilon: one text encoding per example");
  for (const auto& t : cond.texts)
    if (t.d_text() != cfg_.d_text)
      throw ShapeError("predict_epsilon: text width mismatch");

  auto cv = build_cond(cond);

  auto x = conv_params("stem", ops::reshape(noisy, Shape{bsz, 1, l}), 1,
                       cfg_.stem_kernel);
  std::vector<Tensor<S>> skips;
  skips.reserve(down_.size());
  for (const auto& m : down_) {
    skips.push_back(x);
    x = conv_params(m.prefix + "main", x, m.stride, m.kernel);
    x = run_stage_body(m, x, cv, cond.texts);
  }
  last_bottleneck_length_ = x.shape()[2];
  for (const auto& m : up_) {
    x = ops::upsample_nearest(x, m.stride);
    x = ops::concat_channels<S>({x, skips.back()});
    skips.pop_back();
    x = conv_params(m.prefix + "main", x, 1, m.kernel);
    x = run_stage_body(m, x, cv, cond.texts);
  }
  x = conv_params("out", ops::silu(norm("out.", x)), 1, cfg_.stem_kernel);

  // omega depends on the noise level only.
  auto nt = ops::slice_cols(cv, 0, cfg_.noise_dim);
  auto o = ops::silu(ops::linear(nt, parameter("omega.w1"),
                                 parameter("omega.b1")));
  o = ops::linear(o, parameter("omega.w2"), parameter("omega.b2"));

  EpsilonPrediction<S> pred;
  pred.epsilon = ops::reshape(x, Shape{bsz, l});
  pred.omega = ops::exp(o);
  return pred;
}

template class UNet<float>;
template class UNet<double>;

}  // namespace difftts
