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

#ifndef DIFFTTS_UNET_HPP
#define DIFFTTS_UNET_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "difftts/nn_ops.hpp"
#include "difftts/tensor.hpp"
#include "difftts/text_frontend.hpp"

namespace difftts {

// Per-block lists indexed 0..n_blocks-1. A block's stage count is the
// length of its stride list; shorter kernel/bank lists repeat their
// last entry across the remaining stages.
struct UNetConfig {
  std::vector<std::int64_t> dims;
  std::vector<std::vector<std::int64_t>> kernel_sizes;
  std::vector<std::vector<std::int64_t>> strides;
  std::vector<std::vector<std::int64_t>> adaptive_kernel;  // bank sizes
  std::vector<std::int64_t> block_counts;  // conv units per stage
  std::vector<std::uint8_t> self_attention;
  std::vector<std::uint8_t> cross_attention;
  std::vector<std::int64_t> attention_heads;
  std::int64_t d_text = 768;
  std::int64_t speaker_count = 0;
  bool toy_scale = false;
  std::int64_t stem_kernel = 5;
  std::int64_t noise_dim = 128;
  std::int64_t speaker_dim = 128;
  std::int64_t norm_groups = 8;  // upper bound, rounded down to divide C

  static UNetConfig table1();
  static UNetConfig toy();

  void validate() const;
  std::int64_t n_blocks() const {
    return static_cast<std::int64_t>(dims.size());
  }
  std::int64_t n_stages(std::int64_t b) const {
    return static_cast<std::int64_t>(strides[b].size());
  }
  std::int64_t kernel_at(std::int64_t b, std::int64_t j) const;
  std::int64_t stride_at(std::int64_t b, std::int64_t j) const {
    return strides[b][j];
  }
  std::int64_t bank_at(std::int64_t b, std::int64_t j) const;  // 0 = none
  std::int64_t stride_product() const;
  std::int64_t cond_dim() const { return noise_dim + speaker_dim; }

  std::string to_json() const;
  static UNetConfig from_json(const std::string& json);
  std::uint64_t hash() const;  // FNV-1a of the canonical JSON form
};

// Sinusoidal features of the continuous noise level.
std::vector<double> noise_level_embedding(double sqrt_alpha_bar,
                                          std::int64_t dim);

template <class S>
struct ConditioningSignals {
  std::vector<double> sqrt_alpha_bar;       // per example, in (0, 1]
  std::vector<std::int64_t> speaker;        // ignored when speaker_count = 0
  std::vector<TextEncoding<S>> texts;       // one per example
};

template <class S>
struct EpsilonPrediction {
  Tensor<S> epsilon;  // [B, L]
  Tensor<S> omega;    // [B, 1], positive
};

template <class S>
class UNet {
 public:
  UNet(const UNetConfig& cfg, Rng& rng);

  EpsilonPrediction<S> predict(const Tensor<S>& noisy,
                               const ConditioningSignals<S>& cond);

  const UNetConfig& config() const { return cfg_; }
  std::vector<std::pair<std::string, Tensor<S>>>& parameters() {
    return tensors_;
  }
  Tensor<S>& parameter(const std::string& name);
  std::int64_t parameter_count() const;
  void set_trainable(bool trainable);

  // Sequence length at the deepest stage of the most recent predict call.
  std::int64_t last_bottleneck_length() const {
    return last_bottleneck_length_;
  }

  // Exposed layer applications; operate on [B, C, L] maps.
  Tensor<S> film_modulate(const std::string& prefix, const Tensor<S>& x,
                          const Tensor<S>& cond_vec);
  Tensor<S> adaptive_conv(const std::string& prefix, const Tensor<S>& x,
                          const Tensor<S>& cond_vec);
  Tensor<S> cross_attend(const std::string& prefix, const Tensor<S>& x,
                         const std::vector<TextEncoding<S>>& texts,
                         std::int64_t heads);
  Tensor<S> self_attend(const std::string& prefix, const Tensor<S>& x,
                        std::int64_t heads);

  // Conditioning vector [B, cond_dim] from noise levels and speakers.
  Tensor<S> build_cond(const ConditioningSignals<S>& cond);

 private:
  struct StageMeta {
    std::string prefix;
    std::int64_t c_in = 0, c_out = 0;
    std::int64_t kernel = 0, stride = 0, bank = 0, units = 0;
    bool self_attn = false, cross_attn = false;
    std::int64_t heads = 0;
  };

  Tensor<S> run_stage_body(const StageMeta& m, Tensor<S> h,
                           const Tensor<S>& cond_vec,
                           const std::vector<TextEncoding<S>>& texts);
  Tensor<S> conv_params(const std::string& prefix, const Tensor<S>& x,
                        std::int64_t stride, std::int64_t kernel);
  Tensor<S> norm(const std::string& prefix, const Tensor<S>& x);
  Tensor<S> attend(const std::string& prefix, const Tensor<S>& x,
                   const std::vector<TextEncoding<S>>* texts,
                   std::int64_t heads);

  void register_tensor(const std::string& name, Tensor<S> t);

  UNetConfig cfg_;
  std::vector<std::pair<std::string, Tensor<S>>> tensors_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<StageMeta> down_, up_;
  std::int64_t last_bottleneck_length_ = 0;
};

extern template class UNet<float>;
extern template class UNet<double>;

}  // namespace difftts

#endif  // DIFFTTS_UNET_HPP
