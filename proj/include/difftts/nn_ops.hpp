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

#ifndef DIFFTTS_NN_OPS_HPP
#define DIFFTTS_NN_OPS_HPP

#include <cstdint>
#include <vector>

#include "difftts/tensor.hpp"

namespace difftts {
namespace ops {

// Elementwise.
template <class S> Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b);
template <class S> Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b);
template <class S> Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b);
template <class S> Tensor<S> div(const Tensor<S>& a, const Tensor<S>& b);
template <class S> Tensor<S> add_scalar(const Tensor<S>& a, S c);
template <class S> Tensor<S> mul_scalar(const Tensor<S>& a, S c);
template <class S> Tensor<S> silu(const Tensor<S>& x);
template <class S> Tensor<S> exp(const Tensor<S>& x);
template <class S> Tensor<S> log(const Tensor<S>& x);

// Reductions to a scalar tensor.
template <class S> Tensor<S> sum_all(const Tensor<S>& x);
template <class S> Tensor<S> mean_all(const Tensor<S>& x);

// 2-D linear algebra.
template <class S> Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b);
template <class S>
Tensor<S> linear(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& bias);
template <class S> Tensor<S> transpose2d(const Tensor<S>& x);
template <class S>
Tensor<S> slice_cols(const Tensor<S>& x, std::int64_t c0, std::int64_t c1);
template <class S> Tensor<S> concat_cols(const std::vector<Tensor<S>>& parts);

// Row-wise softmax over the last of two dims; cols marked invalid get
// probability zero (additive -inf logits). Throws InputError if a row
// has no valid column.
template <class S>
Tensor<S> softmax_rows(const Tensor<S>& x,
                       const std::vector<std::uint8_t>* valid_cols = nullptr);

// Leading-dim indexing.
template <class S>
Tensor<S> select0(const Tensor<S>& x, std::int64_t index);
template <class S> Tensor<S> stack0(const std::vector<Tensor<S>>& parts);
template <class S> Tensor<S> reshape(const Tensor<S>& x, Shape shape);

// 1-D convolution over [B, C_in, L] with kernel [C_out, C_in, K].
// L_out = (L + pad_left + pad_right - K) / stride + 1.
template <class S>
Tensor<S> conv1d(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& bias,
                 std::int64_t stride, std::int64_t pad_left,
                 std::int64_t pad_right);

// Convolution whose kernel is a per-example convex mix of a bank:
// bank [M, C_out, C_in, K], mix [B, M]; stride 1.
template <class S>
Tensor<S> mixed_conv1d(const Tensor<S>& x, const Tensor<S>& bank,
                       const Tensor<S>& bias, const Tensor<S>& mix,
                       std::int64_t pad_left, std::int64_t pad_right);

template <class S>
Tensor<S> upsample_nearest(const Tensor<S>& x, std::int64_t factor);

// GroupNorm over [B, C, L] with per-channel affine parameters.
template <class S>
Tensor<S> group_norm(const Tensor<S>& x, const Tensor<S>& gamma,
                     const Tensor<S>& beta, std::int64_t groups, double eps);

// Per-channel modulation: y[b,c,t] = scale[b,c] * x[b,c,t] + shift[b,c].
template <class S>
Tensor<S> film(const Tensor<S>& x, const Tensor<S>& scale,
               const Tensor<S>& shift);

// Concatenation along dim 1 of [B, C_i, L] parts.
template <class S>
Tensor<S> concat_channels(const std::vector<Tensor<S>>& parts);

// Constant [n, d] absolute sinusoidal position table.
template <class S>
Tensor<S> positional_rows(std::int64_t n, std::int64_t d);

}  // namespace ops
}  // namespace difftts

#endif  // DIFFTTS_NN_OPS_HPP
