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

#include "difftts/nn_ops.hpp"

// Alignment-based loop peeling would make results depend on buffer
// addresses; training determinism requires address-independent sums.
#define EIGEN_MAX_ALIGN_BYTES 0
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace difftts {
namespace ops {

namespace {

template <class S>
using RowMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using EMap = Eigen::Map<RowMat<S>>;
template <class S>
using ECMap = Eigen::Map<const RowMat<S>>;
using OStride = Eigen::OuterStride<>;
template <class S>
using EMapOS = Eigen::Map<RowMat<S>, 0, OStride>;
template <class S>
using ECMapOS = Eigen::Map<const RowMat<S>, 0, OStride>;
using DStride = Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using ECMapDS = Eigen::Map<const RowMat<S>, 0, DStride>;

template <class S>
using ImplT = detail::TensorImpl<S>;

template <class S>
void require_same_shape(const Tensor<S>& a, const Tensor<S>& b,
                        const char* op) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch");
}

template <class S>
void require_rank(const Tensor<S>& t, int r, const char* op) {
  if (t.rank() != r)
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(r));
}

template <class S>
S sigmoid(S x) {
  return S(1) / (S(1) + std::exp(-x));
}

// Packs [C_out, C_in, K] kernels into K contiguous C_out x C_in tap
// matrices so each tap contributes one GEMM.
template <class S>
void pack_taps(const S* w, std::int64_t c_out, std::int64_t c_in,
               std::int64_t k, std::vector<S>& packed) {
  packed.resize(static_cast<std::size_t>(k * c_out * c_in));
  for (std::int64_t co = 0; co < c_out; ++co)
    for (std::int64_t ci = 0; ci < c_in; ++ci) {
      const S* src = w + (co * c_in + ci) * k;
      for (std::int64_t t = 0; t < k; ++t)
        packed[static_cast<std::size_t>((t * c_out + co) * c_in + ci)] = src[t];
    }
}

struct TapRange {
  std::int64_t t0, t1;  // inclusive output positions, empty if t0 > t1
};

TapRange tap_range(std::int64_t k, std::int64_t l_in, std::int64_t l_out,
                   std::int64_t stride, std::int64_t pad_left) {
  TapRange r{0, -1};
  std::int64_t t0 = 0;
  if (k < pad_left) t0 = (pad_left - k + stride - 1) / stride;
  std::int64_t max_pos = l_in - 1 - k + pad_left;
  if (max_pos < 0) return r;
  std::int64_t t1 = std::min(l_out - 1, max_pos / stride);
  if (t0 > t1) return r;
  r.t0 = t0;
  r.t1 = t1;
  return r;
}

// y[C_out, L_out] += conv(x[C_in, L]) for one example; y must hold the
// bias (or zeros) on entry.
template <class S>
void conv_forward_one(const S* x, S* y, const S* packed, std::int64_t c_in,
                      std::int64_t l_in, std::int64_t c_out,
                      std::int64_t l_out, std::int64_t k, std::int64_t stride,
                      std::int64_t pad_left) {
  for (std::int64_t t = 0; t < k; ++t) {
    auto r = tap_range(t, l_in, l_out, stride, pad_left);
    if (r.t0 > r.t1) continue;
    const std::int64_t cnt = r.t1 - r.t0 + 1;
    ECMapDS<S> xm(x + r.t0 * stride + t - pad_left, c_in, cnt,
                  DStride(l_in, stride));
    ECMap<S> wm(packed + t * c_out * c_in, c_out, c_in);
    EMapOS<S> ym(y + r.t0, c_out, cnt, OStride(l_out));
    ym.noalias() += wm * xm;
  }
}

template <class S>
void conv_backward_one(const S* x, const S* dy, const S* packed, S* dx,
                       S* dpacked, std::int64_t c_in, std::int64_t l_in,
                       std::int64_t c_out, std::int64_t l_out, std::int64_t k,
                       std::int64_t stride, std::int64_t pad_left,
                       std::vector<S>& scratch) {
  for (std::int64_t t = 0; t < k; ++t) {
    auto r = tap_range(t, l_in, l_out, stride, pad_left);
    if (r.t0 > r.t1) continue;
    const std::int64_t cnt = r.t1 - r.t0 + 1;
    ECMapOS<S> dym(dy + r.t0, c_out, cnt, OStride(l_out));
    if (dpacked) {
      ECMapDS<S> xm(x + r.t0 * stride + t - pad_left, c_in, cnt,
                    DStride(l_in, stride));
      EMap<S> dwm(dpacked + t * c_out * c_in, c_out, c_in);
      dwm.noalias() += dym * xm.transpose();
    }
    if (dx) {
      scratch.resize(static_cast<std::size_t>(c_in * cnt));
      EMap<S> tm(scratch.data(), c_in, cnt);
      ECMap<S> wm(packed + t * c_out * c_in, c_out, c_in);
      tm.noalias() = wm.transpose() * dym;
      for (std::int64_t ci = 0; ci < c_in; ++ci) {
        S* base = dx + ci * l_in + r.t0 * stride + t - pad_left;
        const S* row = scratch.data() + ci * cnt;
        for (std::int64_t j = 0; j < cnt; ++j) base[j * stride] += row[j];
      }
    }
  }
}

// Scatters tap-major kernel gradients back to [C_out, C_in, K] order.
template <class S>
void unpack_taps_add(const S* dpacked, std::int64_t c_out, std::int64_t c_in,
                     std::int64_t k, S* dw) {
  for (std::int64_t co = 0; co < c_out; ++co)
    for (std::int64_t ci = 0; ci < c_in; ++ci) {
      S* dst = dw + (co * c_in + ci) * k;
      for (std::int64_t t = 0; t < k; ++t)
        dst[t] += dpacked[(t * c_out + co) * c_in + ci];
    }
}

}  // namespace

template <class S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
  require_same_shape(a, b, "add");
  std::vector<S> out(a.values());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.values()[i];
  return Tensor<S>::make_op(
      a.shape(), std::move(out), {a, b},
      [pa = a.impl_ptr(), pb = b.impl_ptr()](ImplT<S>& self) {
        for (auto* p : {pa.get(), pb.get()}) {
          if (!p->track) continue;
          p->ensure_grad();
          for (std::size_t i = 0; i < self.g.size(); ++i)
            p->g[i] += self.g[i];
        }
      });
}

template <class S>
Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b) {
  require_same_shape(a, b, "sub");
  std::vector<S> out(a.values());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.values()[i];
  return Tensor<S>::make_op(
      a.shape(), std::move(out), {a, b},
      [pa = a.impl_ptr(), pb = b.impl_ptr()](ImplT<S>& self) {
        if (pa->track) {
          pa->ensure_grad();
          for (std::size_t i = 0; i < self.g.size(); ++i)
            pa->g[i] += self.g[i];
        }
        if (pb->track) {
          pb->ensure_grad();
          for (std::size_t i = 0; i < self.g.size(); ++i)
            pb->g[i] -= self.g[i];
        }
      });
}

template <class S>
Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b) {
  require_same_shape(a, b, "mul");
  std::vector<S> out(a.values());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.values()[i];
  return Tensor<S>::make_op(
      a.shape(), std::move(out), {a, b},
      [pa = a.impl_ptr(), pb = b.impl_ptr()](ImplT<S>& self) {
        if (pa->track) {
          pa->ensure_grad();
          for (std::size_t i = 0; i < self.g.size(); ++i)
            pa->g[i] += self.g[i] * pb->v[i];
        }
        if (pb->track) {
          pb->ensure_grad();
          for (std::size_t i = 0; i < self.g.size(); ++i)
            pb->g[i] += self.g[i] * pa->v[i];
        }
      });
}

template <class S>
Tensor<S> div(const Tensor<S>& a, const Tensor<S>& b) {
  require_same_shape(a, b, "div");
  for (auto v : b.values())
    if (v == S(0)) throw DomainError("div: zero divisor");
  std::vector<S> out(a.values());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= b.values()[i];
  return Tensor<S>::make_op(
      a.shape(), std::move(out), {a, b},
      [pa = a.impl_ptr(), pb = b.impl_ptr()](ImplT<S>& self) {
        if (pa->track) {
          pa->ensure_grad();
          for (std::size_t i = 0; i < self.g.size(); ++i)
            pa->g[i] += self.g[i] / pb->v[i];
        }
        if (pb->track) {
          pb->ensure_grad();
          for (std::size_t i = 0; i < self.g.size(); ++i)
            pb->g[i] -= self.g[i] * self.v[i] / pb->v[i];
        }
      });
}

template <class S>
Tensor<S> add_scalar(const Tensor<S>& a, S c) {
  std::vector<S> out(a.values());
  for (auto& x : out) x += c;
  return Tensor<S>::make_op(a.shape(), std::move(out), {a},
                            [pa = a.impl_ptr()](ImplT<S>& self) {
                              if (!pa->track) return;
                              pa->ensure_grad();
                              for (std::size_t i = 0; i < self.g.size(); ++i)
                                pa->g[i] += self.g[i];
                            });
}

template <class S>
Tensor<S> mul_scalar(const Tensor<S>& a, S c) {
  std::vector<S> out(a.values());
  for (auto& x : out) x *= c;
  return Tensor<S>::make_op(a.shape(), std::move(out), {a},
                            [pa = a.impl_ptr(), c](ImplT<S>& self) {
                              if (!pa->track) return;
                              pa->ensure_grad();
                              for (std::size_t i = 0; i < self.g.size(); ++i)
                                pa->g[i] += self.g[i] * c;
                            });
}

template <class S>
Tensor<S> silu(const Tensor<S>& x) {
  std::vector<S> out(x.values());
  for (auto& v : out) v *= sigmoid(v);
  return Tensor<S>::make_op(
      x.shape(), std::move(out), {x}, [px = x.impl_ptr()](ImplT<S>& self) {
        if (!px->track) return;
        px->ensure_grad();
        for (std::size_t i = 0; i < self.g.size(); ++i) {
          const S xv = px->v[i];
          const S s = sigmoid(xv);
          px->g[i] += self.g[i] * s * (S(1) + xv * (S(1) - s));
        }
      });
}

template <class S>
Tensor<S> exp(const Tensor<S>& x) {
  std::vector<S> out(x.values());
  for (auto& v : out) v = std::exp(v);
  return Tensor<S>::make_op(x.shape(), std::move(out), {x},
                            [px = x.impl_ptr()](ImplT<S>& self) {
                              if (!px->track) return;
                              px->ensure_grad();
                              for (std::size_t i = 0; i < self.g.size(); ++i)
                                px->g[i] += self.g[i] * self.v[i];
                            });
}

template <class S>
Tensor<S> log(const Tensor<S>& x) {
  std::vector<S> out(x.values());
  for (auto& v : out) {
    if (!(v > S(0))) throw DomainError("log: non-positive input");
    v = std::log(v);
  }
  return Tensor<S>::make_op(x.shape(), std::move(out), {x},
                            [px = x.impl_ptr()](ImplT<S>& self) {
                              if (!px->track) return;
                              px->ensure_grad();
                              for (std::size_t i = 0; i < self.g.size(); ++i)
                                px->g[i] += self.g[i] / px->v[i];
                            });
}

template <class S>
Tensor<S> sum_all(const Tensor<S>& x) {
  S acc = S(0);
  for (auto v : x.values()) acc += v;
  return Tensor<S>::make_op(Shape{1}, std::vector<S>{acc}, {x},
                            [px = x.impl_ptr()](ImplT<S>& self) {
                              if (!px->track) return;
                              px->ensure_grad();
                              for (auto& g : px->g) g += self.g[0];
                            });
}

template <class S>
Tensor<S> mean_all(const Tensor<S>& x) {
  if (x.numel() == 0) throw ShapeError("mean_all: empty tensor");
  S acc = S(0);
  for (auto v : x.values()) acc += v;
  const S inv = S(1) / static_cast<S>(x.numel());
  return Tensor<S>::make_op(Shape{1}, std::vector<S>{acc * inv}, {x},
                            [px = x.impl_ptr(), inv](ImplT<S>& self) {
                              if (!px->track) return;
                              px->ensure_grad();
                              for (auto& g : px->g) g += self.g[0] * inv;
                            });
}

template <class S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const auto m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) throw ShapeError("matmul: inner dims differ");
  std::vector<S> out(static_cast<std::size_t>(m * n));
  EMap<S>(out.data(), m, n).noalias() =
      ECMap<S>(a.data(), m, k) * ECMap<S>(b.data(), k, n);
  return Tensor<S>::make_op(
      Shape{m, n}, std::move(out), {a, b},
      [pa = a.impl_ptr(), pb = b.impl_ptr(), m, k, n](ImplT<S>& self) {
        ECMap<S> g(self.g.data(), m, n);
        if (pa->track) {
          pa->ensure_grad();
          EMap<S>(pa->g.data(), m, k).noalias() +=
              g * ECMap<S>(pb->v.data(), k, n).transpose();
        }
        if (pb->track) {
          pb->ensure_grad();
          EMap<S>(pb->g.data(), k, n).noalias() +=
              ECMap<S>(pa->v.data(), m, k).transpose() * g;
        }
      });
}

template <class S>
Tensor<S> linear(const Tensor<S>& x, const Tensor<S>& w,
                 const Tensor<S>& bias) {
  require_rank(x, 2, "linear");
  require_rank(w, 2, "linear");
  require_rank(bias, 1, "linear");
  const auto n = x.dim(0), k = x.dim(1), o = w.dim(0);
  if (w.dim(1) != k) throw ShapeError("linear: weight in_features mismatch");
  if (bias.dim(0) != o) throw ShapeError("linear: bias size mismatch");
  std::vector<S> out(static_cast<std::size_t>(n * o));
  {
    EMap<S> y(out.data(), n, o);
    y.noalias() = ECMap<S>(x.data(), n, k) *
                  ECMap<S>(w.data(), o, k).transpose();
    y.rowwise() +=
        Eigen::Map<const Eigen::RowVector<S, Eigen::Dynamic>>(bias.data(), o);
  }
  return Tensor<S>::make_op(
      Shape{n, o}, std::move(out), {x, w, bias},
      [px = x.impl_ptr(), pw = w.impl_ptr(), pbias = bias.impl_ptr(), n, k,
       o](ImplT<S>& self) {
        ECMap<S> g(self.g.data(), n, o);
        if (px->track) {
          px->ensure_grad();
          EMap<S>(px->g.data(), n, k).noalias() +=
              g * ECMap<S>(pw->v.data(), o, k);
        }
        if (pw->track) {
          pw->ensure_grad();
          EMap<S>(pw->g.data(), o, k).noalias() +=
              g.transpose() * ECMap<S>(px->v.data(), n, k);
        }
        if (pbias->track) {
          pbias->ensure_grad();
          Eigen::Map<Eigen::RowVector<S, Eigen::Dynamic>>(pbias->g.data(), o) +=
              g.colwise().sum();
        }
      });
}

template <class S>
Tensor<S> transpose2d(const Tensor<S>& x) {
  require_rank(x, 2, "transpose2d");
  const auto m = x.dim(0), n = x.dim(1);
  std::vector<S> out(static_cast<std::size_t>(m * n));
  EMap<S>(out.data(), n, m) = ECMap<S>(x.data(), m, n).transpose();
  return Tensor<S>::make_op(Shape{n, m}, std::move(out), {x},
                            [px = x.impl_ptr(), m, n](ImplT<S>& self) {
                              if (!px->track) return;
                              px->ensure_grad();
                              EMap<S>(px->g.data(), m, n) +=
                                  ECMap<S>(self.g.data(), n, m).transpose();
                            });
}

template <class S>
Tensor<S> slice_cols(const Tensor<S>& x, std::int64_t c0, std::int64_t c1) {
  require_rank(x, 2, "slice_cols");
  const auto m = x.dim(0), n = x.dim(1);
  if (c0 < 0 || c1 > n || c0 >= c1)
    throw ShapeError("slice_cols: bad column range");
  const auto w = c1 - c0;
  std::vector<S> out(static_cast<std::size_t>(m * w));
  EMap<S>(out.data(), m, w) = ECMap<S>(x.data(), m, n).middleCols(c0, w);
  return Tensor<S>::make_op(
      Shape{m, w}, std::move(out), {x},
      [px = x.impl_ptr(), m, n, c0, w](ImplT<S>& self) {
        if (!px->track) return;
        px->ensure_grad();
        EMap<S>(px->g.data(), m, n).middleCols(c0, w) +=
            ECMap<S>(self.g.data(), m, w);
      });
}

template <class S>
Tensor<S> concat_cols(const std::vector<Tensor<S>>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const auto m = parts[0].dim(0);
  std::int64_t n = 0;
  for (const auto& p : parts) {
    require_rank(p, 2, "concat_cols");
    if (p.dim(0) != m) throw ShapeError("concat_cols: row count mismatch");
    n += p.dim(1);
  }
  std::vector<S> out(static_cast<std::size_t>(m * n));
  std::vector<std::int64_t> offs;
  offs.reserve(parts.size());
  {
    EMap<S> y(out.data(), m, n);
    std::int64_t at = 0;
    for (const auto& p : parts) {
      offs.push_back(at);
      y.middleCols(at, p.dim(1)) = ECMap<S>(p.data(), m, p.dim(1));
      at += p.dim(1);
    }
  }
  return Tensor<S>::make_op(
      Shape{m, n}, std::move(out), parts,
      [offs, m, n](ImplT<S>& self) {
        ECMap<S> g(self.g.data(), m, n);
        for (std::size_t i = 0; i < self.parents.size(); ++i) {
          auto& p = *self.parents[i];
          if (!p.track) continue;
          p.ensure_grad();
          const auto w = p.shape[1];
          EMap<S>(p.g.data(), m, w) += g.middleCols(offs[i], w);
        }
      });
}

template <class S>
Tensor<S> softmax_rows(const Tensor<S>& x,
                       const std::vector<std::uint8_t>* valid_cols) {
  require_rank(x, 2, "softmax_rows");
  const auto m = x.dim(0), n = x.dim(1);
  std::vector<std::uint8_t> mask;
  if (valid_cols) {
    if (static_cast<std::int64_t>(valid_cols->size()) != n)
      throw ShapeError("softmax_rows: mask length mismatch");
    mask = *valid_cols;
    bool any = false;
    for (auto b : mask) any = any || b;
    if (!any) throw InputError("softmax_rows: mask leaves no valid column");
  }
  std::vector<S> out(static_cast<std::size_t>(m * n), S(0));
  const S* xv = x.data();
  for (std::int64_t r = 0; r < m; ++r) {
    const S* row = xv + r * n;
    S* yrow = out.data() + r * n;
    S mx = -std::numeric_limits<S>::infinity();
    for (std::int64_t c = 0; c < n; ++c)
      if (mask.empty() || mask[c]) mx = std::max(mx, row[c]);
    S denom = S(0);
    for (std::int64_t c = 0; c < n; ++c)
      if (mask.empty() || mask[c]) {
        yrow[c] = std::exp(row[c] - mx);
        denom += yrow[c];
      }
    for (std::int64_t c = 0; c < n; ++c) yrow[c] /= denom;
  }
  return Tensor<S>::make_op(
      Shape{m, n}, std::move(out), {x},
      [px = x.impl_ptr(), m, n](ImplT<S>& self) {
        if (!px->track) return;
        px->ensure_grad();
        for (std::int64_t r = 0; r < m; ++r) {
          const S* y = self.v.data() + r * n;
          const S* g = self.g.data() + r * n;
          S dot = S(0);
          for (std::int64_t c = 0; c < n; ++c) dot += g[c] * y[c];
          S* dx = px->g.data() + r * n;
          for (std::int64_t c = 0; c < n; ++c) dx[c] += y[c] * (g[c] - dot);
        }
      });
}

template <class S>
Tensor<S> select0(const Tensor<S>& x, std::int64_t index) {
  if (x.rank() < 1) throw ShapeError("select0: rank 0 input");
  const auto d0 = x.dim(0);
  if (index < 0 || index >= d0) throw ShapeError("select0: index out of range");
  Shape rest(x.shape().begin() + 1, x.shape().end());
  const auto block = shape_numel(rest);
  std::vector<S> out(x.values().begin() + index * block,
                     x.values().begin() + (index + 1) * block);
  return Tensor<S>::make_op(std::move(rest), std::move(out), {x},
                            [px = x.impl_ptr(), index, block](ImplT<S>& self) {
                              if (!px->track) return;
                              px->ensure_grad();
                              S* dst = px->g.data() + index * block;
                              for (std::int64_t i = 0; i < block; ++i)
                                dst[i] += self.g[i];
                            });
}

template <class S>
Tensor<S> stack0(const std::vector<Tensor<S>>& parts) {
  if (parts.empty()) throw ShapeError("stack0: no inputs");
  const Shape& inner = parts[0].shape();
  for (const auto& p : parts)
    if (p.shape() != inner) throw ShapeError("stack0: shape mismatch");
  const auto block = shape_numel(inner);
  Shape shape;
  shape.push_back(static_cast<std::int64_t>(parts.size()));
  shape.insert(shape.end(), inner.begin(), inner.end());
  std::vector<S> out;
  out.reserve(static_cast<std::size_t>(block) * parts.size());
  for (const auto& p : parts)
    out.insert(out.end(), p.values().begin(), p.values().end());
  return Tensor<S>::make_op(std::move(shape), std::move(out), parts,
                            [block](ImplT<S>& self) {
                              for (std::size_t i = 0; i < self.parents.size();
                                   ++i) {
                                auto& p = *self.parents[i];
                                if (!p.track) continue;
                                p.ensure_grad();
                                const S* src = self.g.data() + i * block;
                                for (std::int64_t j = 0; j < block; ++j)
                                  p.g[j] += src[j];
                              }
                            });
}

template <class S>
Tensor<S> reshape(const Tensor<S>& x, Shape shape) {
  if (shape_numel(shape) != x.numel())
    throw ShapeError("reshape: element count mismatch");
  std::vector<S> out(x.values());
  return Tensor<S>::make_op(std::move(shape), std::move(out), {x},
                            [px = x.impl_ptr()](ImplT<S>& self) {
                              if (!px->track) return;
                              px->ensure_grad();
                              for (std::size_t i = 0; i < self.g.size(); ++i)
                                px->g[i] += self.g[i];
                            });
}

template <class S>
Tensor<S> conv1d(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& bias,
                 std::int64_t stride, std::int64_t pad_left,
                 std::int64_t pad_right) {
  require_rank(x, 3, "conv1d");
  require_rank(w, 3, "conv1d");
  require_rank(bias, 1, "conv1d");
  if (stride < 1) throw ParamError("conv1d: stride must be positive");
  if (pad_left < 0 || pad_right < 0)
    throw ParamError("conv1d: negative padding");
  const auto b = x.dim(0), c_in = x.dim(1), l_in = x.dim(2);
  const auto c_out = w.dim(0), k = w.dim(2);
  if (w.dim(1) != c_in) throw ShapeError("conv1d: channel mismatch");
  if (bias.dim(0) != c_out) throw ShapeError("conv1d: bias size mismatch");
  const auto l_out = (l_in + pad_left + pad_right - k) / stride + 1;
  if (l_in + pad_left + pad_right < k || l_out < 1)
    throw ShapeError("conv1d: kernel longer than padded input");

  std::vector<S> packed;
  pack_taps(w.data(), c_out, c_in, k, packed);
  std::vector<S> out(static_cast<std::size_t>(b * c_out * l_out));
  for (std::int64_t i = 0; i < b; ++i) {
    S* y = out.data() + i * c_out * l_out;
    for (std::int64_t co = 0; co < c_out; ++co)
      std::fill(y + co * l_out, y + (co + 1) * l_out, bias.data()[co]);
    conv_forward_one(x.data() + i * c_in * l_in, y, packed.data(), c_in, l_in,
                     c_out, l_out, k, stride, pad_left);
  }
  return Tensor<S>::make_op(
      Shape{b, c_out, l_out}, std::move(out), {x, w, bias},
      [px = x.impl_ptr(), pw = w.impl_ptr(), pbias = bias.impl_ptr(), b, c_in,
       l_in, c_out, l_out, k, stride, pad_left](ImplT<S>& self) {
        std::vector<S> packed;
        pack_taps(pw->v.data(), c_out, c_in, k, packed);
        std::vector<S> dpacked;
        if (pw->track) {
          pw->ensure_grad();
          dpacked.assign(packed.size(), S(0));
        }
        if (px->track) px->ensure_grad();
        std::vector<S> scratch;
        for (std::int64_t i = 0; i < b; ++i) {
          conv_backward_one(px->v.data() + i * c_in * l_in,
                            self.g.data() + i * c_out * l_out, packed.data(),
                            px->track ? px->g.data() + i * c_in * l_in
                                      : nullptr,
                            pw->track ? dpacked.data() : nullptr, c_in, l_in,
                            c_out, l_out, k, stride, pad_left, scratch);
        }
        if (pw->track)
          unpack_taps_add(dpacked.data(), c_out, c_in, k, pw->g.data());
        if (pbias->track) {
          pbias->ensure_grad();
          for (std::int64_t i = 0; i < b; ++i)
            for (std::int64_t co = 0; co < c_out; ++co) {
              const S* row = self.g.data() + (i * c_out + co) * l_out;
              S acc = S(0);
              for (std::int64_t t = 0; t < l_out; ++t) acc += row[t];
              pbias->g[co] += acc;
            }
        }
      });
}

template <class S>
Tensor<S> mixed_conv1d(const Tensor<S>& x, const Tensor<S>& bank,
                       const Tensor<S>& bias, const Tensor<S>& mix,
                       std::int64_t pad_left, std::int64_t pad_right) {
  require_rank(x, 3, "mixed_conv1d");
  require_rank(bank, 4, "mixed_conv1d");
  require_rank(bias, 1, "mixed_conv1d");
  require_rank(mix, 2, "mixed_conv1d");
  const auto b = x.dim(0), c_in = x.dim(1), l_in = x.dim(2);
  const auto m = bank.dim(0), c_out = bank.dim(1), k = bank.dim(3);
  if (bank.dim(2) != c_in) throw ShapeError("mixed_conv1d: channel mismatch");
  if (bias.dim(0) != c_out)
    throw ShapeError("mixed_conv1d: bias size mismatch");
  if (mix.dim(0) != b || mix.dim(1) != m)
    throw ShapeError("mixed_conv1d: mix shape mismatch");
  const auto l_out = l_in + pad_left + pad_right - k + 1;
  if (l_out < 1) throw ShapeError("mixed_conv1d: kernel longer than input");

  const auto ksz = c_out * c_in * k;
  std::vector<S> wmix(static_cast<std::size_t>(ksz));
  std::vector<S> packed;
  std::vector<S> out(static_cast<std::size_t>(b * c_out * l_out));
  for (std::int64_t i = 0; i < b; ++i) {
    std::fill(wmix.begin(), wmix.end(), S(0));
    for (std::int64_t j = 0; j < m; ++j) {
      const S c = mix.data()[i * m + j];
      const S* src = bank.data() + j * ksz;
      for (std::int64_t e = 0; e < ksz; ++e) wmix[e] += c * src[e];
    }
    pack_taps(wmix.data(), c_out, c_in, k, packed);
    S* y = out.data() + i * c_out * l_out;
    for (std::int64_t co = 0; co < c_out; ++co)
      std::fill(y + co * l_out, y + (co + 1) * l_out, bias.data()[co]);
    conv_forward_one(x.data() + i * c_in * l_in, y, packed.data(), c_in, l_in,
                     c_out, l_out, k, std::int64_t(1), pad_left);
  }
  return Tensor<S>::make_op(
      Shape{b, c_out, l_out}, std::move(out), {x, bank, bias, mix},
      [px = x.impl_ptr(), pbank = bank.impl_ptr(), pbias = bias.impl_ptr(),
       pmix = mix.impl_ptr(), b, c_in, l_in, m, c_out, l_out, k, pad_left,
       ksz](ImplT<S>& self) {
        if (px->track) px->ensure_grad();
        if (pbank->track) pbank->ensure_grad();
        if (pmix->track) pmix->ensure_grad();
        const bool need_dw = pbank->track || pmix->track;
        std::vector<S> wmix(static_cast<std::size_t>(ksz));
        std::vector<S> packed, dpacked, dwflat, scratch;
        for (std::int64_t i = 0; i < b; ++i) {
          std::fill(wmix.begin(), wmix.end(), S(0));
          for (std::int64_t j = 0; j < m; ++j) {
            const S c = pmix->v[i * m + j];
            const S* src = pbank->v.data() + j * ksz;
            for (std::int64_t e = 0; e < ksz; ++e) wmix[e] += c * src[e];
          }
          pack_taps(wmix.data(), c_out, c_in, k, packed);
          if (need_dw) dpacked.assign(packed.size(), S(0));
          conv_backward_one(px->v.data() + i * c_in * l_in,
                            self.g.data() + i * c_out * l_out, packed.data(),
                            px->track ? px->g.data() + i * c_in * l_in
                                      : nullptr,
                            need_dw ? dpacked.data() : nullptr, c_in, l_in,
                            c_out, l_out, k, std::int64_t(1), pad_left,
                            scratch);
          if (need_dw) {
            dwflat.assign(static_cast<std::size_t>(ksz), S(0));
            unpack_taps_add(dpacked.data(), c_out, c_in, k, dwflat.data());
            for (std::int64_t j = 0; j < m; ++j) {
              const S* bj = pbank->v.data() + j * ksz;
              if (pmix->track) {
                S acc = S(0);
                for (std::int64_t e = 0; e < ksz; ++e)
                  acc += bj[e] * dwflat[e];
                pmix->g[i * m + j] += acc;
              }
              if (pbank->track) {
                const S c = pmix->v[i * m + j];
                S* dst = pbank->g.data() + j * ksz;
                for (std::int64_t e = 0; e < ksz; ++e)
                  dst[e] += c * dwflat[e];
              }
            }
          }
        }
        if (pbias->track) {
          pbias->ensure_grad();
          for (std::int64_t i = 0; i < b; ++i)
            for (std::int64_t co = 0; co < c_out; ++co) {
              const S* row = self.g.data() + (i * c_out + co) * l_out;
              S acc = S(0);
              for (std::int64_t t = 0; t < l_out; ++t) acc += row[t];
              pbias->g[co] += acc;
            }
        }
      });
}

template <class S>
Tensor<S> upsample_nearest(const Tensor<S>& x, std::int64_t factor) {
  require_rank(x, 3, "upsample_nearest");
  if (factor < 1) throw ParamError("upsample_nearest: factor must be positive");
  const auto b = x.dim(0), c = x.dim(1), l = x.dim(2);
  const auto lo = l * factor;
  std::vector<S> out(static_cast<std::size_t>(b * c * lo));
  for (std::int64_t row = 0; row < b * c; ++row) {
    const S* src = x.data() + row * l;
    S* dst = out.data() + row * lo;
    for (std::int64_t t = 0; t < l; ++t)
      std::fill(dst + t * factor, dst + (t + 1) * factor, src[t]);
  }
  return Tensor<S>::make_op(
      Shape{b, c, lo}, std::move(out), {x},
      [px = x.impl_ptr(), rows = b * c, l, factor](ImplT<S>& self) {
        if (!px->track) return;
        px->ensure_grad();
        const auto lo = l * factor;
        for (std::int64_t row = 0; row < rows; ++row) {
          const S* g = self.g.data() + row * lo;
          S* dst = px->g.data() + row * l;
          for (std::int64_t t = 0; t < l; ++t) {
            S acc = S(0);
            for (std::int64_t j = 0; j < factor; ++j) acc += g[t * factor + j];
            dst[t] += acc;
          }
        }
      });
}

template <class S>
Tensor<S> group_norm(const Tensor<S>& x, const Tensor<S>& gamma,
                     const Tensor<S>& beta, std::int64_t groups, double eps) {
  require_rank(x, 3, "group_norm");
  require_rank(gamma, 1, "group_norm");
  require_rank(beta, 1, "group_norm");
  const auto b = x.dim(0), c = x.dim(1), l = x.dim(2);
  if (groups < 1 || c % groups != 0)
    throw ParamError("group_norm: groups must divide channels");
  if (gamma.dim(0) != c || beta.dim(0) != c)
    throw ShapeError("group_norm: affine size mismatch");
  const auto cg = c / groups;
  const auto n = cg * l;
  std::vector<S> out(x.values().size());
  std::vector<S> mean(static_cast<std::size_t>(b * groups));
  std::vector<S> rstd(static_cast<std::size_t>(b * groups));
  for (std::int64_t i = 0; i < b; ++i)
    for (std::int64_t g = 0; g < groups; ++g) {
      const S* src = x.data() + (i * c + g * cg) * l;
      double mu = 0;
      for (std::int64_t e = 0; e < n; ++e) mu += src[e];
      mu /= static_cast<double>(n);
      double var = 0;
      for (std::int64_t e = 0; e < n; ++e) {
        const double d = src[e] - mu;
        var += d * d;
      }
      var /= static_cast<double>(n);
      const S r = static_cast<S>(1.0 / std::sqrt(var + eps));
      mean[i * groups + g] = static_cast<S>(mu);
      rstd[i * groups + g] = r;
      S* dst = out.data() + (i * c + g * cg) * l;
      for (std::int64_t ch = 0; ch < cg; ++ch) {
        const S ga = gamma.data()[g * cg + ch];
        const S be = beta.data()[g * cg + ch];
        for (std::int64_t t = 0; t < l; ++t) {
          const S xh = (src[ch * l + t] - static_cast<S>(mu)) * r;
          dst[ch * l + t] = ga * xh + be;
        }
      }
    }
  return Tensor<S>::make_op(
      x.shape(), std::move(out), {x, gamma, beta},
      [px = x.impl_ptr(), pg = gamma.impl_ptr(), pb = beta.impl_ptr(), b, c, l,
       groups, cg, n, mean = std::move(mean),
       rstd = std::move(rstd)](ImplT<S>& self) {
        if (px->track) px->ensure_grad();
        if (pg->track) pg->ensure_grad();
        if (pb->track) pb->ensure_grad();
        for (std::int64_t i = 0; i < b; ++i)
          for (std::int64_t g = 0; g < groups; ++g) {
            const S mu = mean[i * groups + g];
            const S r = rstd[i * groups + g];
            const S* xv = px->v.data() + (i * c + g * cg) * l;
            const S* go = self.g.data() + (i * c + g * cg) * l;
            double sum_gh = 0, sum_gh_xh = 0;
            for (std::int64_t ch = 0; ch < cg; ++ch) {
              const S ga = pg->v[g * cg + ch];
              double dga = 0, dbe = 0;
              for (std::int64_t t = 0; t < l; ++t) {
                const S xh = (xv[ch * l + t] - mu) * r;
                const S gg = go[ch * l + t];
                dbe += gg;
                dga += gg * xh;
                sum_gh += gg * ga;
                sum_gh_xh += gg * ga * xh;
              }
              if (pg->track) pg->g[g * cg + ch] += static_cast<S>(dga);
              if (pb->track) pb->g[g * cg + ch] += static_cast<S>(dbe);
            }
            if (px->track) {
              const S m1 = static_cast<S>(sum_gh / static_cast<double>(n));
              const S m2 = static_cast<S>(sum_gh_xh / static_cast<double>(n));
              S* dx = px->g.data() + (i * c + g * cg) * l;
              for (std::int64_t ch = 0; ch < cg; ++ch) {
                const S ga = pg->v[g * cg + ch];
                for (std::int64_t t = 0; t < l; ++t) {
                  const S xh = (xv[ch * l + t] - mu) * r;
                  dx[ch * l + t] +=
                      r * (go[ch * l + t] * ga - m1 - xh * m2);
                }
              }
            }
          }
      });
}

template <class S>
Tensor<S> film(const Tensor<S>& x, const Tensor<S>& scale,
               const Tensor<S>& shift) {
  require_rank(x, 3, "film");
  require_rank(scale, 2, "film");
  require_rank(shift, 2, "film");
  const auto b = x.dim(0), c = x.dim(1), l = x.dim(2);
  if (scale.dim(0) != b || scale.dim(1) != c || shift.dim(0) != b ||
      shift.dim(1) != c)
    throw ShapeError("film: modulation shape mismatch");
  std::vector<S> out(x.values().size());
  for (std::int64_t i = 0; i < b; ++i)
    for (std::int64_t ch = 0; ch < c; ++ch) {
      const S sc = scale.data()[i * c + ch];
      const S sh = shift.data()[i * c + ch];
      const S* src = x.data() + (i * c + ch) * l;
      S* dst = out.data() + (i * c + ch) * l;
      for (std::int64_t t = 0; t < l; ++t) dst[t] = sc * src[t] + sh;
    }
  return Tensor<S>::make_op(
      x.shape(), std::move(out), {x, scale, shift},
      [px = x.impl_ptr(), psc = scale.impl_ptr(), psh = shift.impl_ptr(), b, c,
       l](ImplT<S>& self) {
        if (px->track) px->ensure_grad();
        if (psc->track) psc->ensure_grad();
        if (psh->track) psh->ensure_grad();
        for (std::int64_t i = 0; i < b; ++i)
          for (std::int64_t ch = 0; ch < c; ++ch) {
            const S sc = psc->v[i * c + ch];
            const S* xv = px->v.data() + (i * c + ch) * l;
            const S* go = self.g.data() + (i * c + ch) * l;
            if (px->track) {
              S* dx = px->g.data() + (i * c + ch) * l;
              for (std::int64_t t = 0; t < l; ++t) dx[t] += go[t] * sc;
            }
            if (psc->track || psh->track) {
              double dsc = 0, dsh = 0;
              for (std::int64_t t = 0; t < l; ++t) {
                dsc += go[t] * xv[t];
                dsh += go[t];
              }
              if (psc->track) psc->g[i * c + ch] += static_cast<S>(dsc);
              if (psh->track) psh->g[i * c + ch] += static_cast<S>(dsh);
            }
          }
      });
}

template <class S>
Tensor<S> concat_channels(const std::vector<Tensor<S>>& parts) {
  if (parts.empty()) throw ShapeError("concat_channels: no inputs");
  const auto b = parts[0].dim(0), l = parts[0].dim(2);
  std::int64_t c = 0;
  std::vector<std::int64_t> offs;
  for (const auto& p : parts) {
    require_rank(p, 3, "concat_channels");
    if (p.dim(0) != b || p.dim(2) != l)
      throw ShapeError("concat_channels: batch or length mismatch");
    offs.push_back(c);
    c += p.dim(1);
  }
  std::vector<S> out(static_cast<std::size_t>(b * c * l));
  for (std::int64_t i = 0; i < b; ++i)
    for (std::size_t pi = 0; pi < parts.size(); ++pi) {
      const auto pc = parts[pi].dim(1);
      const S* src = parts[pi].data() + i * pc * l;
      S* dst = out.data() + (i * c + offs[pi]) * l;
      std::copy(src, src + pc * l, dst);
    }
  return Tensor<S>::make_op(
      Shape{b, c, l}, std::move(out), parts,
      [offs, b, c, l](ImplT<S>& self) {
        for (std::size_t pi = 0; pi < self.parents.size(); ++pi) {
          auto& p = *self.parents[pi];
          if (!p.track) continue;
          p.ensure_grad();
          const auto pc = p.shape[1];
          for (std::int64_t i = 0; i < b; ++i) {
            const S* src = self.g.data() + (i * c + offs[pi]) * l;
            S* dst = p.g.data() + i * pc * l;
            for (std::int64_t e = 0; e < pc * l; ++e) dst[e] += src[e];
          }
        }
      });
}

template <class S>
Tensor<S> positional_rows(std::int64_t n, std::int64_t d) {
  if (n < 1 || d < 1) throw ShapeError("positional_rows: bad shape");
  std::vector<S> pe(static_cast<std::size_t>(n * d));
  for (std::int64_t t = 0; t < n; ++t)
    for (std::int64_t i = 0; i < d; i += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) / d);
      pe[t * d + i] = static_cast<S>(std::sin(t * freq));
      if (i + 1 < d) pe[t * d + i + 1] = static_cast<S>(std::cos(t * freq));
    }
  return Tensor<S>::from_vector(Shape{n, d}, std::move(pe));
}

#define DIFFTTS_INSTANTIATE_OPS(S)                                            \
  template Tensor<S> add<S>(const Tensor<S>&, const Tensor<S>&);              \
  template Tensor<S> sub<S>(const Tensor<S>&, const Tensor<S>&);              \
  template Tensor<S> mul<S>(const Tensor<S>&, const Tensor<S>&);              \
  template Tensor<S> div<S>(const Tensor<S>&, const Tensor<S>&);              \
  template Tensor<S> add_scalar<S>(const Tensor<S>&, S);                      \
  template Tensor<S> mul_scalar<S>(const Tensor<S>&, S);                      \
  template Tensor<S> silu<S>(const Tensor<S>&);                               \
  template Tensor<S> exp<S>(const Tensor<S>&);                                \
  template Tensor<S> log<S>(const Tensor<S>&);                                \
  template Tensor<S> sum_all<S>(const Tensor<S>&);                            \
  template Tensor<S> mean_all<S>(const Tensor<S>&);                           \
  template Tensor<S> matmul<S>(const Tensor<S>&, const Tensor<S>&);           \
  template Tensor<S> linear<S>(const Tensor<S>&, const Tensor<S>&,            \
                               const Tensor<S>&);                             \
  template Tensor<S> transpose2d<S>(const Tensor<S>&);                        \
  template Tensor<S> slice_cols<S>(const Tensor<S>&, std::int64_t,            \
                                   std::int64_t);                             \
  template Tensor<S> concat_cols<S>(const std::vector<Tensor<S>>&);           \
  template Tensor<S> softmax_rows<S>(const Tensor<S>&,                        \
                                     const std::vector<std::uint8_t>*);       \
  template Tensor<S> select0<S>(const Tensor<S>&, std::int64_t);              \
  template Tensor<S> stack0<S>(const std::vector<Tensor<S>>&);                \
  template Tensor<S> reshape<S>(const Tensor<S>&, Shape);                     \
  template Tensor<S> conv1d<S>(const Tensor<S>&, const Tensor<S>&,            \
                               const Tensor<S>&, std::int64_t, std::int64_t,  \
                               std::int64_t);                                 \
  template Tensor<S> mixed_conv1d<S>(const Tensor<S>&, const Tensor<S>&,      \
                                     const Tensor<S>&, const Tensor<S>&,      \
                                     std::int64_t, std::int64_t);             \
  template Tensor<S> upsample_nearest<S>(const Tensor<S>&, std::int64_t);     \
  template Tensor<S> group_norm<S>(const Tensor<S>&, const Tensor<S>&,        \
                                   const Tensor<S>&, std::int64_t, double);   \
  template Tensor<S> film<S>(const Tensor<S>&, const Tensor<S>&,              \
                             const Tensor<S>&);                               \
  template Tensor<S> concat_channels<S>(const std::vector<Tensor<S>>&);       \
  template Tensor<S> positional_rows<S>(std::int64_t, std::int64_t);

DIFFTTS_INSTANTIATE_OPS(float)
DIFFTTS_INSTANTIATE_OPS(double)

#undef DIFFTTS_INSTANTIATE_OPS

}  // namespace ops
}  // namespace difftts
