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

#ifndef DIFFTTS_TENSOR_HPP
#define DIFFTTS_TENSOR_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <unordered_set>
#include <vector>

#include "difftts/common.hpp"

namespace difftts {

using Shape = std::vector<std::int64_t>;

inline std::int64_t shape_numel(const Shape& s) {
  std::int64_t n = 1;
  for (auto d : s) n *= d;
  return n;
}

namespace autograd {

// Tape recording is process-wide and single-threaded by design; forward
// passes that never call backward() should run under NoGradGuard so
// intermediate buffers are released as soon as their handles die.
bool grad_enabled();
void set_grad_enabled(bool enabled);

class NoGradGuard {
 public:
  NoGradGuard() : prev_(grad_enabled()) { set_grad_enabled(false); }
  ~NoGradGuard() { set_grad_enabled(prev_); }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

std::uint64_t next_seq();

}  // namespace autograd

namespace detail {

template <class S>
struct TensorImpl {
  Shape shape;
  std::vector<S> v;
  std::vector<S> g;  // allocated on first gradient accumulation
  bool requires_grad = false;
  bool track = false;  // participates in the current tape
  std::uint64_t seq = 0;
  std::vector<std::shared_ptr<TensorImpl>> parents;
  std::function<void(TensorImpl&)> backward_fn;

  void ensure_grad() {
    if (g.empty()) g.assign(v.size(), S(0));
  }
};

}  // namespace detail

// Reference-counted dense tensor participating in a reverse-mode tape.
// Values are row-major. Ops live in nn_ops.hpp.
template <class S>
class Tensor {
 public:
  using Impl = detail::TensorImpl<S>;

  Tensor() = default;

  static Tensor zeros(Shape shape) {
    return from_data(std::move(shape), {}, S(0));
  }

  static Tensor full(Shape shape, S value) {
    return from_data(std::move(shape), {}, value);
  }

  static Tensor from_vector(Shape shape, std::vector<S> data) {
    if (static_cast<std::int64_t>(data.size()) != shape_numel(shape))
      throw ShapeError("tensor: data size does not match shape");
    auto t = Tensor(std::make_shared<Impl>());
    t.p_->shape = std::move(shape);
    t.p_->v = std::move(data);
    t.p_->seq = autograd::next_seq();
    return t;
  }

  static Tensor randn(Shape shape, Rng& rng, S stdev = S(1)) {
    auto t = zeros(std::move(shape));
    for (auto& x : t.p_->v) x = static_cast<S>(rng.normal()) * stdev;
    return t;
  }

  bool defined() const { return static_cast<bool>(p_); }
  const Shape& shape() const { return p_->shape; }
  std::int64_t numel() const { return static_cast<std::int64_t>(p_->v.size()); }
  std::int64_t dim(int i) const { return p_->shape.at(i); }
  int rank() const { return static_cast<int>(p_->shape.size()); }

  S* data() { return p_->v.data(); }
  const S* data() const { return p_->v.data(); }
  std::vector<S>& values() { return p_->v; }
  const std::vector<S>& values() const { return p_->v; }

  S item() const {
    if (numel() != 1) throw ShapeError("item(): tensor is not scalar");
    return p_->v[0];
  }

  void set_requires_grad(bool b) {
    p_->requires_grad = b;
    p_->track = b || !p_->parents.empty();
  }
  bool requires_grad() const { return p_->requires_grad; }

  const std::vector<S>& grad() const {
    p_->ensure_grad();
    return p_->g;
  }
  std::vector<S>& grad() {
    p_->ensure_grad();
    return p_->g;
  }
  void zero_grad() {
    if (!p_->g.empty()) std::fill(p_->g.begin(), p_->g.end(), S(0));
  }

  // Reverse-mode sweep from a scalar output. Creation order is a valid
  // topological order of the tape, so nodes run by descending sequence.
  void backward() const {
    if (numel() != 1) throw ShapeError("backward(): output must be scalar");
    std::vector<Impl*> nodes;
    collect(p_.get(), nodes);
    std::sort(nodes.begin(), nodes.end(),
              [](const Impl* a, const Impl* b) { return a->seq > b->seq; });
    p_->ensure_grad();
    p_->g[0] = S(1);
    for (Impl* n : nodes) {
      if (n->backward_fn && !n->g.empty()) n->backward_fn(*n);
    }
  }

  Impl* impl() const { return p_.get(); }
  const std::shared_ptr<Impl>& impl_ptr() const { return p_; }

  // Assembles an op result node; records parents and the backward
  // closure only while grad mode is on and some parent is tracked.
  static Tensor make_op(Shape shape, std::vector<S> value,
                        std::vector<Tensor> parents,
                        std::function<void(Impl&)> backward_fn) {
    auto t = from_data(std::move(shape), std::move(value), S(0));
    if (autograd::grad_enabled()) {
      bool any = false;
      for (const auto& p : parents) any = any || p.p_->track;
      if (any) {
        t.p_->track = true;
        t.p_->parents.reserve(parents.size());
        for (auto& p : parents) t.p_->parents.push_back(p.p_);
        t.p_->backward_fn = std::move(backward_fn);
      }
    }
    return t;
  }

 private:
  explicit Tensor(std::shared_ptr<Impl> p) : p_(std::move(p)) {}

  static Tensor from_data(Shape shape, std::vector<S> data, S fill) {
    auto t = Tensor(std::make_shared<Impl>());
    const auto n = shape_numel(shape);
    t.p_->shape = std::move(shape);
    if (data.empty())
      t.p_->v.assign(static_cast<std::size_t>(n), fill);
    else
      t.p_->v = std::move(data);
    t.p_->seq = autograd::next_seq();
    return t;
  }

  static void collect(Impl* root, std::vector<Impl*>& out) {
    std::vector<Impl*> stack{root};
    std::unordered_set<Impl*> seen;
    while (!stack.empty()) {
      Impl* n = stack.back();
      stack.pop_back();
      if (!seen.insert(n).second) continue;
      out.push_back(n);
      for (auto& p : n->parents) stack.push_back(p.get());
    }
  }

  std::shared_ptr<Impl> p_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace difftts

#endif  // DIFFTTS_TENSOR_HPP
