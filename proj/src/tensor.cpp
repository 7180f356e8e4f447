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

#include "difftts/tensor.hpp"

#include <atomic>

namespace difftts {
namespace autograd {

namespace {
bool g_grad_enabled = true;
std::atomic<std::uint64_t> g_seq{1};
}  // namespace

bool grad_enabled() { return g_grad_enabled; }
void set_grad_enabled(bool enabled) { g_grad_enabled = enabled; }
std::uint64_t next_seq() { return g_seq.fetch_add(1); }

}  // namespace autograd

template class Tensor<float>;
template class Tensor<double>;

}  // namespace difftts
