// Copyright 2026 The LDDGAN Authors.
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

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lddgan/autograd.hpp"

namespace lddgan {

// Ordered, named collection of trainable leaves. Names are stable and are the
// keys written to checkpoints.
class ParamSet {
 public:
  Var add(std::string name, Tensor init);

  std::size_t size() const { return vars_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  const std::vector<std::string>& names() const { return names_; }
  std::span<const Var> vars() const { return vars_; }
  Var& var(std::size_t i) { return vars_[i]; }
  const Var& var(std::size_t i) const { return vars_[i]; }
  const Var* find(std::string_view name) const;
  std::size_t numel() const;

  std::vector<Tensor> values() const;
  // Overwrites every parameter; throws ShapeError naming the first mismatch.
  void set_values(std::span<const Tensor> values);

 private:
  std::vector<std::string> names_;
  std::vector<Var> vars_;
};

}  // namespace lddgan
