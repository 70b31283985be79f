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

#include "lddgan/params.hpp"

#include <algorithm>

#include "lddgan/error.hpp"

namespace lddgan {

Var ParamSet::add(std::string name, Tensor init) {
  if (find(name)) throw ConfigError("duplicate parameter name '" + name + "'");
  names_.push_back(std::move(name));
  vars_.push_back(Var::parameter(std::move(init)));
  return vars_.back();
}

const Var* ParamSet::find(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  return it == names_.end() ? nullptr : &vars_[static_cast<std::size_t>(it - names_.begin())];
}

std::size_t ParamSet::numel() const {
  std::size_t n = 0;
  for (const Var& v : vars_) n += v.size();
  return n;
}

std::vector<Tensor> ParamSet::values() const {
  std::vector<Tensor> out;
  out.reserve(vars_.size());
  for (const Var& v : vars_) out.push_back(v.value());
  return out;
}

void ParamSet::set_values(std::span<const Tensor> values) {
  if (values.size() != vars_.size()) {
    throw ShapeError("expected " + std::to_string(vars_.size()) + " parameter tensors, got " +
                     std::to_string(values.size()));
  }
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    if (values[i].shape() != vars_[i].shape()) {
      throw ShapeError("parameter '" + names_[i] + "' expects shape " + shape_str(vars_[i].shape()) +
                       ", got " + shape_str(values[i].shape()));
    }
  }
  for (std::size_t i = 0; i < vars_.size(); ++i) vars_[i].mutable_value() = values[i];
}

}  // namespace lddgan
