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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lddgan/tensor.hpp"

namespace lddgan::io {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// Ordered collection of named tensors, the unit a checkpoint stores.
class TensorArchive {
 public:
  void put(std::string name, Tensor tensor);
  bool contains(std::string_view name) const;
  // Throws FormatError (offset 0) when missing.
  const Tensor& get(std::string_view name) const;
  const std::vector<NamedTensor>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<NamedTensor> entries_;
};

inline constexpr std::uint32_t kFormatVersion = 1;

// "LDDG" | u32 version | u32 count | per tensor: u16 name length, name,
// u8 dtype, u8 rank, u32 dims[rank], little-endian data.
std::string encode_checkpoint(const TensorArchive& archive);
TensorArchive decode_checkpoint(std::string_view bytes);

void save_checkpoint_file(const std::filesystem::path& path, const TensorArchive& archive);
TensorArchive load_checkpoint_file(const std::filesystem::path& path);

// Single-tensor variant: "LDDT" | u32 version | u8 dtype | u8 rank | dims | data.
std::string encode_tensor(const Tensor& t);
Tensor decode_tensor(std::string_view bytes);

void save_tensor_file(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor_file(const std::filesystem::path& path);

// Whole-file helpers; IoError names the path on failure.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace lddgan::io
