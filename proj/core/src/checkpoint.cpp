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

#include "lddgan/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lddgan/error.hpp"

namespace lddgan::io {
namespace {

constexpr std::string_view kCheckpointMagic = "LDDG";
constexpr std::string_view kTensorMagic = "LDDT";

class Writer {
 public:
  void bytes(std::string_view s) { out_.append(s); }
  template <typename U>
  void uint(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void tensor_body(const Tensor& t) {
    out_.push_back(static_cast<char>(t.dtype()));
    if (t.rank() > 255) throw ShapeError("tensor rank exceeds 255");
    out_.push_back(static_cast<char>(t.rank()));
    for (std::size_t d : t.shape()) {
      if (d > 0xffffffffu) throw ShapeError("tensor extent exceeds 32 bits");
      uint<std::uint32_t>(static_cast<std::uint32_t>(d));
    }
    if (t.dtype() == DType::kF32) {
      for (double v : t.data()) uint(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    } else {
      for (double v : t.data()) uint(std::bit_cast<std::uint64_t>(v));
    }
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  std::size_t offset() const { return pos_; }
  bool at_end() const { return pos_ == in_.size(); }

  std::string_view bytes(std::size_t n, const char* what) {
    need(n, what);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  template <typename U>
  U uint(const char* what) {
    need(sizeof(U), what);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return v;
  }
  Tensor tensor_body() {
    const std::size_t start = pos_;
    const auto code = uint<std::uint8_t>("dtype code");
    if (code > 1) throw FormatError("unknown dtype code " + std::to_string(code), start);
    const auto dtype = static_cast<DType>(code);
    const auto rank = uint<std::uint8_t>("rank");
    Shape shape(rank);
    std::size_t numel = 1;
    for (auto& d : shape) {
      const std::size_t at = pos_;
      d = uint<std::uint32_t>("dimension");
      if (d == 0) throw FormatError("zero tensor extent", at);
      numel *= d;
      if (numel > in_.size()) throw FormatError("tensor larger than the file", at);
    }
    const std::size_t width = dtype == DType::kF32 ? 4 : 8;
    need(numel * width, "tensor data");
    std::vector<double> data(numel);
    for (auto& v : data) {
      if (dtype == DType::kF32) {
        v = std::bit_cast<float>(uint<std::uint32_t>("tensor data"));
      } else {
        v = std::bit_cast<double>(uint<std::uint64_t>("tensor data"));
      }
    }
    return Tensor(std::move(shape), std::move(data), dtype);
  }

 private:
  void need(std::size_t n, const char* what) {
    if (in_.size() - pos_ < n) {
      throw FormatError(std::string("truncated input while reading ") + what, pos_);
    }
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

void read_header(Reader& r, std::string_view magic) {
  const auto m = r.bytes(4, "magic");
  if (m != magic) throw FormatError("bad magic, expected '" + std::string(magic) + "'", 0);
  const std::size_t at = r.offset();
  const auto version = r.uint<std::uint32_t>("version");
  if (version != kFormatVersion) {
    throw FormatError("unsupported format version " + std::to_string(version), at);
  }
}

}  // namespace

void TensorArchive::put(std::string name, Tensor tensor) {
  for (auto& e : entries_) {
    if (e.name == name) {
      e.tensor = std::move(tensor);
      return;
    }
  }
  entries_.push_back({std::move(name), std::move(tensor)});
}

bool TensorArchive::contains(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return true;
  }
  return false;
}

const Tensor& TensorArchive::get(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e.tensor;
  }
  throw FormatError("checkpoint has no tensor named '" + std::string(name) + "'", 0);
}

std::string encode_checkpoint(const TensorArchive& archive) {
  Writer w;
  w.bytes(kCheckpointMagic);
  w.uint<std::uint32_t>(kFormatVersion);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(archive.size()));
  for (const auto& e : archive.entries()) {
    if (e.name.size() > 0xffff) throw Error("tensor name too long: " + e.name.substr(0, 32));
    w.uint<std::uint16_t>(static_cast<std::uint16_t>(e.name.size()));
    w.bytes(e.name);
    w.tensor_body(e.tensor);
  }
  return w.take();
}

TensorArchive decode_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  read_header(r, kCheckpointMagic);
  const auto count = r.uint<std::uint32_t>("tensor count");
  TensorArchive archive;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t at = r.offset();
    const auto len = r.uint<std::uint16_t>("name length");
    std::string name(r.bytes(len, "tensor name"));
    if (archive.contains(name)) throw FormatError("duplicate tensor name '" + name + "'", at);
    archive.put(std::move(name), r.tensor_body());
  }
  if (!r.at_end()) throw FormatError("trailing bytes after last tensor", r.offset());
  return archive;
}

std::string encode_tensor(const Tensor& t) {
  Writer w;
  w.bytes(kTensorMagic);
  w.uint<std::uint32_t>(kFormatVersion);
  w.tensor_body(t);
  return w.take();
}

Tensor decode_tensor(std::string_view bytes) {
  Reader r(bytes);
  read_header(r, kTensorMagic);
  Tensor t = r.tensor_body();
  if (!r.at_end()) throw FormatError("trailing bytes after tensor", r.offset());
  return t;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void save_checkpoint_file(const std::filesystem::path& path, const TensorArchive& archive) {
  write_file(path, encode_checkpoint(archive));
}

TensorArchive load_checkpoint_file(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path));
}

void save_tensor_file(const std::filesystem::path& path, const Tensor& t) { write_file(path, encode_tensor(t)); }

Tensor load_tensor_file(const std::filesystem::path& path) { return decode_tensor(read_file(path)); }

}  // namespace lddgan::io
