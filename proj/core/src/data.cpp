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

#include "lddgan/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>
#include <vector>

#include "lddgan/checkpoint.hpp"
#include "lddgan/error.hpp"
#include "lddgan/rng.hpp"

namespace lddgan::data {
namespace {

std::string pgm_error(const std::filesystem::path& path, const std::string& what) {
  return "'" + path.string() + "': " + what;
}

// Reads one header token, skipping whitespace and '#' comments.
std::string next_token(const std::string& s, std::size_t& pos, const std::filesystem::path& path) {
  while (pos < s.size()) {
    if (s[pos] == '#') {
      while (pos < s.size() && s[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(s[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  if (start == pos) throw FormatError(pgm_error(path, "truncated PGM header"), start);
  return s.substr(start, pos - start);
}

std::size_t parse_header_int(const std::string& tok, std::size_t at, const std::filesystem::path& path) {
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
      tok.size() > 9) {
    throw FormatError(pgm_error(path, "bad PGM header value '" + tok + "'"), at);
  }
  return std::stoul(tok);
}

}  // namespace

Tensor generate_25gaussians(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("gaussians25 needs at least one sample");
  RngStream rng = RngStream(seed).derive("gaussians25");
  Tensor out({n, 2});
  for (std::size_t i = 0; i < n; ++i) {
    const auto mode = rng.uniform_int(25);
    const auto noise = rng.normal_pair();
    out[2 * i] = -4.0 + 2.0 * static_cast<double>(mode / 5) + kGaussiansSigma * noise[0];
    out[2 * i + 1] = -4.0 + 2.0 * static_cast<double>(mode % 5) + kGaussiansSigma * noise[1];
  }
  return out;
}

Tensor generate_toy_images(std::size_t n, std::size_t size, std::uint64_t seed) {
  if (n == 0 || size == 0) throw ConfigError("toy image set needs positive count and size");
  RngStream rng = RngStream(seed).derive("toy-images");
  Tensor out({n, size, size, 1});
  const double s = static_cast<double>(size);
  for (std::size_t i = 0; i < n; ++i) {
    const int blobs = 1 + static_cast<int>(rng.uniform_int(3));
    std::vector<double> cx(blobs), cy(blobs), r(blobs), amp(blobs);
    for (int b = 0; b < blobs; ++b) {
      cx[b] = s * (0.2 + 0.6 * rng.uniform());
      cy[b] = s * (0.2 + 0.6 * rng.uniform());
      r[b] = s * (0.12 + 0.12 * rng.uniform());
      amp[b] = 0.6 + 0.4 * rng.uniform();
    }
    for (std::size_t y = 0; y < size; ++y) {
      for (std::size_t x = 0; x < size; ++x) {
        double v = 0.0;
        for (int b = 0; b < blobs; ++b) {
          const double dx = static_cast<double>(x) + 0.5 - cx[b], dy = static_cast<double>(y) + 0.5 - cy[b];
          v += amp[b] * std::exp(-(dx * dx + dy * dy) / (2.0 * r[b] * r[b]));
        }
        out[(i * size + y) * size + x] = 2.0 * std::min(v, 1.0) - 1.0;
      }
    }
  }
  return out;
}

Tensor read_pgm(const std::filesystem::path& path) {
  const std::string s = io::read_file(path);
  std::size_t pos = 0;
  if (next_token(s, pos, path) != "P5") throw FormatError(pgm_error(path, "not a binary PGM (P5)"), 0);
  std::size_t at = pos;
  const std::size_t w = parse_header_int(next_token(s, pos, path), at, path);
  at = pos;
  const std::size_t h = parse_header_int(next_token(s, pos, path), at, path);
  at = pos;
  const std::size_t maxval = parse_header_int(next_token(s, pos, path), at, path);
  if (w == 0 || h == 0) throw FormatError(pgm_error(path, "zero image extent"), at);
  if (maxval == 0 || maxval > 255) {
    throw FormatError(pgm_error(path, "maxval must be in [1, 255], got " + std::to_string(maxval)), at);
  }
  if (pos >= s.size()) throw FormatError(pgm_error(path, "missing pixel data"), pos);
  ++pos;  // single whitespace byte after maxval
  if (s.size() - pos < w * h) throw FormatError(pgm_error(path, "truncated pixel data"), s.size());
  Tensor out({h, w, 1});
  for (std::size_t i = 0; i < w * h; ++i) {
    out[i] = 2.0 * static_cast<double>(static_cast<unsigned char>(s[pos + i])) / static_cast<double>(maxval) - 1.0;
  }
  return out;
}

void write_pgm(const std::filesystem::path& path, const Tensor& image) {
  if (!(image.rank() == 2 || (image.rank() == 3 && image.dim(2) == 1))) {
    throw ShapeError("write_pgm expects [H, W] or [H, W, 1], got " + shape_str(image.shape()));
  }
  const std::size_t h = image.dim(0), w = image.dim(1);
  std::string out = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  for (double v : image.data()) {
    const double c = std::clamp((v + 1.0) * 0.5, 0.0, 1.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0))));
  }
  io::write_file(path, out);
}

void write_pgm_grid(const std::filesystem::path& path, const Tensor& images, std::size_t cols) {
  if (images.rank() != 4 || images.dim(3) != 1) {
    throw ShapeError("write_pgm_grid expects [N, H, W, 1], got " + shape_str(images.shape()));
  }
  const std::size_t n = images.dim(0), h = images.dim(1), w = images.dim(2);
  cols = std::max<std::size_t>(1, std::min(cols, n));
  const std::size_t rows = (n + cols - 1) / cols;
  const std::size_t gh = rows * (h + 1) + 1, gw = cols * (w + 1) + 1;
  Tensor grid({gh, gw}, -1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t oy = (i / cols) * (h + 1) + 1, ox = (i % cols) * (w + 1) + 1;
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) grid[(oy + y) * gw + ox + x] = images[(i * h + y) * w + x];
  }
  write_pgm(path, grid);
}

Tensor load_image_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError("image directory '" + dir.string() + "' not found");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no .pgm files in '" + dir.string() + "'");
  std::vector<double> all;
  Shape first;
  for (const auto& f : files) {
    const Tensor img = read_pgm(f);
    if (first.empty()) first = img.shape();
    if (img.shape() != first) {
      throw ShapeError("'" + f.string() + "' has shape " + shape_str(img.shape()) + ", expected " + shape_str(first));
    }
    all.insert(all.end(), img.data().begin(), img.data().end());
  }
  return Tensor({files.size(), first[0], first[1], 1}, std::move(all));
}

}  // namespace lddgan::data
