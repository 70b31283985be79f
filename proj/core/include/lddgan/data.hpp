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

#include <cstdint>
#include <filesystem>

#include "lddgan/tensor.hpp"

namespace lddgan::data {

// [n, 2] draws from the uniform mixture of 25 Gaussians centred on
// {-4, -2, 0, 2, 4}^2 with standard deviation 0.05.
Tensor generate_25gaussians(std::size_t n, std::uint64_t seed);
inline constexpr double kGaussiansSigma = 0.05;

// [n, size, size, 1] smooth blob images in [-1, 1].
Tensor generate_toy_images(std::size_t n, std::size_t size, std::uint64_t seed);

// Binary PGM (P5, maxval <= 255) as [H, W, 1] scaled to [-1, 1].
Tensor read_pgm(const std::filesystem::path& path);
// [H, W] or [H, W, 1] in [-1, 1]; values are clamped.
void write_pgm(const std::filesystem::path& path, const Tensor& image);
// [N, H, W, 1] tiled into a grid `cols` images wide with a 1-pixel border.
void write_pgm_grid(const std::filesystem::path& path, const Tensor& images, std::size_t cols = 8);

// Every *.pgm in `dir`, sorted by file name, stacked to [N, H, W, 1].
Tensor load_image_dir(const std::filesystem::path& dir);

}  // namespace lddgan::data
