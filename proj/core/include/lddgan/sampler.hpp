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
#include <optional>

#include "lddgan/autoencoder.hpp"
#include "lddgan/diffusion.hpp"
#include "lddgan/gan.hpp"
#include "lddgan/rng.hpp"

namespace lddgan::sampler {

struct SampleRequest {
  std::size_t count = 1;
  std::uint64_t seed = 0;
  std::optional<int> T;  // override of the schedule length
  bool use_ema = true;
  bool decode = false;
  std::size_t batch_size = 1024;

  void validate() const;
};

struct DenoiseResult {
  Tensor x0_pred;
  Tensor x_prev;
};

// One reverse step: x0_pred = G(x_t, z, t), then x_prev from the posterior
// with noise drawn from `rng`. At t = 1 x_prev is x0_pred and no noise is drawn.
DenoiseResult denoise_step(const Tensor& x_t, int t, const Tensor& z, const gan::Generator& generator,
                           const diffusion::NoiseSchedule& sched, RngStream& rng);

struct SampleStats {
  int nfe = 0;  // generator evaluations per sample
  double wall_seconds = 0.0;
  std::size_t count = 0;
};

struct SampleResult {
  Tensor samples;  // latents, or pixels when decoded
  SampleStats stats;
};

// x_T ~ N(0, I), then t = T..1 with a fresh z each step. `data_shape` is the
// per-sample shape without the batch axis. Timing covers the loop and, when
// requested, the decode.
SampleResult sample(const SampleRequest& request, const gan::Generator& generator,
                    const diffusion::NoiseSchedule& sched, const Shape& data_shape,
                    const ae::Autoencoder* autoencoder = nullptr);

}  // namespace lddgan::sampler
