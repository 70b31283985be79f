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

#include "lddgan/sampler.hpp"

#include <chrono>
#include <numeric>

#include "lddgan/error.hpp"

namespace lddgan::sampler {

void SampleRequest::validate() const {
  if (count < 1) throw ConfigError("sample count must be at least 1");
  if (batch_size < 1) throw ConfigError("sample batch size must be at least 1");
  if (T && *T < 1) throw ConfigError("T override must be at least 1");
}

DenoiseResult denoise_step(const Tensor& x_t, int t, const Tensor& z, const gan::Generator& generator,
                           const diffusion::NoiseSchedule& sched, RngStream& rng) {
  sched.check_t(t);
  NoGradGuard guard;
  const int steps[] = {t};
  DenoiseResult r;
  r.x0_pred = generator.forward(constant(x_t), constant(z), steps).value();
  if (r.x0_pred.shape() != x_t.shape()) throw ShapeError("generator output shape differs from x_t");
  if (t == 1) {
    r.x_prev = r.x0_pred;
    return r;
  }
  const Tensor noise = gaussian_sample(rng, x_t.shape());
  r.x_prev = diffusion::posterior_sample(constant(r.x0_pred), constant(x_t), t, noise, sched).value();
  return r;
}

SampleResult sample(const SampleRequest& request, const gan::Generator& generator,
                    const diffusion::NoiseSchedule& sched, const Shape& data_shape,
                    const ae::Autoencoder* autoencoder) {
  request.validate();
  if (request.T && *request.T != sched.T) {
    throw ConfigError("T override " + std::to_string(*request.T) + " does not match the schedule (T = " +
                      std::to_string(sched.T) + ")");
  }
  if (request.decode && autoencoder == nullptr) throw ConfigError("decode requested without an autoencoder");
  check_shape(data_shape);
  const std::size_t z_dim = generator.config().z_dim;
  const std::size_t per = shape_numel(data_shape);
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  std::vector<double> out;
  out.reserve(request.count * per);
  int nfe = 0;  // generator calls seen by the first sample
  for (std::size_t b = 0; b < request.count; b += request.batch_size) {
    const std::size_t n = std::min(request.batch_size, request.count - b);
    RngStream rng = RngStream(request.seed).derive("sample-batch", b / request.batch_size);
    Shape shape{n};
    shape.insert(shape.end(), data_shape.begin(), data_shape.end());
    Tensor x = gaussian_sample(rng, shape);
    for (int t = sched.T; t >= 1; --t) {
      const Tensor z = gaussian_sample(rng, {n, z_dim});
      x = denoise_step(x, t, z, generator, sched, rng).x_prev;
      if (b == 0) ++nfe;
    }
    out.insert(out.end(), x.data().begin(), x.data().end());
  }
  Shape shape{request.count};
  shape.insert(shape.end(), data_shape.begin(), data_shape.end());
  SampleResult result{Tensor(shape, std::move(out)), {nfe, 0.0, request.count}};
  if (request.decode) result.samples = ae::decode_latents(*autoencoder, result.samples);
  result.stats.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return result;
}

}  // namespace lddgan::sampler
