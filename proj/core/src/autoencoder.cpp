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

#include "lddgan/autoencoder.hpp"

#include <cmath>
#include <numeric>

#include "lddgan/error.hpp"

namespace lddgan::ae {
namespace {

std::vector<std::size_t> range(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> idx(end - begin);
  std::iota(idx.begin(), idx.end(), begin);
  return idx;
}

// Grows `out` with the rows of a batch result.
void append_rows(std::vector<double>& out, const Tensor& t) {
  out.insert(out.end(), t.data().begin(), t.data().end());
}

Var softplus_mean(const Var& x) { return mean_all(softplus(x)); }

}  // namespace

void AutoencoderConfig::validate() const {
  if (f != 2 && f != 4 && f != 8) throw ConfigError("autoencoder f must be 2, 4 or 8, got " + std::to_string(f));
  if (image_channels == 0 || latent_channels == 0) throw ConfigError("autoencoder channel counts must be positive");
  if (base_channels == 0) throw ConfigError("autoencoder base_channels must be positive");
  nn::default_groups(base_channels);
  if (kl_weight < 0) throw ConfigError("kl_weight must be nonnegative");
  if (patch_weight < 0) throw ConfigError("patch_weight must be nonnegative");
  if (!(lr > 0)) throw ConfigError("autoencoder lr must be positive");
}

std::size_t AutoencoderConfig::levels() const { return f == 2 ? 1 : f == 4 ? 2 : 3; }

Shape AutoencoderConfig::latent_shape(const Shape& image_shape) const {
  if (image_shape.size() != 3 && image_shape.size() != 4) {
    throw ShapeError("image shape must be [H, W, C] or [N, H, W, C], got " + shape_str(image_shape));
  }
  const std::size_t off = image_shape.size() - 3;
  const std::size_t h = image_shape[off], w = image_shape[off + 1];
  if (h % f || w % f) {
    throw ConfigError("image size " + std::to_string(h) + "x" + std::to_string(w) + " is not divisible by f = " +
                      std::to_string(f));
  }
  Shape out = image_shape;
  out[off] = h / f;
  out[off + 1] = w / f;
  out[off + 2] = latent_channels;
  return out;
}

Autoencoder::ResBlock Autoencoder::make_block(const std::string& name, std::size_t in, std::size_t out,
                                              RngStream& rng) {
  ResBlock b;
  b.norm1 = nn::GroupNorm::create(params_, name + ".norm1", in);
  b.conv1 = nn::Conv2d::create(params_, name + ".conv1", in, out, 3, 1, rng, std::sqrt(2.0));
  b.norm2 = nn::GroupNorm::create(params_, name + ".norm2", out);
  b.conv2 = nn::Conv2d::create(params_, name + ".conv2", out, out, 3, 1, rng, 0.5);
  if (in != out) {
    b.has_skip = true;
    b.skip = nn::Conv2d::create(params_, name + ".skip", in, out, 1, 1, rng);
  }
  return b;
}

Var Autoencoder::apply_block(const ResBlock& b, const Var& x) {
  Var h = b.conv1(nn::act(b.norm1(x)));
  h = b.conv2(nn::act(b.norm2(h)));
  return (b.has_skip ? b.skip(x) : x) + h;
}

Autoencoder::Autoencoder(const AutoencoderConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  RngStream rng = RngStream(seed).derive("autoencoder-init");
  const std::size_t base = config_.base_channels;
  const std::size_t levels = config_.levels();

  enc_in_ = nn::Conv2d::create(params_, "encoder.input", config_.image_channels, base, 3, 1, rng);
  std::size_t ch = base;
  for (std::size_t l = 0; l < levels; ++l) {
    const std::size_t out = base << l;
    enc_blocks_.push_back(make_block("encoder.block." + std::to_string(l), ch, out, rng));
    enc_down_.push_back(
        nn::Conv2d::create(params_, "encoder.down." + std::to_string(l), out, out, 3, 2, rng));
    ch = out;
  }
  enc_mid_ = make_block("encoder.mid", ch, ch, rng);
  enc_norm_ = nn::GroupNorm::create(params_, "encoder.norm", ch);
  const std::size_t enc_out = config_.use_kl_penalty ? 2 * config_.latent_channels : config_.latent_channels;
  enc_out_ = nn::Conv2d::create(params_, "encoder.output", ch, enc_out, 3, 1, rng);

  dec_in_ = nn::Conv2d::create(params_, "decoder.input", config_.latent_channels, ch, 3, 1, rng);
  dec_mid_ = make_block("decoder.mid", ch, ch, rng);
  for (std::size_t li = levels; li-- > 0;) {
    const std::size_t out = base << li;
    dec_up_.push_back(nn::Conv2d::create(params_, "decoder.up." + std::to_string(li), ch, ch, 3, 1, rng));
    dec_blocks_.push_back(make_block("decoder.block." + std::to_string(li), ch, out, rng));
    ch = out;
  }
  dec_norm_ = nn::GroupNorm::create(params_, "decoder.norm", ch);
  dec_out_ = nn::Conv2d::create(params_, "decoder.output", ch, config_.image_channels, 3, 1, rng);

  if (config_.use_patch_adversarial) {
    RngStream crng = RngStream(seed).derive("patch-critic-init");
    const std::size_t c = config_.image_channels;
    critic_layers_.push_back(nn::Conv2d::create(critic_params_, "critic.0", c, base, 3, 2, crng, std::sqrt(2.0)));
    critic_layers_.push_back(
        nn::Conv2d::create(critic_params_, "critic.1", base, 2 * base, 3, 2, crng, std::sqrt(2.0)));
    critic_layers_.push_back(nn::Conv2d::create(critic_params_, "critic.2", 2 * base, 1, 3, 1, crng));
  }
}

void Autoencoder::check_image(const Shape& s) const {
  if (s.size() != 4 || s[3] != config_.image_channels) {
    throw ShapeError("autoencoder expects images [N, H, W, " + std::to_string(config_.image_channels) + "], got " +
                     shape_str(s));
  }
  config_.latent_shape(s);
}

Var Autoencoder::encode_raw(const Var& images) const {
  check_image(images.shape());
  Var h = enc_in_(images);
  for (std::size_t l = 0; l < enc_blocks_.size(); ++l) {
    h = enc_down_[l](apply_block(enc_blocks_[l], h));
  }
  h = apply_block(enc_mid_, h);
  return enc_out_(nn::act(enc_norm_(h)));
}

Var Autoencoder::encode(const Var& images) const {
  Var out = encode_raw(images);
  if (config_.use_kl_penalty) return slice_last(out, 0, config_.latent_channels);
  return out;
}

LatentDistribution Autoencoder::encode_distribution(const Var& images) const {
  if (!config_.use_kl_penalty) throw ConfigError("encode_distribution requires use_kl_penalty");
  Var out = encode_raw(images);
  const std::size_t c = config_.latent_channels;
  return {slice_last(out, 0, c), slice_last(out, c, c)};
}

Var Autoencoder::decode(const Var& latent) const {
  const Shape& s = latent.shape();
  if (s.size() != 4 || s[3] != config_.latent_channels) {
    throw ShapeError("decoder expects latents [N, h, w, " + std::to_string(config_.latent_channels) + "], got " +
                     shape_str(s));
  }
  Var h = apply_block(dec_mid_, dec_in_(latent));
  for (std::size_t l = 0; l < dec_blocks_.size(); ++l) {
    h = apply_block(dec_blocks_[l], dec_up_[l](upsample2x(h)));
  }
  return tanh(dec_out_(nn::act(dec_norm_(h))));
}

Var Autoencoder::critic(const Var& images) const {
  if (critic_layers_.empty()) throw ConfigError("patch critic requires use_patch_adversarial");
  check_image(images.shape());
  Var h = images;
  for (std::size_t i = 0; i + 1 < critic_layers_.size(); ++i) h = nn::act(critic_layers_[i](h));
  return critic_layers_.back()(h);
}

Var kl_penalty(const Var& mu, const Var& logvar) {
  if (mu.shape() != logvar.shape()) {
    throw ShapeError("kl_penalty shape mismatch: " + shape_str(mu.shape()) + " vs " + shape_str(logvar.shape()));
  }
  return mean_all((square(mu) + exp(logvar) - 1.0 - logvar) * 0.5);
}

AeTrainState make_ae_train_state(const Autoencoder& ae) {
  AdamConfig cfg{ae.config().lr, 0.9, 0.999, 1e-8};
  AeTrainState s{make_adam_state(ae.params(), cfg), std::nullopt, 0};
  if (ae.config().use_patch_adversarial) s.critic_opt = make_adam_state(ae.critic_params(), cfg);
  return s;
}

AeLossBreakdown ae_train_step(const Tensor& batch, Autoencoder& ae, AeTrainState& state, const RngStream& rng) {
  const auto& cfg = ae.config();
  const Var x = constant(batch);
  RngStream step_rng = rng.derive("ae-step", state.step);
  AeLossBreakdown out;

  Var latent;
  Var kl;
  if (cfg.use_kl_penalty) {
    auto dist = ae.encode_distribution(x);
    const Var eps = constant(gaussian_sample(step_rng, dist.mu.shape()));
    latent = dist.mu + exp(dist.logvar * 0.5) * eps;
    kl = kl_penalty(dist.mu, dist.logvar);
    out.kl = kl.item();
  } else {
    latent = ae.encode(x);
  }
  const Var recon = ae.decode(latent);
  if (recon.shape() != batch.shape()) throw ShapeError("reconstruction shape differs from batch");
  const Var l1 = mean_all(abs(recon - x));
  out.l1 = l1.item();
  Var total = l1;
  if (cfg.use_kl_penalty) total = total + kl * cfg.kl_weight;

  if (cfg.use_patch_adversarial) {
    const Var g_adv = softplus_mean(-ae.critic(recon));
    out.patch_g = g_adv.item();
    total = total + g_adv * cfg.patch_weight;
  }
  out.total = total.item();
  if (!std::isfinite(out.total)) {
    throw NumericError("autoencoder loss is not finite at step " + std::to_string(state.step));
  }

  auto grads = grad(total, ae.params().vars());
  std::vector<Tensor> g;
  g.reserve(grads.size());
  for (auto& v : grads) g.push_back(v.value());

  if (cfg.use_patch_adversarial) {
    const Var fake = recon.detach();
    const Var d = softplus_mean(-ae.critic(x)) + softplus_mean(ae.critic(fake));
    out.patch_d = d.item();
    if (!std::isfinite(out.patch_d)) {
      throw NumericError("patch critic loss is not finite at step " + std::to_string(state.step));
    }
    auto dgrads = grad(d, ae.critic_params().vars());
    std::vector<Tensor> dg;
    for (auto& v : dgrads) dg.push_back(v.value());
    adam_step(ae.critic_params(), dg, *state.critic_opt);
  }
  adam_step(ae.params(), g, state.opt);
  ++state.step;
  return out;
}

double reconstruction_mse(const Autoencoder& ae, const Tensor& images, std::size_t batch_size) {
  NoGradGuard guard;
  const std::size_t n = images.dim(0);
  double sum = 0.0;
  for (std::size_t b = 0; b < n; b += batch_size) {
    const Tensor batch = images.rows(range(b, std::min(n, b + batch_size)));
    const Tensor recon = ae.decode(ae.encode(constant(batch))).value();
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const double d = recon[i] - batch[i];
      sum += d * d;
    }
  }
  return sum / static_cast<double>(images.size());
}

Tensor encode_dataset(const Autoencoder& ae, const Tensor& images, std::size_t batch_size) {
  NoGradGuard guard;
  const std::size_t n = images.dim(0);
  std::vector<double> out;
  out.reserve(shape_numel(ae.config().latent_shape(images.shape())));
  for (std::size_t b = 0; b < n; b += batch_size) {
    const Tensor batch = images.rows(range(b, std::min(n, b + batch_size)));
    append_rows(out, (ae.encode(constant(batch)) * ae.latent_scale()).value());
  }
  return Tensor(ae.config().latent_shape(images.shape()), std::move(out));
}

Tensor decode_latents(const Autoencoder& ae, const Tensor& latents, std::size_t batch_size) {
  NoGradGuard guard;
  const std::size_t n = latents.dim(0);
  std::vector<double> out;
  Shape shape;
  for (std::size_t b = 0; b < n; b += batch_size) {
    const Tensor batch = latents.rows(range(b, std::min(n, b + batch_size)));
    const Tensor img = ae.decode(constant(batch) * (1.0 / ae.latent_scale())).value();
    if (shape.empty()) shape = img.shape();
    append_rows(out, img);
  }
  shape[0] = n;
  return Tensor(shape, std::move(out));
}

double fit_latent_scale(Autoencoder& ae, const Tensor& images, std::size_t batch_size) {
  ae.set_latent_scale(1.0);
  const Tensor z = encode_dataset(ae, images, batch_size);
  double mean = 0.0;
  for (double v : z.data()) mean += v;
  mean /= static_cast<double>(z.size());
  double var = 0.0;
  for (double v : z.data()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(z.size());
  const double sd = std::sqrt(var);
  if (!(sd > 1e-12)) throw NumericError("latent standard deviation is zero; cannot fit a latent scale");
  ae.set_latent_scale(1.0 / sd);
  return 1.0 / sd;
}

AeTrainState train_autoencoder(Autoencoder& ae, const Tensor& images, int epochs, std::size_t batch_size,
                               std::uint64_t seed, const std::function<bool(const AeEpochStats&)>& on_epoch) {
  if (epochs < 1) throw ConfigError("autoencoder epochs must be at least 1");
  if (batch_size == 0) throw ConfigError("autoencoder batch_size must be positive");
  AeTrainState state = make_ae_train_state(ae);
  const RngStream base = RngStream(seed).derive("autoencoder-train");
  const std::size_t n = images.dim(0);
  for (int e = 0; e < epochs; ++e) {
    RngStream order_rng = base.derive("epoch-order", static_cast<std::uint64_t>(e));
    const auto order = permutation(n, order_rng);
    AeEpochStats stats;
    std::size_t batches = 0;
    for (std::size_t b = 0; b < n; b += batch_size) {
      const std::size_t end = std::min(n, b + batch_size);
      const Tensor batch = images.rows(std::span<const std::size_t>(order).subspan(b, end - b));
      const auto l = ae_train_step(batch, ae, state, base);
      stats.mean.l1 += l.l1;
      stats.mean.kl += l.kl;
      stats.mean.patch_g += l.patch_g;
      stats.mean.patch_d += l.patch_d;
      stats.mean.total += l.total;
      ++batches;
    }
    const double inv = 1.0 / static_cast<double>(batches);
    stats.mean.l1 *= inv;
    stats.mean.kl *= inv;
    stats.mean.patch_g *= inv;
    stats.mean.patch_d *= inv;
    stats.mean.total *= inv;
    stats.epoch = e + 1;
    if (on_epoch) {
      stats.mse = reconstruction_mse(ae, images);
      if (!on_epoch(stats)) break;
    }
  }
  return state;
}

io::TensorArchive to_archive(const Autoencoder& ae) {
  io::TensorArchive a;
  const auto& p = ae.params();
  for (std::size_t i = 0; i < p.size(); ++i) a.put("autoencoder/" + p.name(i), p.var(i).value());
  const auto& c = ae.critic_params();
  for (std::size_t i = 0; i < c.size(); ++i) a.put("critic/" + c.name(i), c.var(i).value());
  a.put("autoencoder/latent_scale", Tensor::scalar(ae.latent_scale()));
  return a;
}

void from_archive(const io::TensorArchive& archive, Autoencoder& ae) {
  const auto read = [&archive](const std::string& prefix, const ParamSet& p) {
    std::vector<Tensor> values;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const std::string name = prefix + p.name(i);
      const Tensor& t = archive.get(name);
      if (t.shape() != p.var(i).shape()) {
        throw ShapeError("checkpoint tensor '" + name + "' has shape " + shape_str(t.shape()) + ", expected " +
                         shape_str(p.var(i).shape()));
      }
      values.push_back(t);
    }
    return values;
  };
  auto values = read("autoencoder/", ae.params());
  auto critic = read("critic/", ae.critic_params());
  const double scale = archive.get("autoencoder/latent_scale").item();
  ae.params().set_values(values);
  ae.critic_params().set_values(critic);
  ae.set_latent_scale(scale);
}

}  // namespace lddgan::ae
