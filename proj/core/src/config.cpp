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

#include "lddgan/config.hpp"

#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "lddgan/checkpoint.hpp"
#include "lddgan/data.hpp"
#include "lddgan/error.hpp"

namespace lddgan::config {
namespace {

struct Value {
  enum class Type { kInt, kFloat, kBool, kString, kList } type = Type::kInt;
  std::int64_t i = 0;
  double d = 0.0;
  bool b = false;
  std::string s;
  std::vector<std::int64_t> list;
};

const char* type_name(Value::Type t) {
  switch (t) {
    case Value::Type::kInt: return "integer";
    case Value::Type::kFloat: return "float";
    case Value::Type::kBool: return "boolean";
    case Value::Type::kString: return "string";
    case Value::Type::kList: return "integer array";
  }
  return "?";
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const RunConfig&)> write;  // empty result = omit
  std::function<void(RunConfig&, const Value&)> read;
};

[[noreturn]] void type_error(const Field& f, Value::Type want, const Value& v) {
  throw ConfigError(f.section + "." + f.key + " expects " + type_name(want) + ", got " + type_name(v.type));
}

std::int64_t as_int(const Field& f, const Value& v) {
  if (v.type != Value::Type::kInt) type_error(f, Value::Type::kInt, v);
  return v.i;
}

std::string format_float(double d) {
  std::string s = fmt::format("{}", d);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  return out + "\"";
}

template <typename Access>
Field size_field(std::string sec, std::string key, Access acc, bool allow_zero = false) {
  Field f{sec, key, {}, {}};
  f.write = [acc](const RunConfig& c) { return std::to_string(acc(const_cast<RunConfig&>(c))); };
  f.read = [acc, f, allow_zero](RunConfig& c, const Value& v) {
    const auto x = as_int(f, v);
    if (x < 0 || (!allow_zero && x == 0)) {
      throw ConfigError(f.section + "." + f.key + " must be " + (allow_zero ? "nonnegative" : "positive"));
    }
    acc(c) = static_cast<std::decay_t<decltype(acc(c))>>(x);
  };
  return f;
}

template <typename Access>
Field int_field(std::string sec, std::string key, Access acc) {
  Field f{sec, key, {}, {}};
  f.write = [acc](const RunConfig& c) { return std::to_string(acc(const_cast<RunConfig&>(c))); };
  f.read = [acc, f](RunConfig& c, const Value& v) { acc(c) = static_cast<int>(as_int(f, v)); };
  return f;
}

template <typename Access>
Field float_field(std::string sec, std::string key, Access acc) {
  Field f{sec, key, {}, {}};
  f.write = [acc](const RunConfig& c) { return format_float(acc(const_cast<RunConfig&>(c))); };
  f.read = [acc, f](RunConfig& c, const Value& v) {
    if (v.type == Value::Type::kInt) {
      acc(c) = static_cast<double>(v.i);
    } else if (v.type == Value::Type::kFloat) {
      acc(c) = v.d;
    } else {
      type_error(f, Value::Type::kFloat, v);
    }
  };
  return f;
}

template <typename Access>
Field bool_field(std::string sec, std::string key, Access acc) {
  Field f{sec, key, {}, {}};
  f.write = [acc](const RunConfig& c) { return std::string(acc(const_cast<RunConfig&>(c)) ? "true" : "false"); };
  f.read = [acc, f](RunConfig& c, const Value& v) {
    if (v.type != Value::Type::kBool) type_error(f, Value::Type::kBool, v);
    acc(c) = v.b;
  };
  return f;
}

template <typename Access>
Field string_field(std::string sec, std::string key, Access acc) {
  Field f{sec, key, {}, {}};
  f.write = [acc](const RunConfig& c) { return quote(acc(const_cast<RunConfig&>(c))); };
  f.read = [acc, f](RunConfig& c, const Value& v) {
    if (v.type != Value::Type::kString) type_error(f, Value::Type::kString, v);
    acc(c) = v.s;
  };
  return f;
}

template <typename Access, typename Parse, typename Show>
Field enum_field(std::string sec, std::string key, Access acc, Parse parse, Show show) {
  Field f{sec, key, {}, {}};
  f.write = [acc, show](const RunConfig& c) { return quote(show(acc(const_cast<RunConfig&>(c)))); };
  f.read = [acc, parse, f](RunConfig& c, const Value& v) {
    if (v.type != Value::Type::kString) type_error(f, Value::Type::kString, v);
    acc(c) = parse(v.s);
  };
  return f;
}

template <typename Access>
Field list_field(std::string sec, std::string key, Access acc) {
  Field f{sec, key, {}, {}};
  f.write = [acc](const RunConfig& c) {
    std::string s = "[";
    const auto& l = acc(const_cast<RunConfig&>(c));
    for (std::size_t i = 0; i < l.size(); ++i) s += (i ? ", " : "") + std::to_string(l[i]);
    return s + "]";
  };
  f.read = [acc, f](RunConfig& c, const Value& v) {
    if (v.type != Value::Type::kList) type_error(f, Value::Type::kList, v);
    std::vector<std::size_t> out;
    for (auto x : v.list) {
      if (x <= 0) throw ConfigError(f.section + "." + f.key + " entries must be positive");
      out.push_back(static_cast<std::size_t>(x));
    }
    acc(c) = out;
  };
  return f;
}

#define LDDGAN_ACC(expr) [](RunConfig& c) -> auto& { return c.expr; }

const std::vector<Field>& fields() {
  static const std::vector<Field> all = [] {
    std::vector<Field> f;
    f.push_back(enum_field("dataset", "kind", LDDGAN_ACC(dataset.kind), parse_dataset_kind,
                           [](DatasetKind k) { return to_string(k); }));
    f.push_back(string_field("dataset", "path", LDDGAN_ACC(dataset.path)));
    f.push_back(size_field("dataset", "count", LDDGAN_ACC(dataset.count)));
    f.push_back(size_field("dataset", "seed", LDDGAN_ACC(dataset.seed), true));
    f.push_back(size_field("dataset", "image_size", LDDGAN_ACC(dataset.image_size)));
    f.push_back(size_field("dataset", "holdout", LDDGAN_ACC(dataset.holdout)));

    f.push_back(int_field("schedule", "T", LDDGAN_ACC(T)));
    f.push_back(float_field("schedule", "beta_min", LDDGAN_ACC(beta_min)));
    f.push_back(float_field("schedule", "beta_max", LDDGAN_ACC(beta_max)));
    f.push_back(enum_field("schedule", "kind", LDDGAN_ACC(schedule_kind), diffusion::parse_schedule_kind,
                           [](diffusion::ScheduleKind k) { return diffusion::to_string(k); }));

    f.push_back(size_field("autoencoder", "f", LDDGAN_ACC(autoencoder.model.f)));
    f.push_back(size_field("autoencoder", "latent_channels", LDDGAN_ACC(autoencoder.model.latent_channels)));
    f.push_back(size_field("autoencoder", "base_channels", LDDGAN_ACC(autoencoder.model.base_channels)));
    f.push_back(bool_field("autoencoder", "use_kl_penalty", LDDGAN_ACC(autoencoder.model.use_kl_penalty)));
    f.push_back(float_field("autoencoder", "kl_weight", LDDGAN_ACC(autoencoder.model.kl_weight)));
    f.push_back(bool_field("autoencoder", "use_patch_adversarial", LDDGAN_ACC(autoencoder.model.use_patch_adversarial)));
    f.push_back(float_field("autoencoder", "patch_weight", LDDGAN_ACC(autoencoder.model.patch_weight)));
    f.push_back(float_field("autoencoder", "lr", LDDGAN_ACC(autoencoder.model.lr)));
    f.push_back(int_field("autoencoder", "epochs", LDDGAN_ACC(autoencoder.epochs)));
    f.push_back(size_field("autoencoder", "batch_size", LDDGAN_ACC(autoencoder.batch_size)));
    f.push_back(string_field("autoencoder", "checkpoint", LDDGAN_ACC(autoencoder.checkpoint)));

    f.push_back(enum_field("generator", "mode", LDDGAN_ACC(generator.mode), gan::parse_net_mode,
                           [](gan::NetMode m) { return gan::to_string(m); }));
    f.push_back(size_field("generator", "base_channels", LDDGAN_ACC(generator.base_channels)));
    f.push_back(list_field("generator", "channel_multipliers", LDDGAN_ACC(generator.channel_multipliers)));
    f.push_back(size_field("generator", "num_res_blocks", LDDGAN_ACC(generator.num_res_blocks), true));
    f.push_back(size_field("generator", "z_dim", LDDGAN_ACC(generator.z_dim)));
    f.push_back(size_field("generator", "z_mapping_layers", LDDGAN_ACC(generator.z_mapping_layers), true));
    f.push_back(size_field("generator", "z_embed_dim", LDDGAN_ACC(generator.z_embed_dim)));
    f.push_back(size_field("generator", "time_embed_dim", LDDGAN_ACC(generator.time_embed_dim)));
    f.push_back(int_field("generator", "max_timestep", LDDGAN_ACC(generator.max_timestep)));
    f.push_back(bool_field("generator", "attention", LDDGAN_ACC(generator.attention)));

    f.push_back(enum_field("discriminator", "mode", LDDGAN_ACC(discriminator.mode), gan::parse_net_mode,
                           [](gan::NetMode m) { return gan::to_string(m); }));
    f.push_back(size_field("discriminator", "base_channels", LDDGAN_ACC(discriminator.base_channels)));
    f.push_back(list_field("discriminator", "channel_multipliers", LDDGAN_ACC(discriminator.channel_multipliers)));
    f.push_back(size_field("discriminator", "num_blocks", LDDGAN_ACC(discriminator.num_blocks)));
    f.push_back(size_field("discriminator", "time_embed_dim", LDDGAN_ACC(discriminator.time_embed_dim)));

    f.push_back(enum_field("objectives", "weighting", LDDGAN_ACC(weighting.mode), objectives::parse_weighting_mode,
                           [](objectives::WeightingMode m) { return objectives::to_string(m); }));
    f.push_back(float_field("objectives", "delta", LDDGAN_ACC(weighting.delta)));
    f.push_back(float_field("objectives", "fixed_lambda", LDDGAN_ACC(weighting.fixed_lambda)));
    f.push_back(enum_field("objectives", "rec_norm", LDDGAN_ACC(rec_norm), objectives::parse_rec_norm,
                           [](objectives::RecNorm n) { return objectives::to_string(n); }));
    f.push_back(enum_field("objectives", "d_loss", LDDGAN_ACC(d_loss_form), objectives::parse_d_loss_form,
                           [](objectives::DLossForm d) { return objectives::to_string(d); }));
    f.push_back(float_field("objectives", "r1_gamma", LDDGAN_ACC(r1_gamma)));
    f.push_back(int_field("objectives", "lazy_interval", LDDGAN_ACC(lazy_interval)));

    f.push_back(float_field("training", "lr_g", LDDGAN_ACC(lr_g)));
    f.push_back(float_field("training", "lr_d", LDDGAN_ACC(lr_d)));
    f.push_back(size_field("training", "batch_size", LDDGAN_ACC(batch_size)));
    f.push_back(int_field("training", "num_epochs", LDDGAN_ACC(num_epochs)));
    f.push_back(float_field("training", "ema_decay", LDDGAN_ACC(ema_decay)));
    {
      Field s{"training", "seed", {}, {}};
      s.write = [](const RunConfig& c) { return c.seed ? std::to_string(*c.seed) : std::string(); };
      s.read = [s](RunConfig& c, const Value& v) {
        const auto x = as_int(s, v);
        if (x < 0) throw ConfigError("training.seed must be nonnegative");
        c.seed = static_cast<std::uint64_t>(x);
      };
      f.push_back(s);
    }
    f.push_back(int_field("training", "checkpoint_every", LDDGAN_ACC(checkpoint_every)));
    f.push_back(bool_field("training", "log_timing", LDDGAN_ACC(log_timing)));
    f.push_back(string_field("training", "out_dir", LDDGAN_ACC(out_dir)));

    f.push_back(size_field("sampling", "count", LDDGAN_ACC(sampling.count)));
    f.push_back(bool_field("sampling", "use_ema", LDDGAN_ACC(sampling.use_ema)));
    f.push_back(bool_field("sampling", "decode", LDDGAN_ACC(sampling.decode)));
    f.push_back(int_field("sampling", "T", LDDGAN_ACC(sampling.T)));
    f.push_back(size_field("sampling", "batch_size", LDDGAN_ACC(sampling.batch_size)));
    return f;
  }();
  return all;
}

#undef LDDGAN_ACC

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Removes a trailing comment outside of string literals.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (in_string && line[i] == '\\') {
      ++i;
    } else if (line[i] == '"') {
      in_string = !in_string;
    } else if (line[i] == '#' && !in_string) {
      return line.substr(0, i);
    }
  }
  return line;
}

std::int64_t parse_integer(const std::string& tok, const std::string& where) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(tok, &used, 10);
  } catch (const std::exception&) {
    throw ConfigError(where + ": invalid value '" + tok + "'");
  }
  if (used != tok.size()) throw ConfigError(where + ": invalid value '" + tok + "'");
  return v;
}

Value parse_value(const std::string& raw, const std::string& where) {
  const std::string tok = trim(raw);
  Value v;
  if (tok.empty()) throw ConfigError(where + ": missing value");
  if (tok.front() == '"') {
    if (tok.size() < 2 || tok.back() != '"') throw ConfigError(where + ": unterminated string");
    v.type = Value::Type::kString;
    for (std::size_t i = 1; i + 1 < tok.size(); ++i) {
      char c = tok[i];
      if (c == '\\') {
        if (i + 2 >= tok.size()) throw ConfigError(where + ": dangling escape");
        const char e = tok[++i];
        c = e == 'n' ? '\n' : e == 't' ? '\t' : e;
        if (e != 'n' && e != 't' && e != '"' && e != '\\') throw ConfigError(where + ": unknown escape");
      } else if (c == '"') {
        throw ConfigError(where + ": unexpected quote inside string");
      }
      v.s.push_back(c);
    }
    return v;
  }
  if (tok == "true" || tok == "false") {
    v.type = Value::Type::kBool;
    v.b = tok == "true";
    return v;
  }
  if (tok.front() == '[') {
    if (tok.back() != ']') throw ConfigError(where + ": unterminated array");
    v.type = Value::Type::kList;
    const std::string inner = trim(tok.substr(1, tok.size() - 2));
    if (inner.empty()) return v;
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) v.list.push_back(parse_integer(trim(item), where));
    return v;
  }
  if (tok.find_first_of(".eEn") != std::string::npos || tok == "inf" || tok == "-inf") {
    std::size_t used = 0;
    try {
      v.d = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw ConfigError(where + ": invalid value '" + tok + "'");
    }
    if (used != tok.size()) throw ConfigError(where + ": invalid value '" + tok + "'");
    v.type = Value::Type::kFloat;
    return v;
  }
  v.type = Value::Type::kInt;
  v.i = parse_integer(tok, where);
  return v;
}

}  // namespace

DatasetKind parse_dataset_kind(const std::string& s) {
  if (s == "gaussians25") return DatasetKind::kGaussians25;
  if (s == "toy_images") return DatasetKind::kToyImages;
  if (s == "image_dir") return DatasetKind::kImageDir;
  if (s == "tensor_file") return DatasetKind::kTensorFile;
  throw ConfigError("unknown dataset kind '" + s + "' (expected gaussians25, toy_images, image_dir or tensor_file)");
}

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kGaussians25: return "gaussians25";
    case DatasetKind::kToyImages: return "toy_images";
    case DatasetKind::kImageDir: return "image_dir";
    case DatasetKind::kTensorFile: return "tensor_file";
  }
  return "?";
}

RunConfig::RunConfig() {
  generator.mode = gan::NetMode::kVector;
  generator.data_channels = 2;
  generator.base_channels = 64;
  generator.channel_multipliers = {1, 2};
  generator.num_res_blocks = 2;
  generator.z_dim = 25;
  generator.z_mapping_layers = 2;
  generator.z_embed_dim = 64;
  generator.time_embed_dim = 32;
  generator.max_timestep = 8;
  discriminator.mode = gan::NetMode::kVector;
  discriminator.data_channels = 2;
  discriminator.base_channels = 64;
  discriminator.channel_multipliers = {1, 2};
  discriminator.num_blocks = 2;
  discriminator.time_embed_dim = 32;
  discriminator.max_timestep = 8;
  weighting.num_epochs = num_epochs;
}

std::size_t RunConfig::data_channels() const {
  switch (dataset.kind) {
    case DatasetKind::kGaussians25: return 2;
    case DatasetKind::kToyImages:
    case DatasetKind::kImageDir: return autoencoder.model.latent_channels;
    case DatasetKind::kTensorFile: return generator.data_channels;
  }
  return generator.data_channels;
}

void RunConfig::finalize() {
  generator.data_channels = data_channels();
  discriminator.data_channels = generator.data_channels;
  discriminator.max_timestep = generator.max_timestep;
  weighting.num_epochs = num_epochs;
  if (dataset.is_image()) {
    autoencoder.model.validate();
    if (autoencoder.epochs < 1) throw ConfigError("autoencoder.epochs must be at least 1");
    if (dataset.kind == DatasetKind::kToyImages) {
      autoencoder.model.latent_shape({dataset.image_size, dataset.image_size, autoencoder.model.image_channels});
    }
  }
  if ((dataset.kind == DatasetKind::kImageDir || dataset.kind == DatasetKind::kTensorFile) && dataset.path.empty()) {
    throw ConfigError("dataset.path is required for dataset kind " + to_string(dataset.kind));
  }
  if (sampling.T < 0) throw ConfigError("sampling.T must be nonnegative");
  train_config().validate();
}

std::uint64_t RunConfig::seed_or_default() const { return seed.value_or(0); }

training::TrainConfig RunConfig::train_config() const {
  training::TrainConfig t;
  t.T = T;
  t.beta_min = beta_min;
  t.beta_max = beta_max;
  t.schedule_kind = schedule_kind;
  t.generator = generator;
  t.discriminator = discriminator;
  t.lr_g = lr_g;
  t.lr_d = lr_d;
  t.batch_size = batch_size;
  t.num_epochs = num_epochs;
  t.weighting = weighting;
  t.weighting.num_epochs = num_epochs;
  t.rec_norm = rec_norm;
  t.d_loss_form = d_loss_form;
  t.r1_gamma = r1_gamma;
  t.lazy_interval = lazy_interval;
  t.ema_decay = ema_decay;
  t.seed = seed_or_default();
  t.checkpoint_every = checkpoint_every;
  t.log_timing = log_timing;
  return t;
}

RunConfig parse(const std::string& text, const std::string& origin) {
  static const std::map<std::pair<std::string, std::string>, const Field*> index = [] {
    std::map<std::pair<std::string, std::string>, const Field*> m;
    for (const auto& f : fields()) m[{f.section, f.key}] = &f;
    return m;
  }();
  static const std::set<std::string> sections = [] {
    std::set<std::string> s;
    for (const auto& f : fields()) s.insert(f.section);
    return s;
  }();

  RunConfig config;
  std::set<std::pair<std::string, std::string>> seen;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(body.substr(1, body.size() - 2));
      if (!sections.count(section)) throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(body.substr(0, eq));
    if (section.empty()) throw ConfigError(where + ": key '" + key + "' outside of any section");
    auto it = index.find({section, key});
    if (it == index.end()) throw ConfigError(where + ": unknown key '" + key + "' in [" + section + "]");
    if (!seen.insert({section, key}).second) throw ConfigError(where + ": duplicate key '" + key + "'");
    const Value v = parse_value(body.substr(eq + 1), where);
    try {
      it->second->read(config, v);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  config.weighting.num_epochs = config.num_epochs;
  return config;
}

RunConfig load(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) throw ConfigError("config file '" + path.string() + "' not found");
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse(text, path.string());
}

std::string serialize(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    const std::string v = f.write(config);
    if (v.empty()) continue;
    if (f.section != section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += f.key + " = " + v + "\n";
  }
  return out;
}

void resolve_seed(RunConfig& config, std::optional<std::uint64_t> cli_seed) {
  if (cli_seed) {
    config.seed = *cli_seed;
    return;
  }
  if (config.seed) return;
  if (const char* env = std::getenv("LDDGAN_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used, 10);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing");
      config.seed = v;
    } catch (const std::exception&) {
      throw ConfigError(std::string("LDDGAN_SEED is not an unsigned integer: '") + env + "'");
    }
    return;
  }
  config.seed = 0;
}

Tensor load_dataset(const DatasetSpec& spec) {
  switch (spec.kind) {
    case DatasetKind::kGaussians25: return data::generate_25gaussians(spec.count, spec.seed);
    case DatasetKind::kToyImages: return data::generate_toy_images(spec.count, spec.image_size, spec.seed);
    case DatasetKind::kImageDir: return data::load_image_dir(spec.path);
    case DatasetKind::kTensorFile: return io::load_tensor_file(spec.path);
  }
  throw ConfigError("unsupported dataset kind");
}

Tensor holdout_set(const DatasetSpec& spec) {
  if (spec.kind != DatasetKind::kGaussians25) throw ConfigError("held-out sets exist for gaussians25 only");
  return data::generate_25gaussians(spec.holdout, splitmix64(spec.seed ^ 0x686f6c646f7574ULL));
}

}  // namespace lddgan::config
