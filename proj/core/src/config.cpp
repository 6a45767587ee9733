// Copyright 2026 The gazeprompt Authors
// SPDX-License-Identifier: Apache-2.0

#include "gaze/config.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>

namespace gaze {

const char* to_string(WeightingScheme scheme) {
  switch (scheme) {
    case WeightingScheme::kLiteralCos: return "literal-cos";
    case WeightingScheme::kClampedCos: return "clamped-cos";
    case WeightingScheme::kDistance: return "distance";
    case WeightingScheme::kUniform: return "uniform";
  }
  return "unknown";
}

WeightingScheme parse_weighting_scheme(const std::string& name) {
  if (name == "literal-cos") return WeightingScheme::kLiteralCos;
  if (name == "clamped-cos") return WeightingScheme::kClampedCos;
  if (name == "distance") return WeightingScheme::kDistance;
  if (name == "uniform") return WeightingScheme::kUniform;
  fail(ErrorKind::kConfiguration, "unknown weighting scheme '" + name + "'");
}

void ModelConfig::validate() const {
  if (input_dim == 0 || hidden_dim == 0 || feature_dim == 0 || token_dim == 0) {
    fail(ErrorKind::kConfiguration, "model dimensions must be positive");
  }
  if (context_len < 1) fail(ErrorKind::kConfiguration, "context_len must be at least 1");
  AnchorGrid probe(yaw_step, pitch_step);
  (void)probe;
}

void DomainSpec::validate() const {
  if (!(nuisance_scale >= 0.0)) {
    fail(ErrorKind::kConfiguration, "nuisance_scale must be non-negative");
  }
  if (!(obs_noise >= 0.0)) fail(ErrorKind::kConfiguration, "obs_noise must be non-negative");
}

void TrainConfig::validate() const {
  model.validate();
  source.validate();
  target.validate();
  if (batch_size == 0) fail(ErrorKind::kConfiguration, "batch_size must be positive");
  if (epochs == 0) fail(ErrorKind::kConfiguration, "epochs must be positive");
  if (!(lr > 0.0)) fail(ErrorKind::kConfiguration, "lr must be positive");
  if (!(weight_decay >= 0.0)) fail(ErrorKind::kConfiguration, "weight_decay must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    fail(ErrorKind::kConfiguration, "momentum must be in [0, 1)");
  }
  if (!(warmup_epochs >= 0.0 && warmup_epochs < static_cast<double>(epochs))) {
    fail(ErrorKind::kConfiguration, "warmup_epochs must be in [0, epochs)");
  }
  if (!(lambda_geo >= 0.0 && lambda_mcr >= 0.0 && lambda_gaze >= 0.0)) {
    fail(ErrorKind::kConfiguration, "loss weights must be non-negative");
  }
  if (!(temperature > 0.0)) fail(ErrorKind::kConfiguration, "temperature must be positive");
  if (n_source == 0 || n_target == 0) {
    fail(ErrorKind::kConfiguration, "dataset sizes must be positive");
  }
  if (!(nuisance_coupling >= 0.0)) {
    fail(ErrorKind::kConfiguration, "nuisance_coupling must be non-negative");
  }
  if (workers == 0) fail(ErrorKind::kConfiguration, "workers must be positive");
}

namespace {

nlohmann::ordered_json domain_json(const DomainSpec& d) {
  nlohmann::ordered_json j;
  j["id"] = d.id;
  j["nuisance_mean"] = d.nuisance_mean;
  j["nuisance_scale"] = d.nuisance_scale;
  j["obs_noise"] = d.obs_noise;
  return j;
}

[[noreturn]] void bad_key(const std::string& path, const std::string& why) {
  fail(ErrorKind::kConfiguration, path + ": " + why);
}

double read_number(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number()) bad_key(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad_key(path, "expected a finite number");
  return x;
}

std::uint64_t read_unsigned(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number_integer() || (v.is_number_integer() && v.get<std::int64_t>() < 0 &&
                                 !v.is_number_unsigned())) {
    bad_key(path, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string read_string(const nlohmann::json& v, const std::string& path) {
  if (!v.is_string()) bad_key(path, "expected a string");
  return v.get<std::string>();
}

using Setter = std::function<void(const nlohmann::json&, const std::string&)>;

void apply_fields(const nlohmann::json& doc, const std::string& prefix,
                  const std::map<std::string, Setter>& fields) {
  if (!doc.is_object()) bad_key(prefix.empty() ? "/" : prefix, "expected an object");
  for (const auto& [key, value] : doc.items()) {
    const std::string path = prefix + "/" + key;
    const auto it = fields.find(key);
    if (it == fields.end()) bad_key(path, "unknown field");
    try {
      it->second(value, path);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kConfiguration &&
          std::string(e.what()).rfind(path, 0) == 0) {
        throw;
      }
      bad_key(path, e.what());
    }
  }
}

void parse_domain(const nlohmann::json& doc, const std::string& prefix, DomainSpec& d) {
  apply_fields(doc, prefix,
               {
                   {"id", [&](const auto& v, const auto& p) {
                      d.id = static_cast<int>(read_unsigned(v, p));
                    }},
                   {"nuisance_mean", [&](const auto& v, const auto& p) {
                      d.nuisance_mean = read_number(v, p);
                    }},
                   {"nuisance_scale", [&](const auto& v, const auto& p) {
                      d.nuisance_scale = read_number(v, p);
                    }},
                   {"obs_noise", [&](const auto& v, const auto& p) {
                      d.obs_noise = read_number(v, p);
                    }},
               });
  try {
    d.validate();
  } catch (const Error& e) {
    bad_key(prefix, e.what());
  }
}

}  // namespace

nlohmann::ordered_json to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["lr"] = c.lr;
  j["weight_decay"] = c.weight_decay;
  j["momentum"] = c.momentum;
  j["nesterov"] = c.nesterov;
  j["warmup_epochs"] = c.warmup_epochs;
  j["negatives"] = c.negatives;
  j["context_len"] = c.model.context_len;
  j["lambda_geo"] = c.lambda_geo;
  j["lambda_mcr"] = c.lambda_mcr;
  j["lambda_gaze"] = c.lambda_gaze;
  j["weighting"] = to_string(c.weighting);
  j["temperature"] = c.temperature;
  j["interpolation"] = to_string(c.interpolation);
  j["yaw_step"] = c.model.yaw_step;
  j["pitch_step"] = c.model.pitch_step;
  j["input_dim"] = c.model.input_dim;
  j["hidden_dim"] = c.model.hidden_dim;
  j["feature_dim"] = c.model.feature_dim;
  j["token_dim"] = c.model.token_dim;
  j["n_source"] = c.n_source;
  j["n_target"] = c.n_target;
  j["source_domain"] = domain_json(c.source);
  j["target_domain"] = domain_json(c.target);
  j["nuisance_coupling"] = c.nuisance_coupling;
  j["seed"] = c.seed;
  j["data_seed"] = c.data_seed;
  j["proxy_seed"] = c.proxy_seed;
  j["workers"] = c.workers;
  return j;
}

TrainConfig config_from_json(const nlohmann::json& doc, TrainConfig c) {
  auto size_field = [](std::size_t& out) {
    return [&out](const nlohmann::json& v, const std::string& p) {
      out = static_cast<std::size_t>(read_unsigned(v, p));
    };
  };
  auto real_field = [](double& out) {
    return [&out](const nlohmann::json& v, const std::string& p) { out = read_number(v, p); };
  };
  auto seed_field = [](std::uint64_t& out) {
    return [&out](const nlohmann::json& v, const std::string& p) { out = read_unsigned(v, p); };
  };

  apply_fields(
      doc, "",
      {
          {"batch_size", size_field(c.batch_size)},
          {"epochs", size_field(c.epochs)},
          {"lr", real_field(c.lr)},
          {"weight_decay", real_field(c.weight_decay)},
          {"momentum", real_field(c.momentum)},
          {"nesterov", [&](const nlohmann::json& v, const std::string& p) {
             if (!v.is_boolean()) bad_key(p, "expected a boolean");
             c.nesterov = v.get<bool>();
           }},
          {"warmup_epochs", real_field(c.warmup_epochs)},
          {"negatives", size_field(c.negatives)},
          {"context_len", size_field(c.model.context_len)},
          {"lambda_geo", real_field(c.lambda_geo)},
          {"lambda_mcr", real_field(c.lambda_mcr)},
          {"lambda_gaze", real_field(c.lambda_gaze)},
          {"weighting", [&](const nlohmann::json& v, const std::string& p) {
             c.weighting = parse_weighting_scheme(read_string(v, p));
           }},
          {"temperature", real_field(c.temperature)},
          {"interpolation", [&](const nlohmann::json& v, const std::string& p) {
             c.interpolation = parse_interpolation_scheme(read_string(v, p));
           }},
          {"yaw_step", real_field(c.model.yaw_step)},
          {"pitch_step", real_field(c.model.pitch_step)},
          {"input_dim", size_field(c.model.input_dim)},
          {"hidden_dim", size_field(c.model.hidden_dim)},
          {"feature_dim", size_field(c.model.feature_dim)},
          {"token_dim", size_field(c.model.token_dim)},
          {"n_source", size_field(c.n_source)},
          {"n_target", size_field(c.n_target)},
          {"source_domain", [&](const nlohmann::json& v, const std::string& p) {
             parse_domain(v, p, c.source);
           }},
          {"target_domain", [&](const nlohmann::json& v, const std::string& p) {
             parse_domain(v, p, c.target);
           }},
          {"nuisance_coupling", real_field(c.nuisance_coupling)},
          {"seed", seed_field(c.seed)},
          {"data_seed", seed_field(c.data_seed)},
          {"proxy_seed", seed_field(c.proxy_seed)},
          {"workers", size_field(c.workers)},
      });
  c.validate();
  return c;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace gaze
