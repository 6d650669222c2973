// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include <cmath>

#include "bcil/errors.hpp"
#include "bcil/policy/policy.hpp"

namespace bcil::policy {

void BiACTConfig::validate() const {
  if (chunk < 1) throw ConfigError("chunk length k must be >= 1");
  if (state_dim < 1 || state_dim % 3 != 0) {
    throw ConfigError("state_dim must be a positive multiple of 3 (theta, dtheta, tau per joint)");
  }
  if (latent_dim < 1) throw ConfigError("latent_dim must be >= 1");
  if (model_dim < 4 || model_dim % 4 != 0) {
    throw ConfigError("model_dim must be a positive multiple of 4");
  }
  if (heads < 1 || model_dim % heads != 0) {
    throw ConfigError("model_dim must be divisible by heads");
  }
  if (enc_layers < 1 || dec_layers < 1) throw ConfigError("need at least one layer per stack");
  if (img_w < 8 || img_h < 8 || img_w % 8 != 0 || img_h % 8 != 0) {
    throw ConfigError("image size must be a multiple of 8 (three stride-2 convs)");
  }
  if (cameras < 1) throw ConfigError("need at least one camera");
  if (!(beta_kl >= 0.0)) throw ConfigError("beta_kl must be >= 0");
  if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch < 1) throw ConfigError("batch must be >= 1");
  if (pair_stride < 1) throw ConfigError("pair_stride must be >= 1");
}

const std::vector<std::string>& BiACTConfig::allowed_keys() {
  static const std::vector<std::string> keys = {
      "chunk",      "state_dim", "latent_dim", "model_dim",   "heads",
      "enc_layers", "dec_layers", "img_w",      "img_h",       "cameras",
      "beta_kl",    "lr",        "epochs",     "batch",       "pair_stride",
      "seed",       "force_mask"};
  return keys;
}

KvConfig BiACTConfig::to_kv() const {
  KvConfig kv;
  kv.set("chunk", std::to_string(chunk));
  kv.set("state_dim", std::to_string(state_dim));
  kv.set("latent_dim", std::to_string(latent_dim));
  kv.set("model_dim", std::to_string(model_dim));
  kv.set("heads", std::to_string(heads));
  kv.set("enc_layers", std::to_string(enc_layers));
  kv.set("dec_layers", std::to_string(dec_layers));
  kv.set("img_w", std::to_string(img_w));
  kv.set("img_h", std::to_string(img_h));
  kv.set("cameras", std::to_string(cameras));
  kv.set("beta_kl", std::to_string(beta_kl));
  char lr_s[32];
  std::snprintf(lr_s, sizeof(lr_s), "%.17g", lr);
  kv.set("lr", lr_s);
  kv.set("epochs", std::to_string(epochs));
  kv.set("batch", std::to_string(batch));
  kv.set("pair_stride", std::to_string(pair_stride));
  kv.set("seed", std::to_string(seed));
  kv.set("force_mask", force_mask ? "true" : "false");
  return kv;
}

BiACTConfig BiACTConfig::from_kv(const KvConfig& kv) {
  kv.restrict_keys(allowed_keys());
  BiACTConfig c;
  c.chunk = static_cast<int>(kv.get_int("chunk", c.chunk));
  c.state_dim = static_cast<int>(kv.get_int("state_dim", c.state_dim));
  c.latent_dim = static_cast<int>(kv.get_int("latent_dim", c.latent_dim));
  c.model_dim = static_cast<int>(kv.get_int("model_dim", c.model_dim));
  c.heads = static_cast<int>(kv.get_int("heads", c.heads));
  c.enc_layers = static_cast<int>(kv.get_int("enc_layers", c.enc_layers));
  c.dec_layers = static_cast<int>(kv.get_int("dec_layers", c.dec_layers));
  c.img_w = static_cast<int>(kv.get_int("img_w", c.img_w));
  c.img_h = static_cast<int>(kv.get_int("img_h", c.img_h));
  c.cameras = static_cast<int>(kv.get_int("cameras", c.cameras));
  c.beta_kl = kv.get_double("beta_kl", c.beta_kl);
  c.lr = kv.get_double("lr", c.lr);
  c.epochs = static_cast<int>(kv.get_int("epochs", c.epochs));
  c.batch = static_cast<int>(kv.get_int("batch", c.batch));
  c.pair_stride = static_cast<int>(kv.get_int("pair_stride", c.pair_stride));
  c.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<std::int64_t>(c.seed)));
  c.force_mask = kv.get_bool("force_mask", c.force_mask);
  c.validate();
  return c;
}

NormStats NormStats::fit(const std::vector<std::vector<double>>& states,
                         const std::vector<std::vector<double>>& actions) {
  if (states.empty() || actions.empty()) {
    throw ConfigError("fit_norm_stats: empty dataset");
  }
  auto fit_one = [](const std::vector<std::vector<double>>& rows, std::vector<double>& mean,
                    std::vector<double>& std) {
    const std::size_t n = rows[0].size();
    mean.assign(n, 0.0);
    std.assign(n, 0.0);
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < n; ++i) mean[i] += r[i];
    }
    for (std::size_t i = 0; i < n; ++i) mean[i] /= static_cast<double>(rows.size());
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < n; ++i) {
        const double d = r[i] - mean[i];
        std[i] += d * d;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      std[i] = std::sqrt(std[i] / static_cast<double>(rows.size()));  // population sigma
      if (std[i] < kSigmaFloor) std[i] = kSigmaFloor;
    }
  };
  NormStats s;
  fit_one(states, s.state_mean, s.state_std);
  fit_one(actions, s.action_mean, s.action_std);
  return s;
}

std::vector<double> NormStats::normalize(std::span<const double> v,
                                         const std::vector<double>& mean,
                                         const std::vector<double>& std) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - mean[i]) / std[i];
  return out;
}

std::vector<double> NormStats::denormalize(std::span<const double> v,
                                           const std::vector<double>& mean,
                                           const std::vector<double>& std) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * std[i] + mean[i];
  return out;
}

}  // namespace bcil::policy
