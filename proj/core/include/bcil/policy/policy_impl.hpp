// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <cmath>

#include "bcil/errors.hpp"
#include "bcil/policy/policy.hpp"

namespace bcil::policy {

template <typename T>
BiACT<T>::BiACT(const BiACTConfig& cfg, NormStats stats)
    : cfg_(cfg), stats_(std::move(stats)) {
  cfg_.validate();
  if (static_cast<int>(stats_.state_mean.size()) != cfg_.state_dim ||
      static_cast<int>(stats_.action_mean.size()) != cfg_.state_dim) {
    throw ConfigError("policy: normalization stats do not match state_dim");
  }
  register_params(store_);
  pos2d_ = nn::sinusoidal_embed_2d<T>(cfg_.img_h / 8, cfg_.img_w / 8, cfg_.model_dim);
  pos1d_enc_ = nn::sinusoidal_embed_1d<T>(cfg_.chunk + 2, cfg_.model_dim);
}

template <typename T>
void BiACT<T>::register_params(nn::ParamStore<T>& store) {
  const int m = cfg_.model_dim;
  const int n = cfg_.state_dim;
  const int hidden = 4 * m;
  Rng rng(cfg_.seed);

  auto stat_tensor = [n](const std::vector<double>& s) {
    nn::Tensor<T> t = nn::Tensor<T>::zeros({n});
    for (int i = 0; i < n; ++i) t.v[i] = static_cast<T>(s[i]);
    return t;
  };
  store.add("norm.state_mean", stat_tensor(stats_.state_mean), /*trainable=*/false);
  store.add("norm.state_std", stat_tensor(stats_.state_std), false);
  store.add("norm.action_mean", stat_tensor(stats_.action_mean), false);
  store.add("norm.action_std", stat_tensor(stats_.action_std), false);

  const int c1 = std::max(4, m / 4);
  const int c2 = std::max(8, m / 2);
  conv1_w_ = store.add("conv1.w", nn::init_uniform<T>({c1, 3, 3, 3}, 3 * 9, rng));
  conv1_b_ = store.add("conv1.b", nn::Tensor<T>::zeros({c1}));
  conv2_w_ = store.add("conv2.w", nn::init_uniform<T>({c2, c1, 3, 3}, c1 * 9, rng));
  conv2_b_ = store.add("conv2.b", nn::Tensor<T>::zeros({c2}));
  conv3_w_ = store.add("conv3.w", nn::init_uniform<T>({m, c2, 3, 3}, c2 * 9, rng));
  conv3_b_ = store.add("conv3.b", nn::Tensor<T>::zeros({m}));

  obs_state_ = nn::Linear<T>::create(store, "obs.state", n, m, rng);

  enc_cls_ = store.add("enc.cls", nn::init_uniform<T>({1, m}, m, rng));
  enc_state_ = nn::Linear<T>::create(store, "enc.state", n, m, rng);
  enc_action_ = nn::Linear<T>::create(store, "enc.action", n, m, rng);
  enc_layers_.clear();
  for (int i = 0; i < cfg_.enc_layers; ++i) {
    enc_layers_.push_back(nn::EncoderLayer<T>::create(store, "enc.layer" + std::to_string(i), m,
                                                      cfg_.heads, hidden, rng));
  }
  enc_out_ln_ = nn::LayerNorm<T>::create(store, "enc.out_ln", m);
  enc_latent_ = nn::Linear<T>::create(store, "enc.latent", m, 2 * cfg_.latent_dim, rng);

  dec_zproj_ = nn::Linear<T>::create(store, "dec.zproj", cfg_.latent_dim, m, rng);
  dec_queries_ = store.add("dec.queries", nn::init_uniform<T>({cfg_.chunk, m}, m, rng));
  dec_mem_ln_ = nn::LayerNorm<T>::create(store, "dec.mem_ln", m);
  dec_layers_.clear();
  for (int i = 0; i < cfg_.dec_layers; ++i) {
    dec_layers_.push_back(nn::DecoderLayer<T>::create(store, "dec.layer" + std::to_string(i), m,
                                                      cfg_.heads, hidden, rng));
  }
  dec_out_ln_ = nn::LayerNorm<T>::create(store, "dec.out_ln", m);
  head_ = nn::Linear<T>::create(store, "head", m, n, rng, /*gain=*/0.1);
}

template <typename T>
std::vector<double> BiACT<T>::normalized_state(std::span<const double> f_raw) const {
  auto f = NormStats::normalize(f_raw, stats_.state_mean, stats_.state_std);
  if (cfg_.force_mask) {
    // The no-force ablation removes the torque component of every input.
    for (int j = 0; j * 3 + 2 < static_cast<int>(f.size()); ++j) f[j * 3 + 2] = 0.0;
  }
  return f;
}

template <typename T>
typename BiACT<T>::Var BiACT<T>::image_tokens(nn::Tape<T>& tape, const std::uint8_t* pixels) const {
  const int H = cfg_.img_h, W = cfg_.img_w;
  nn::Tensor<T> img = nn::Tensor<T>::zeros({3, H, W});
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      for (int c = 0; c < 3; ++c) {
        img.v[(c * H + y) * W + x] = static_cast<T>(pixels[(y * W + x) * 3 + c]) / T(255);
      }
    }
  }
  auto x = tape.leaf(std::move(img));
  x = tape.relu(tape.conv2d(x, tape.param(conv1_w_), tape.param(conv1_b_), 2, 1));
  x = tape.relu(tape.conv2d(x, tape.param(conv2_w_), tape.param(conv2_b_), 2, 1));
  x = tape.conv2d(x, tape.param(conv3_w_), tape.param(conv3_b_), 2, 1);
  const int g = cfg_.tokens_per_camera();
  x = tape.reshape(x, {cfg_.model_dim, g});
  x = tape.transpose(x);  // (tokens, dim)
  return tape.add(x, tape.leaf(pos2d_));
}

template <typename T>
typename BiACT<T>::Var BiACT<T>::build_obs_tokens(nn::Tape<T>& tape,
                                                  const std::vector<const std::uint8_t*>& frames,
                                                  std::span<const double> f_norm) const {
  if (static_cast<int>(frames.size()) != cfg_.cameras) {
    throw ConfigError("policy: expected " + std::to_string(cfg_.cameras) + " camera frames, got " +
                      std::to_string(frames.size()));
  }
  std::vector<Var> parts;
  parts.reserve(frames.size() + 1);
  for (const auto* px : frames) parts.push_back(image_tokens(tape, px));
  nn::Tensor<T> f = nn::Tensor<T>::zeros({1, cfg_.state_dim});
  for (int i = 0; i < cfg_.state_dim; ++i) f.v[i] = static_cast<T>(f_norm[i]);
  parts.push_back(obs_state_(tape, tape.leaf(std::move(f))));
  return tape.concat_rows(parts);
}

template <typename T>
std::pair<typename BiACT<T>::Var, typename BiACT<T>::Var> BiACT<T>::build_posterior(
    nn::Tape<T>& tape, std::span<const double> chunk_norm, std::span<const double> f_norm) const {
  const int k = cfg_.chunk, n = cfg_.state_dim;
  nn::Tensor<T> f = nn::Tensor<T>::zeros({1, n});
  for (int i = 0; i < n; ++i) f.v[i] = static_cast<T>(f_norm[i]);
  nn::Tensor<T> a = nn::Tensor<T>::zeros({k, n});
  for (int i = 0; i < k * n; ++i) a.v[i] = static_cast<T>(chunk_norm[i]);

  std::vector<Var> toks{tape.param(enc_cls_), enc_state_(tape, tape.leaf(std::move(f))),
                        enc_action_(tape, tape.leaf(std::move(a)))};
  auto x = tape.add(tape.concat_rows(toks), tape.leaf(pos1d_enc_));
  for (const auto& layer : enc_layers_) x = layer(tape, x);
  x = enc_out_ln_(tape, x);
  const auto cls = tape.slice_rows(x, 0, 1);
  const auto lat = enc_latent_(tape, cls);
  const int L = cfg_.latent_dim;
  return {tape.slice_cols(lat, 0, L), tape.slice_cols(lat, L, 2 * L)};
}

template <typename T>
typename BiACT<T>::Var BiACT<T>::build_decode(nn::Tape<T>& tape, Var obs_tokens, Var z) const {
  const auto z_tok = dec_zproj_(tape, z);
  const auto memory = dec_mem_ln_(tape, tape.concat_rows({obs_tokens, z_tok}));
  auto x = tape.param(dec_queries_);
  for (const auto& layer : dec_layers_) x = layer(tape, x, memory);
  x = dec_out_ln_(tape, x);
  return head_(tape, x);  // (k, N), normalized units
}

template <typename T>
typename BiACT<T>::Var BiACT<T>::build_loss(nn::Tape<T>& tape, const TrainExample& ex,
                                            std::span<const T> eps, LossParts* parts) const {
  const int k = cfg_.chunk, n = cfg_.state_dim;
  if (static_cast<int>(ex.chunk.size()) != k * n) {
    throw ConfigError("policy: chunk size mismatch");
  }
  const auto f_norm = normalized_state(ex.f);
  std::vector<double> chunk_norm(ex.chunk.size());
  for (int i = 0; i < k; ++i) {
    auto row = NormStats::normalize(std::span<const double>(ex.chunk).subspan(i * n, n),
                                    stats_.action_mean, stats_.action_std);
    std::copy(row.begin(), row.end(), chunk_norm.begin() + static_cast<std::size_t>(i) * n);
  }

  auto [mu, logvar] = build_posterior(tape, chunk_norm, f_norm);
  // Reparameterized sample z = mu + exp(logvar/2) * eps.
  nn::Tensor<T> noise = nn::Tensor<T>::zeros({1, cfg_.latent_dim});
  for (int i = 0; i < cfg_.latent_dim; ++i) noise.v[i] = eps[i];
  const auto z =
      tape.add(mu, tape.mul(tape.exp(tape.scale(logvar, T(0.5))), tape.leaf(std::move(noise))));

  const auto obs = build_obs_tokens(tape, ex.frames, f_norm);
  const auto pred = build_decode(tape, obs, z);

  nn::Tensor<T> target = nn::Tensor<T>::zeros({k, n});
  for (int i = 0; i < k * n; ++i) target.v[i] = static_cast<T>(chunk_norm[i]);
  const auto l1 = tape.l1_loss(pred, tape.leaf(std::move(target)));
  const auto kl = tape.kl_gaussian(mu, logvar);
  const auto total = tape.add(l1, tape.scale(kl, static_cast<T>(cfg_.beta_kl)));
  if (parts != nullptr) {
    parts->l1 = static_cast<double>(tape.val(l1).v[0]);
    parts->kl = static_cast<double>(tape.val(kl).v[0]);
    parts->total = static_cast<double>(tape.val(total).v[0]);
  }
  return total;
}

template <typename T>
ActionChunk BiACT<T>::infer(const std::vector<const std::uint8_t*>& frames,
                            std::span<const double> f_raw) const {
  const auto f_norm = normalized_state(f_raw);
  // Inference only reads parameter values; backward is never called here.
  nn::Tape<T> tape(const_cast<nn::ParamStore<T>*>(&store_));
  const auto obs = build_obs_tokens(tape, frames, f_norm);
  const auto z = tape.leaf(nn::Tensor<T>::zeros({1, cfg_.latent_dim}));  // prior mean
  const auto out = build_decode(tape, obs, z);

  const int k = cfg_.chunk, n = cfg_.state_dim;
  ActionChunk chunk;
  chunk.k = k;
  chunk.n = n;
  chunk.v.resize(static_cast<std::size_t>(k) * n);
  const auto& raw = tape.val(out).v;
  std::vector<double> row(n);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < n; ++j) row[j] = static_cast<double>(raw[i * n + j]);
    const auto denorm = NormStats::denormalize(row, stats_.action_mean, stats_.action_std);
    std::copy(denorm.begin(), denorm.end(), chunk.v.begin() + static_cast<std::size_t>(i) * n);
  }
  return chunk;
}

template <typename T>
double BiACT<T>::eval_l1(const TrainExample& ex) const {
  const int k = cfg_.chunk, n = cfg_.state_dim;
  const ActionChunk pred = infer(ex.frames, ex.f);
  double s = 0.0;
  for (int i = 0; i < k; ++i) {
    const auto pn = NormStats::normalize(
        std::span<const double>(pred.v).subspan(static_cast<std::size_t>(i) * n, n),
        stats_.action_mean, stats_.action_std);
    const auto tn = NormStats::normalize(
        std::span<const double>(ex.chunk).subspan(static_cast<std::size_t>(i) * n, n),
        stats_.action_mean, stats_.action_std);
    for (int j = 0; j < n; ++j) s += std::abs(pn[j] - tn[j]);
  }
  return s / (static_cast<double>(k) * n);
}

template <typename T>
nn::ModelBlob BiACT<T>::to_blob() const {
  nn::ModelBlob blob;
  blob.config_text = cfg_.to_kv().to_text();
  for (const auto& e : store_.entries) {
    nn::ModelBlob::Param p;
    p.name = e.name;
    p.dims = e.value.shape;
    p.values.reserve(e.value.v.size());
    for (T x : e.value.v) p.values.push_back(static_cast<float>(x));
    blob.params.push_back(std::move(p));
  }
  return blob;
}

template <typename T>
BiACT<T> BiACT<T>::from_blob(const nn::ModelBlob& blob) {
  const auto kv = KvConfig::parse_text(blob.config_text);
  const BiACTConfig cfg = BiACTConfig::from_kv(kv);
  const int n = cfg.state_dim;

  NormStats stats;
  auto find = [&blob](const std::string& name) -> const nn::ModelBlob::Param* {
    for (const auto& p : blob.params) {
      if (p.name == name) return &p;
    }
    return nullptr;
  };
  for (auto [vec, name] : {std::pair{&stats.state_mean, "norm.state_mean"},
                           std::pair{&stats.state_std, "norm.state_std"},
                           std::pair{&stats.action_mean, "norm.action_mean"},
                           std::pair{&stats.action_std, "norm.action_std"}}) {
    const auto* p = find(name);
    if (p == nullptr || static_cast<int>(p->values.size()) != n) {
      throw FormatError(std::string("model file missing or malformed ") + name, 0);
    }
    vec->assign(p->values.begin(), p->values.end());
  }

  BiACT<T> model(cfg, std::move(stats));
  if (blob.params.size() != model.store_.entries.size()) {
    throw FormatError("model file parameter count " + std::to_string(blob.params.size()) +
                          " does not match architecture (" +
                          std::to_string(model.store_.entries.size()) + ")",
                      0);
  }
  for (std::size_t i = 0; i < blob.params.size(); ++i) {
    auto& e = model.store_.entries[i];
    const auto& p = blob.params[i];
    if (p.name != e.name || p.dims != e.value.shape) {
      throw FormatError("model file parameter " + p.name + " does not match expected " + e.name,
                        0);
    }
    for (std::size_t j = 0; j < e.value.v.size(); ++j) e.value.v[j] = static_cast<T>(p.values[j]);
  }
  return model;
}

template <typename T>
void BiACT<T>::save(const std::string& path) const {
  nn::write_model_file(to_blob(), path);
}

template <typename T>
BiACT<T> BiACT<T>::load(const std::string& path) {
  return from_blob(nn::read_model_file(path));
}

}  // namespace bcil::policy
