// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bcil/kvconfig.hpp"
#include "bcil/nn/model_io.hpp"
#include "bcil/nn/nn.hpp"

namespace bcil::policy {

// State vectors are joint-major triplets: [theta(j), dtheta(j), tau(j)] per
// joint, N = 3 * n_joints dims total. Action chunks stack k such rows for the
// leader.
struct BiACTConfig {
  int chunk = 20;        // k
  int state_dim = 6;     // N
  int latent_dim = 16;
  int model_dim = 64;
  int heads = 4;
  int enc_layers = 2;
  int dec_layers = 2;
  int img_w = 32;
  int img_h = 32;
  int cameras = 2;
  double beta_kl = 10.0;
  double lr = 1e-4;
  int epochs = 6;
  int batch = 8;
  int pair_stride = 4;
  std::uint64_t seed = 1;
  bool force_mask = false;

  void validate() const;
  int tokens_per_camera() const { return (img_w / 8) * (img_h / 8); }
  int obs_tokens() const { return cameras * tokens_per_camera() + 1; }

  KvConfig to_kv() const;
  static BiACTConfig from_kv(const KvConfig& kv);
  static const std::vector<std::string>& allowed_keys();
};

// Per-dimension z-score statistics with a floored sigma.
struct NormStats {
  std::vector<double> state_mean, state_std;
  std::vector<double> action_mean, action_std;

  static constexpr double kSigmaFloor = 1e-6;

  static NormStats fit(const std::vector<std::vector<double>>& states,
                       const std::vector<std::vector<double>>& actions);

  static std::vector<double> normalize(std::span<const double> v,
                                       const std::vector<double>& mean,
                                       const std::vector<double>& std);
  static std::vector<double> denormalize(std::span<const double> v,
                                         const std::vector<double>& mean,
                                         const std::vector<double>& std);
};

struct ActionChunk {
  int k = 0;
  int n = 0;
  std::vector<double> v;  // row-major k x n, physical units

  double at(int step, int dim) const { return v[static_cast<std::size_t>(step) * n + dim]; }
};

// One training pair: camera frames at the observation instant, the follower
// state, and the k-row ground-truth leader chunk (all raw physical units).
struct TrainExample {
  std::vector<const std::uint8_t*> frames;  // cameras pointers, img_w*img_h*3 each
  std::vector<double> f;
  std::vector<double> chunk;  // k*N
};

struct LossParts {
  double total = 0.0;
  double l1 = 0.0;
  double kl = 0.0;
};

// The Bi-ACT policy: a small strided conv encoder per camera with 2-D
// sinusoidal position embeddings, a CVAE encoder producing the latent, and a
// transformer decoder emitting the k x N leader chunk from learned query
// slots. Float for training/inference, double for gradient checks.
template <typename T>
class BiACT {
 public:
  BiACT(const BiACTConfig& cfg, NormStats stats);

  const BiACTConfig& config() const { return cfg_; }
  const NormStats& stats() const { return stats_; }
  nn::ParamStore<T>& store() { return store_; }
  const nn::ParamStore<T>& store() const { return store_; }

  using Var = typename nn::Tape<T>::Var;

  // Observation encoding: per camera conv tokens + positional embedding,
  // plus one projected state token.
  Var build_obs_tokens(nn::Tape<T>& tape, const std::vector<const std::uint8_t*>& frames,
                       std::span<const double> f_norm) const;

  // CVAE posterior from the ground-truth chunk; returns (mu, logvar).
  std::pair<Var, Var> build_posterior(nn::Tape<T>& tape, std::span<const double> chunk_norm,
                                      std::span<const double> f_norm) const;

  // Decodes the normalized k x N chunk from observation tokens and latent z.
  Var build_decode(nn::Tape<T>& tape, Var obs_tokens, Var z) const;

  // Training loss for one example: L1(chunk) + beta * KL. eps is the
  // reparameterization noise (latent_dim values, standard normal).
  Var build_loss(nn::Tape<T>& tape, const TrainExample& ex, std::span<const T> eps,
                 LossParts* parts) const;

  // Inference with the prior mean z = 0; returns the denormalized chunk.
  ActionChunk infer(const std::vector<const std::uint8_t*>& frames,
                    std::span<const double> f_raw) const;

  // Normalized inference-style L1 against a ground-truth chunk.
  double eval_l1(const TrainExample& ex) const;

  std::vector<double> normalized_state(std::span<const double> f_raw) const;

  nn::ModelBlob to_blob() const;
  static BiACT<T> from_blob(const nn::ModelBlob& blob);

  void save(const std::string& path) const;
  static BiACT<T> load(const std::string& path);

 private:
  void register_params(nn::ParamStore<T>& store);
  Var image_tokens(nn::Tape<T>& tape, const std::uint8_t* pixels) const;

  BiACTConfig cfg_;
  NormStats stats_;
  nn::ParamStore<T> store_;

  // Parameter handles, in registration order.
  int conv1_w_ = -1, conv1_b_ = -1, conv2_w_ = -1, conv2_b_ = -1, conv3_w_ = -1, conv3_b_ = -1;
  nn::Linear<T> obs_state_;
  int enc_cls_ = -1;
  nn::Linear<T> enc_state_, enc_action_;
  std::vector<nn::EncoderLayer<T>> enc_layers_;
  nn::LayerNorm<T> enc_out_ln_;
  nn::Linear<T> enc_latent_;
  nn::Linear<T> dec_zproj_;
  int dec_queries_ = -1;
  nn::LayerNorm<T> dec_mem_ln_;
  std::vector<nn::DecoderLayer<T>> dec_layers_;
  nn::LayerNorm<T> dec_out_ln_;
  nn::Linear<T> head_;
  nn::Tensor<T> pos2d_, pos1d_enc_;
};

using BiACTf = BiACT<float>;
using BiACTd = BiACT<double>;

}  // namespace bcil::policy

#include "bcil/policy/policy_impl.hpp"
