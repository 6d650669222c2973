// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include "bcil/policy/train.hpp"

#include <algorithm>
#include <ostream>

#include "bcil/errors.hpp"
#include "bcil/rng.hpp"

namespace bcil::policy {

double holdout_l1(const BiACTf& model, const Dataset& ds, int max_pairs) {
  const auto& eval_seqs = ds.holdout_seqs.empty() ? ds.train_seqs : ds.holdout_seqs;
  const int k = model.config().chunk;
  auto pairs = ds.pairs(eval_seqs, k, /*stride=*/1);
  if (pairs.empty()) throw ConfigError("holdout_l1: no evaluation pairs");
  const std::size_t step = std::max<std::size_t>(1, pairs.size() / static_cast<std::size_t>(max_pairs));
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < pairs.size(); i += step) {
    sum += model.eval_l1(ds.example(pairs[i].first, pairs[i].second, k));
    ++count;
  }
  return sum / static_cast<double>(count);
}

TrainResult train_policy(const Dataset& ds, BiACTConfig cfg, const std::string& out_path,
                         std::ostream* log) {
  if (cfg.state_dim != ds.state_dim()) {
    throw ConfigError("train: config state_dim " + std::to_string(cfg.state_dim) +
                      " does not match dataset " + std::to_string(ds.state_dim()));
  }
  if (cfg.cameras != ds.n_cameras || cfg.img_w != ds.img_w || cfg.img_h != ds.img_h) {
    throw ConfigError("train: camera/image config does not match dataset");
  }

  std::vector<std::vector<double>> states, actions;
  ds.stat_rows(states, actions);
  const NormStats stats = NormStats::fit(states, actions);
  states.clear();
  actions.clear();

  BiACTf model(cfg, stats);

  TrainResult result;
  result.holdout_l1_initial = holdout_l1(model, ds);
  if (log != nullptr) {
    *log << "params " << model.store().trainable_count() << ", holdout L1 at init "
         << result.holdout_l1_initial << "\n";
  }

  auto pairs = ds.pairs(ds.train_seqs, cfg.chunk, cfg.pair_stride);
  if (pairs.empty()) throw ConfigError("train: no training pairs (sequences shorter than chunk?)");

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(Rng::derive(cfg.seed, 1000 + static_cast<std::uint64_t>(epoch)));
    // Seeded Fisher-Yates keeps the batch order reproducible.
    for (std::size_t i = pairs.size(); i > 1; --i) {
      const std::size_t j = rng.next_u64() % i;
      std::swap(pairs[i - 1], pairs[j]);
    }
    double epoch_loss = 0.0, epoch_l1 = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start + cfg.batch <= pairs.size();
         start += static_cast<std::size_t>(cfg.batch)) {
      nn::Tape<float> tape(&model.store());
      std::vector<nn::Tape<float>::Var> losses;
      double batch_l1 = 0.0;
      std::vector<float> eps(static_cast<std::size_t>(cfg.latent_dim));
      for (int b = 0; b < cfg.batch; ++b) {
        const auto [s, row] = pairs[start + b];
        const TrainExample ex = ds.example(s, row, cfg.chunk);
        for (auto& e : eps) e = static_cast<float>(rng.normal());
        LossParts parts;
        losses.push_back(model.build_loss(tape, ex, eps, &parts));
        batch_l1 += parts.l1;
      }
      auto total = tape.mean_all(tape.concat_rows([&] {
        std::vector<nn::Tape<float>::Var> rows;
        rows.reserve(losses.size());
        for (auto l : losses) rows.push_back(tape.reshape(l, {1, 1}));
        return rows;
      }()));
      model.store().zero_grad();
      tape.backward(total);
      model.store().adam_step(static_cast<float>(cfg.lr));
      epoch_loss += static_cast<double>(tape.val(total).v[0]);
      epoch_l1 += batch_l1 / cfg.batch;
      ++batches;
      ++result.steps;
    }
    epoch_loss /= static_cast<double>(batches);
    epoch_l1 /= static_cast<double>(batches);
    result.epoch_loss.push_back(epoch_loss);
    result.epoch_l1.push_back(epoch_l1);
    if (log != nullptr) {
      *log << "epoch " << (epoch + 1) << "/" << cfg.epochs << ": loss " << epoch_loss << ", L1 "
           << epoch_l1 << " (" << batches << " steps)\n";
    }
  }

  result.holdout_l1_final = holdout_l1(model, ds);
  if (log != nullptr) {
    *log << "holdout L1 after training " << result.holdout_l1_final << "\n";
  }
  if (!out_path.empty()) model.save(out_path);
  return result;
}

}  // namespace bcil::policy
