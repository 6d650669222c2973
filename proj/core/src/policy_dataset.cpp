// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include "bcil/policy/dataset.hpp"

#include <filesystem>

#include "bcil/data/episode_io.hpp"
#include "bcil/errors.hpp"

namespace fs = std::filesystem;

namespace bcil::policy {

void split_sample(std::span<const double> sample, int n_joints, std::vector<double>& f,
                  std::vector<double>& l) {
  f.resize(static_cast<std::size_t>(3) * n_joints);
  l.resize(static_cast<std::size_t>(3) * n_joints);
  for (int j = 0; j < n_joints; ++j) {
    l[3 * j + 0] = sample[6 * j + 0];
    l[3 * j + 1] = sample[6 * j + 1];
    l[3 * j + 2] = sample[6 * j + 2];
    f[3 * j + 0] = sample[6 * j + 3];
    f[3 * j + 1] = sample[6 * j + 4];
    f[3 * j + 2] = sample[6 * j + 5];
  }
}

TrainExample Dataset::example(int seq_index, int row, int k) const {
  const auto& seq = sequences[seq_index];
  const auto& ep = episodes[seq.episode_index];
  TrainExample ex;
  ex.frames.reserve(n_cameras);
  for (int cam = 0; cam < n_cameras; ++cam) {
    const std::int32_t fi = seq.frames[row][cam];
    if (fi < 0) throw StateError("dataset: sequence row has no paired frame");
    ex.frames.push_back(ep.frames()[fi].pixels.data());
  }
  std::vector<double> l;
  split_sample(seq.samples[row], n_joints, ex.f, l);
  ex.chunk.resize(static_cast<std::size_t>(k) * 3 * n_joints);
  std::vector<double> f_unused;
  for (int i = 0; i < k; ++i) {
    split_sample(seq.samples[row + i], n_joints, f_unused, l);
    std::copy(l.begin(), l.end(), ex.chunk.begin() + static_cast<std::size_t>(i) * 3 * n_joints);
  }
  return ex;
}

std::vector<std::pair<int, int>> Dataset::pairs(const std::vector<int>& seqs, int k,
                                                int stride) const {
  std::vector<std::pair<int, int>> out;
  for (int s : seqs) {
    const int len = static_cast<int>(sequences[s].samples.size());
    for (int row = 0; row + k <= len; row += stride) out.emplace_back(s, row);
  }
  return out;
}

void Dataset::stat_rows(std::vector<std::vector<double>>& states,
                        std::vector<std::vector<double>>& actions) const {
  std::vector<double> f, l;
  for (int s : train_seqs) {
    for (const auto& sample : sequences[s].samples) {
      split_sample(sample, n_joints, f, l);
      states.push_back(f);
      actions.push_back(l);
    }
  }
}

namespace {

Dataset assemble(std::vector<data::Episode> episodes, int factor) {
  if (episodes.empty()) throw ConfigError("dataset: no episodes");
  Dataset ds;
  ds.episodes = std::move(episodes);
  const auto& h0 = ds.episodes.front().header();
  ds.n_joints = h0.n_joints;
  ds.n_cameras = h0.n_cameras;
  ds.img_w = h0.img_w;
  ds.img_h = h0.img_h;

  for (std::size_t e = 0; e < ds.episodes.size(); ++e) {
    const auto& h = ds.episodes[e].header();
    if (h.n_joints != h0.n_joints || h.n_cameras != h0.n_cameras || h.img_w != h0.img_w ||
        h.img_h != h0.img_h) {
      throw ConfigError("dataset: episode headers disagree");
    }
    auto seqs = dabi::downsample_offsets(ds.episodes[e], factor);
    for (auto& seq : seqs) {
      seq.episode_index = static_cast<int>(e);
      dabi::pair_images(seq, ds.episodes[e]);
      const int idx = static_cast<int>(ds.sequences.size());
      if (factor > 1 && seq.offset == factor - 1) {
        ds.holdout_seqs.push_back(idx);
      } else {
        ds.train_seqs.push_back(idx);
      }
      ds.sequences.push_back(std::move(seq));
    }
  }
  return ds;
}

}  // namespace

Dataset build_dataset(const std::vector<std::string>& episode_paths, int factor) {
  std::vector<data::Episode> eps;
  eps.reserve(episode_paths.size());
  for (const auto& p : episode_paths) eps.push_back(data::read_episode(p));
  return assemble(std::move(eps), factor);
}

Dataset load_dataset(const std::string& manifest_dir) {
  const fs::path dir(manifest_dir);
  const fs::path manifest = dir / dabi::kManifestName;
  if (!fs::exists(manifest)) {
    throw IoError("no " + std::string(dabi::kManifestName) + " in " + manifest_dir);
  }
  const auto entries = dabi::read_manifest(manifest.string());
  if (entries.empty()) throw ConfigError("dataset: manifest lists no sequences");

  // All sequences of one episode share its factor; load each episode once.
  std::vector<std::string> files;
  int factor = entries.front().factor;
  for (const auto& e : entries) {
    if (e.factor != factor) throw ConfigError("dataset: mixed factors in manifest");
    const std::string full = (dir / e.episode_file).lexically_normal().string();
    bool seen = false;
    for (const auto& f : files) seen = seen || f == full;
    if (!seen) files.push_back(full);
  }
  return build_dataset(files, factor);
}

}  // namespace bcil::policy
