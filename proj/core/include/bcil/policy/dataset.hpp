// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <string>
#include <vector>

#include "bcil/dabi/dabi.hpp"
#include "bcil/data/episode.hpp"
#include "bcil/policy/policy.hpp"

namespace bcil::policy {

// Splits a recorded 6*n_joints sample into follower state and leader action
// vectors (joint-major triplets).
void split_sample(std::span<const double> sample, int n_joints, std::vector<double>& f,
                  std::vector<double>& l);

// A DABI-augmented dataset held in memory: source episodes plus paired
// sequences referencing their frames.
struct Dataset {
  std::vector<data::Episode> episodes;
  std::vector<dabi::TrainingSequence> sequences;
  int n_joints = 0;
  int n_cameras = 0;
  int img_w = 0, img_h = 0;

  // Sequence indices for training vs holdout (the last offset of each source
  // episode is held out when the factor allows it).
  std::vector<int> train_seqs, holdout_seqs;

  int state_dim() const { return 3 * n_joints; }

  // Materializes the training pair at (sequence, row). The chunk covers rows
  // [row, row + k).
  TrainExample example(int seq_index, int row, int k) const;

  // All (sequence, row) pairs with a full chunk ahead, striding rows.
  std::vector<std::pair<int, int>> pairs(const std::vector<int>& seqs, int k, int stride) const;

  // Rows for normalization-stat fitting (train split only).
  void stat_rows(std::vector<std::vector<double>>& states,
                 std::vector<std::vector<double>>& actions) const;
};

// Loads a directory produced by `augment` (manifest + referenced episodes).
Dataset load_dataset(const std::string& manifest_dir);

// Builds the dataset directly from episode files (collect output) by running
// the augmentation in memory.
Dataset build_dataset(const std::vector<std::string>& episode_paths, int factor);

}  // namespace bcil::policy
