// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bcil/policy/dataset.hpp"
#include "bcil/policy/policy.hpp"

namespace bcil::policy {

struct TrainResult {
  double holdout_l1_initial = 0.0;
  double holdout_l1_final = 0.0;
  std::vector<double> epoch_loss;   // mean total loss per epoch
  std::vector<double> epoch_l1;     // mean L1 term per epoch
  std::size_t steps = 0;
};

// Deterministic training loop: seeded shuffle, fixed batch order, fixed
// reduction order. Writes the "BIWT" model (with normalization stats
// embedded) to out_path when non-empty.
TrainResult train_policy(const Dataset& ds, BiACTConfig cfg, const std::string& out_path,
                         std::ostream* log);

// Mean inference-style L1 (z = 0) over holdout pairs, in normalized units.
double holdout_l1(const BiACTf& model, const Dataset& ds, int max_pairs = 64);

}  // namespace bcil::policy
