// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <string>
#include <vector>

#include "bcil/data/episode.hpp"

namespace bcil::harness {

// Steady grip torque of one episode: mean |tau_f| on the first grip joint
// over the middle half of the longest contiguous contact run. Zero when the
// episode never makes contact.
double steady_grip_torque(const data::Episode& ep);

struct HardnessGroup {
  double stiffness = 0.0;
  int episodes = 0;
  double mean_steady_torque = 0.0;
  double var_steady_torque = 0.0;
};

struct AnalysisResult {
  std::vector<HardnessGroup> groups;  // sorted by stiffness

  bool torque_monotone_in_stiffness() const;
};

// Groups episodes by the stiffness recorded in their meta block, writes
// torque_by_object.csv (100 Hz grip-torque series) and hardness_summary.csv
// into out_dir, and returns the aggregates. Zero episodes produce empty but
// well-formed CSVs.
AnalysisResult report_analysis(const std::vector<std::string>& episode_paths,
                               const std::string& out_dir);

}  // namespace bcil::harness
