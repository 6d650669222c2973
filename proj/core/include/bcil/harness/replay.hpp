// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <string>

namespace bcil::harness {

struct ReplayResult {
  long ticks = 0;
  double max_angle_dev = 0.0;     // worst |replayed - logged| joint angle
  double max_velocity_dev = 0.0;
};

// Re-simulates an episode from its logged commands and operator torques
// (debug sidecar) and compares the trajectory against the recorded samples.
// The world is rebuilt from the episode meta block.
ReplayResult replay_episode(const std::string& episode_path);

}  // namespace bcil::harness
