// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <string>
#include <vector>

#include "bcil/data/episode.hpp"
#include "bcil/data/episode_io.hpp"
#include "bcil/harness/expert.hpp"
#include "bcil/harness/task.hpp"

namespace bcil::harness {

struct DemoQuality {
  double eq1_rms = 0.0;          // position goal residual, all joints
  double eq2_rms_contact = 0.0;  // force goal residual while in contact
  bool expert_done = false;
  double mean_grip_torque = 0.0;  // mean |tau_hat_f| on grips while grasped

  // The demonstration quality gate.
  bool acceptable() const { return expert_done && eq1_rms < 0.02 && eq2_rms_contact < 0.1; }
};

struct DemoResult {
  data::Episode episode;
  data::DebugTrace debug;
  DemoQuality quality;
  sim::WorldState final_world;
};

struct CollectOptions {
  double frame_jitter_ms = 0.0;     // robustness knob; 0 keeps the exact cadence
  double stiffness_override = -1.0; // pin object hardness (analysis/eval cells)
};

// One scripted teleoperation episode (no files written).
DemoResult run_demo(const TaskSpec& task, std::uint64_t seed, const CollectOptions& opts = {});

struct CollectResult {
  std::vector<std::string> files;
  int attempts = 0;
  int rejected = 0;
};

// Records n episodes that pass the quality gate into out_dir as
// ep_###.biep (+ debug sidecars). Rejected attempts re-draw from a derived
// seed. Deterministic for a fixed seed.
CollectResult collect(const TaskSpec& task, int n_episodes, std::uint64_t seed,
                      const std::string& out_dir, const CollectOptions& opts = {});

}  // namespace bcil::harness
