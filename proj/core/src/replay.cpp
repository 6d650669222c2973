// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include "bcil/harness/replay.hpp"

#include <cmath>

#include "bcil/data/episode_io.hpp"
#include "bcil/errors.hpp"
#include "bcil/harness/task.hpp"

namespace bcil::harness {

ReplayResult replay_episode(const std::string& episode_path) {
  const data::Episode ep = data::read_episode(episode_path);
  const data::DebugTrace trace = data::read_debug_trace(data::debug_sidecar_path(episode_path));
  if (trace.t_us.size() != ep.samples().size()) {
    throw FormatError("replay: debug trace length does not match episode", 0);
  }

  TaskSpec task;
  sim::WorldState world = world_from_meta(KvConfig::parse_text(ep.header().meta), &task);
  const LoopConfig lc = task.loop_config();
  const int n = lc.world.n_joints();
  if (ep.header().n_joints != n) {
    throw FormatError("replay: episode joint count does not match task", 0);
  }

  ReplayResult res;
  for (std::size_t i = 0; i < trace.t_us.size(); ++i) {
    const auto& s = ep.samples()[i];
    for (int j = 0; j < n; ++j) {
      res.max_angle_dev = std::max(
          res.max_angle_dev, std::abs(world.leader[j].angle - s.v[6 * j + 0]));
      res.max_angle_dev = std::max(
          res.max_angle_dev, std::abs(world.follower[j].angle - s.v[6 * j + 3]));
      res.max_velocity_dev = std::max(
          res.max_velocity_dev, std::abs(world.leader[j].velocity - s.v[6 * j + 1]));
      res.max_velocity_dev = std::max(
          res.max_velocity_dev, std::abs(world.follower[j].velocity - s.v[6 * j + 4]));
      // The logged operator torque is the leader's external input; follower
      // contact torques are recomputed by the plant.
      world.leader[j].external_torque = trace.tau_ext_true_l[i][j];
    }
    sim::step_world(world, lc.world, trace.tau_cmd_l[i], trace.tau_cmd_f[i]);
    ++res.ticks;
  }
  return res;
}

}  // namespace bcil::harness
