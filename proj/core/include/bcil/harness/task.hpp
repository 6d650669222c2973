// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <string>
#include <vector>

#include "bcil/kvconfig.hpp"
#include "bcil/loop.hpp"

namespace bcil::harness {

// The operator hand must stay soft: its wrench reaches the joints through the
// RFOB-filtered force channel, so a stiff hand pushes the loop crossover into
// the observer lag and chatters against the torque clamp.
struct ExpertConfig {
  double hand_kp = 100.0;        // operator hand stiffness, N*m/rad
  double hand_kd = 5.0;          // operator hand damping
  double hand_max_torque = 30.0;
  double approach_speed = 1.2;   // rad/s target ramp on the transport joint
  double close_speed_fast = 0.8; // grip ramp while the jaws are clear of the object
  double close_speed = 0.2;      // grip ramp near and through contact
  double near_gap = 0.12;        // switch to the slow ramp this close to touch
  double grasp_torque = 0.45;    // |tau_hat| that stops the closing ramp
  double squeeze_margin = 0.03;  // extra closing target once the threshold trips
  double open_angle = 0.05;      // grip target when released
  double settle_s = 0.05;  // brief pause at the place point before opening
};

// Task definition: geometry, the stiffness ladder, and the scripted expert
// parameters. The trained set brackets the ladder; the middle value is the
// untrained generalization probe.
struct TaskSpec {
  std::string name = "pick_place";
  int arms = 1;
  std::vector<double> trained_stiffness{50.0, 500.0};
  std::vector<double> untrained_stiffness{200.0};
  double object_radius = 0.5;
  double object_damping = 2.0;
  double object_mass = 0.004;
  double pick_center = -0.8;
  double place_center = 0.8;
  double region_halfwidth = 0.18;
  double position_jitter = 0.08;
  double episode_s = 6.0;
  double home_x = 0.0;
  ExpertConfig expert;

  void validate() const;

  // Registered tasks; accepts "pick" as an alias for pick_place.
  static TaskSpec by_name(const std::string& name);
  static TaskSpec pick_place();
  static TaskSpec lift_bar();

  LoopConfig loop_config() const;

  // Draws object stiffness and start position from the seed. A positive
  // stiffness_override pins the hardness (evaluation cells).
  sim::WorldState make_world(std::uint64_t seed, double stiffness_override = -1.0) const;

  // Everything needed to rebuild the initial world, as episode meta text.
  std::string world_meta(const sim::WorldState& w, std::uint64_t seed) const;
};

// Rebuilds the initial world of a recorded episode from its meta block.
sim::WorldState world_from_meta(const KvConfig& meta, TaskSpec* task_out = nullptr);

}  // namespace bcil::harness
