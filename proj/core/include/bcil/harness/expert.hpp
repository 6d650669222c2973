// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <vector>

#include "bcil/harness/task.hpp"

namespace bcil::harness {

enum class ExpertPhase { approach, close, confirm, transport, settle, open_grip, retreat, done };

// The human-teleoperator stand-in: a waypoint state machine that drives the
// leader through a PD "hand" acting as an external torque, layered on the
// running 4ch coupling. Closing stops by force threshold (plus a small fixed
// squeeze margin), so demonstrations adapt to object hardness: stiff objects
// see the reflected torque rise at a shallower squeeze and end up gripped
// harder at the frozen target.
class ScriptedExpert {
 public:
  ScriptedExpert(const TaskSpec& task, const sim::WorldState& initial);

  // Computes this tick's hand torques from the live world and the follower's
  // torque estimates (the forces the operator "feels" through the leader).
  void tick(const sim::WorldState& w, const std::vector<double>& tau_hat_follower,
            std::vector<double>& hand_out);

  ExpertPhase phase() const { return phase_; }
  bool done() const { return phase_ == ExpertPhase::done; }
  bool grasp_triggered(int arm) const { return grip_frozen_[arm]; }

 private:
  void advance(ExpertPhase next);
  static void ramp(double& target, double goal, double rate);

  TaskSpec task_;
  ExpertConfig cfg_;
  LoopConfig lc_;
  ExpertPhase phase_ = ExpertPhase::approach;
  double phase_t_ = 0.0;
  double object_x_ = 0.0;  // goal fixed at episode start, like a human eyeing the scene
  std::vector<double> target_;
  std::vector<bool> grip_frozen_;
};

}  // namespace bcil::harness
