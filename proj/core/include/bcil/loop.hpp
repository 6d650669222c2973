// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <span>
#include <vector>

#include "bcil/bilateral.hpp"
#include "bcil/observers.hpp"
#include "bcil/sim/world.hpp"

namespace bcil {

struct LoopConfig {
  sim::WorldConfig world;
  obs::ObserverConfig observer;
  ctrl::BilateralGains gains;
  // Multiplies the observer's nominal parameters to inject model mismatch in
  // robustness tests; 1 = exact plant knowledge.
  double nominal_scale = 1.0;

  obs::ObserverConfig effective_observer() const {
    obs::ObserverConfig c = observer;
    c.nominal_inertia *= nominal_scale;
    c.nominal_friction *= nominal_scale;
    return c;
  }
};

// Runs the 1 kHz control cycle: DOB/RFOB update from the previously applied
// commands, 4ch bilateral law, DOB compensation, world step. One instance
// owns the world plus one observer pair per joint.
class ControlLoop {
 public:
  ControlLoop(const LoopConfig& cfg, sim::WorldState initial);

  // Teleoperation tick. `hand_torque` is the operator model acting on the
  // leader joints as an external torque (size n_joints).
  void step_teleop(std::span<const double> hand_torque);

  // Autonomous tick: the leader is virtual (a predicted row); only the
  // follower is actuated. With `position_only` the force channel is removed.
  void step_autonomous(std::span<const ctrl::JointObs> predicted_leader, bool position_only);

  const sim::WorldState& world() const { return world_; }
  sim::WorldState& mutable_world() { return world_; }
  const LoopConfig& config() const { return cfg_; }

  // Values from the most recent tick.
  const std::vector<double>& tau_hat_leader() const { return tau_hat_l_; }
  const std::vector<double>& tau_hat_follower() const { return tau_hat_f_; }
  const std::vector<double>& tau_cmd_leader() const { return cmd_l_; }
  const std::vector<double>& tau_cmd_follower() const { return cmd_f_; }
  long saturation_count() const { return saturations_; }

 private:
  void update_observers();
  void finish_step(std::span<const double> leader_ext);

  LoopConfig cfg_;
  obs::ObserverConfig ocfg_;
  sim::WorldState world_;
  std::vector<obs::ObserverState> obs_l_, obs_f_;
  std::vector<double> prev_cmd_l_, prev_cmd_f_;
  std::vector<double> cmd_l_, cmd_f_;
  std::vector<double> tau_hat_l_, tau_hat_f_;
  long saturations_ = 0;
};

}  // namespace bcil
