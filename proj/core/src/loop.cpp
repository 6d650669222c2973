// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include "bcil/loop.hpp"

#include <algorithm>
#include <cmath>

#include "bcil/errors.hpp"

namespace bcil {

ControlLoop::ControlLoop(const LoopConfig& cfg, sim::WorldState initial)
    : cfg_(cfg), ocfg_(cfg.effective_observer()), world_(std::move(initial)) {
  cfg_.world.validate();
  ocfg_.validate(sim::kDt);
  cfg_.gains.validate();
  const int n = cfg_.world.n_joints();
  if (static_cast<int>(world_.leader.size()) != n) {
    throw ConfigError("ControlLoop: world joint count does not match config");
  }
  obs_l_.assign(n, obs::ObserverState{});
  obs_f_.assign(n, obs::ObserverState{});
  prev_cmd_l_.assign(n, 0.0);
  prev_cmd_f_.assign(n, 0.0);
  cmd_l_.assign(n, 0.0);
  cmd_f_.assign(n, 0.0);
  tau_hat_l_.assign(n, 0.0);
  tau_hat_f_.assign(n, 0.0);
}

void ControlLoop::update_observers() {
  const int n = cfg_.world.n_joints();
  for (int j = 0; j < n; ++j) {
    obs::dob_update(obs_l_[j], ocfg_, prev_cmd_l_[j], world_.leader[j].velocity, sim::kDt);
    tau_hat_l_[j] = obs::rfob_estimate(obs_l_[j], ocfg_, world_.leader[j].velocity);
    obs::dob_update(obs_f_[j], ocfg_, prev_cmd_f_[j], world_.follower[j].velocity, sim::kDt);
    tau_hat_f_[j] = obs::rfob_estimate(obs_f_[j], ocfg_, world_.follower[j].velocity);
  }
}

void ControlLoop::finish_step(std::span<const double> leader_ext) {
  const int n = cfg_.world.n_joints();
  for (int j = 0; j < n; ++j) {
    const double lim = cfg_.world.params_for(j).torque_limit;
    if (std::abs(cmd_l_[j]) > lim || std::abs(cmd_f_[j]) > lim) ++saturations_;
    world_.leader[j].external_torque = leader_ext.empty() ? 0.0 : leader_ext[j];
  }
  sim::step_world(world_, cfg_.world, cmd_l_, cmd_f_);
  // The DOB must see what was actually applied, including clamping.
  for (int j = 0; j < n; ++j) {
    prev_cmd_l_[j] = world_.leader[j].applied_torque;
    prev_cmd_f_[j] = world_.follower[j].applied_torque;
  }
}

void ControlLoop::step_teleop(std::span<const double> hand_torque) {
  const int n = cfg_.world.n_joints();
  if (static_cast<int>(hand_torque.size()) != n) {
    throw ConfigError("step_teleop: hand torque dimension mismatch");
  }
  update_observers();
  const double jn = ocfg_.nominal_inertia;
  for (int j = 0; j < n; ++j) {
    const ctrl::JointObs l{world_.leader[j].angle, world_.leader[j].velocity, tau_hat_l_[j]};
    const ctrl::JointObs f{world_.follower[j].angle, world_.follower[j].velocity, tau_hat_f_[j]};
    const auto ref = ctrl::fourch_commands(l, f, cfg_.gains, jn, j);
    cmd_l_[j] = ref.leader + obs_l_[j].dist_estimate;
    cmd_f_[j] = ref.follower + obs_f_[j].dist_estimate;
  }
  finish_step(hand_torque);
}

void ControlLoop::step_autonomous(std::span<const ctrl::JointObs> predicted_leader,
                                  bool position_only) {
  const int n = cfg_.world.n_joints();
  if (static_cast<int>(predicted_leader.size()) != n) {
    throw ConfigError("step_autonomous: predicted leader dimension mismatch");
  }
  update_observers();
  const double jn = ocfg_.nominal_inertia;
  for (int j = 0; j < n; ++j) {
    const ctrl::JointObs f{world_.follower[j].angle, world_.follower[j].velocity, tau_hat_f_[j]};
    double ref = 0.0;
    if (position_only) {
      ref = ctrl::position_only_command(predicted_leader[j], f, cfg_.gains, jn, j);
    } else {
      ref = ctrl::fourch_commands(predicted_leader[j], f, cfg_.gains, jn, j).follower;
    }
    cmd_l_[j] = 0.0;  // leader hardware absent at execution time
    cmd_f_[j] = ref + obs_f_[j].dist_estimate;
  }
  finish_step({});
}

}  // namespace bcil
