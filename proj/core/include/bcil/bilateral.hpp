// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "bcil/errors.hpp"

namespace bcil::ctrl {

struct BilateralGains {
  double kp = 400.0;  // 1/s^2
  double kd = 40.0;   // 1/s
  double kf = 1.0;    // dimensionless force gain
  std::vector<double> joint_scale;  // optional per-joint trim, defaults to 1

  double scale(int joint) const {
    return joint >= 0 && joint < static_cast<int>(joint_scale.size()) ? joint_scale[joint] : 1.0;
  }

  void validate() const {
    if (!(kp > 0.0)) throw ConfigError("Kp must be > 0");
    if (!(kd > 0.0)) throw ConfigError("Kd must be > 0");
    if (!(kf >= 0.0)) throw ConfigError("Kf must be >= 0");
  }

  // Advisory only; underdamped gains are allowed.
  bool critically_damped() const { return kd * kd >= 4.0 * kp; }
};

// What the controller sees of one joint: angle, velocity, and the RFOB
// torque estimate.
struct JointObs {
  double angle = 0.0;
  double velocity = 0.0;
  double torque = 0.0;
};

struct TorquePair {
  double leader = 0.0;
  double follower = 0.0;
};

// Symmetric acceleration-dimension 4ch law. The differential (position)
// servo drives theta_l - theta_f to zero; the common-mode (force) servo
// accelerates both joints along the net sensed external torque, which drives
// tau_l + tau_f to zero in steady state and reflects the follower's reaction
// back to the operator. The caller adds per-robot DOB compensation
// (tau_cmd = tau_ref + dist_estimate) and clamps to torque limits.
inline TorquePair fourch_commands(const JointObs& leader, const JointObs& follower,
                                  const BilateralGains& g, double nominal_inertia,
                                  int joint = 0) {
  const double s = g.scale(joint);
  const double e = leader.angle - follower.angle;
  const double de = leader.velocity - follower.velocity;
  const double fsum = leader.torque + follower.torque;
  const double pos = 0.5 * nominal_inertia * (g.kp * e + g.kd * de) * s;
  const double frc = 0.5 * g.kf * fsum * s;
  return TorquePair{-pos + frc, pos + frc};
}

// Literal residuals of the two bilateral goals (position tracking and the
// action-reaction force relationship), for logging and tests.
inline std::pair<double, double> goal_errors(const JointObs& leader, const JointObs& follower) {
  return {leader.angle - follower.angle, leader.torque + follower.torque};
}

// Position-only bridge used by the no-force ablation: a plain PD pulling the
// follower to the predicted leader state. No force channel; the output is
// independent of both torque estimates by construction.
inline double position_only_command(const JointObs& predicted_leader, const JointObs& follower,
                                    const BilateralGains& g, double nominal_inertia,
                                    int joint = 0) {
  const double s = g.scale(joint);
  return nominal_inertia *
         (g.kp * (predicted_leader.angle - follower.angle) +
          g.kd * (predicted_leader.velocity - follower.velocity)) *
         s;
}

}  // namespace bcil::ctrl
