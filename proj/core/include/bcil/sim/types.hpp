// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace bcil::sim {

// One revolute/prismatic joint modeled as a damped inertia.
struct JointParams {
  double inertia = 0.01;            // J, kg*m^2
  double viscous_friction = 0.05;   // D, N*m*s/rad
  double torque_limit = 8.0;        // N*m
  double angle_min = -1.6;          // rad
  double angle_max = 1.6;           // rad

  void validate() const;
};

struct JointState {
  double angle = 0.0;            // rad
  double velocity = 0.0;         // rad/s
  double applied_torque = 0.0;   // last commanded torque after clamping
  double external_torque = 0.0;  // environment/operator torque acting on the joint
};

// Graspable object on the transport line. Hardness is its contact stiffness;
// rendering deliberately ignores it.
struct ContactObject {
  double center = 0.0;       // transport coordinate
  double radius = 0.5;       // jaw gap (rad of grip travel) at which contact starts
  double stiffness = 200.0;  // K_obj, N*m/rad
  double damping = 2.0;      // C_obj, N*m*s/rad
  double mass_proxy = 0.004; // extra inertia felt by the carrying transport joint
  int required_grasps = 1;   // 1 = unimanual, 2 = both arms must hold
  bool grasped = false;

  // Attachment bookkeeping (plain state so worlds stay copyable/deterministic).
  std::array<double, 2> grasp_offset{0.0, 0.0};
  std::array<double, 2> hold_since_s{-1.0, -1.0};
  double below_threshold_s = 0.0;

  void validate() const;
};

// Full simulation state advanced at fixed 1 ms steps. Joint vectors are
// arm-major: joints of arm a occupy [a*joints_per_arm, (a+1)*joints_per_arm).
struct WorldState {
  std::vector<JointState> leader;
  std::vector<JointState> follower;
  std::vector<ContactObject> objects;

  // Task geometry (drawn by the cameras, used by success predicates).
  double pick_center = -0.8;
  double place_center = 0.8;
  double region_halfwidth = 0.18;

  std::int64_t sim_time_us = 0;
  std::uint64_t rng_seed = 0;
};

struct WorldConfig {
  int arms = 1;
  int joints_per_arm = 2;  // joint 0: transport along a line, joint 1: gripper
  JointParams transport;
  JointParams grip;

  double grasp_threshold = 0.3;     // squeeze force (N*m) needed to hold an object
  double attach_after_s = 0.03;     // force must hold this long before attachment
  double detach_after_s = 0.05;     // grace below threshold before a drop
  double capture_radius = 0.12;     // transport proximity required to engage
  double dual_grasp_window_s = 0.1; // both arms must cross threshold within this window

  std::uint16_t img_w = 32, img_h = 32;
  int cameras_per_arm = 2;  // overhead + gripper view

  WorldConfig() {
    grip.angle_min = 0.0;   // 0 = jaws fully open
    grip.angle_max = 1.2;   // grip coordinate grows as the jaws close
  }

  int n_joints() const { return arms * joints_per_arm; }
  int n_cameras() const { return arms * cameras_per_arm; }
  int transport_index(int arm) const { return arm * joints_per_arm; }
  int grip_index(int arm) const { return arm * joints_per_arm + 1; }
  const JointParams& params_for(int joint) const {
    return (joint % joints_per_arm == 1) ? grip : transport;
  }

  void validate() const;
};

constexpr double kDt = 1e-3;            // fixed integration step, 1 kHz
constexpr std::int64_t kDtUs = 1000;

// Jaw gap remaining at grip coordinate theta (closing-positive convention).
inline double jaw_gap(const WorldConfig& cfg, double grip_angle) {
  return cfg.grip.angle_max - grip_angle;
}

// Grip coordinate at which the jaws first touch an object of this radius.
inline double touch_angle(const WorldConfig& cfg, const ContactObject& obj) {
  return cfg.grip.angle_max - obj.radius;
}

}  // namespace bcil::sim
