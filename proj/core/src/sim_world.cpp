// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include "bcil/sim/world.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bcil/errors.hpp"

namespace bcil::sim {

void JointParams::validate() const {
  if (!(inertia > 0.0)) throw ConfigError("joint inertia must be > 0");
  if (!(viscous_friction >= 0.0)) throw ConfigError("viscous friction must be >= 0");
  if (!(torque_limit > 0.0)) throw ConfigError("torque limit must be > 0");
  if (!(angle_min < angle_max)) throw ConfigError("angle_min must be < angle_max");
}

void ContactObject::validate() const {
  if (!(stiffness > 0.0)) throw ConfigError("object stiffness must be > 0");
  if (!(damping >= 0.0)) throw ConfigError("object damping must be >= 0");
  if (!(radius > 0.0)) throw ConfigError("object radius must be > 0");
  if (required_grasps < 1 || required_grasps > 2) {
    throw ConfigError("required_grasps must be 1 or 2");
  }
}

void WorldConfig::validate() const {
  if (arms < 1 || arms > 2) throw ConfigError("arms must be 1 or 2");
  if (joints_per_arm < 2) throw ConfigError("need at least transport + grip joints per arm");
  transport.validate();
  grip.validate();
  if (!(grasp_threshold >= 0.0)) throw ConfigError("grasp_threshold must be >= 0");
}

namespace {

bool finite(double v) { return std::isfinite(v); }

void check_finite(const JointState& s, const char* who) {
  if (!finite(s.angle) || !finite(s.velocity) || !finite(s.applied_torque) ||
      !finite(s.external_torque)) {
    throw ExecFault(std::string("simulation integrity violation: non-finite ") + who);
  }
}

}  // namespace

JointState step_joint(const JointState& state, const JointParams& params, double dt) {
  check_finite(state, "joint state");
  if (!finite(dt) || dt <= 0.0) throw ExecFault("simulation integrity violation: bad dt");

  JointState next = state;
  const double accel =
      (state.applied_torque + state.external_torque - params.viscous_friction * state.velocity) /
      params.inertia;
  next.velocity = state.velocity + dt * accel;
  next.angle = state.angle + dt * next.velocity;
  if (next.angle < params.angle_min) {
    next.angle = params.angle_min;
    next.velocity = 0.0;  // hard stop
  } else if (next.angle > params.angle_max) {
    next.angle = params.angle_max;
    next.velocity = 0.0;
  }
  return next;
}

double contact_torque(const WorldConfig& cfg, const JointState& gripper, const ContactObject& obj) {
  const double pen = gripper.angle - touch_angle(cfg, obj);
  if (pen <= 0.0) return 0.0;
  const double tau = -obj.stiffness * pen - obj.damping * gripper.velocity;
  return std::min(tau, 0.0);  // resistive only, never adhesive
}

double grasp_force(const WorldConfig& cfg, const JointState& gripper, const ContactObject& obj) {
  const double pen = gripper.angle - touch_angle(cfg, obj);
  return pen > 0.0 ? obj.stiffness * pen : 0.0;
}

bool arm_engaged(const WorldConfig& cfg, const WorldState& w, int arm, const ContactObject& obj) {
  const double x = w.follower[cfg.transport_index(arm)].angle;
  return std::abs(x - obj.center) <= cfg.capture_radius;
}

WorldState make_world(const WorldConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  WorldState w;
  w.leader.assign(static_cast<std::size_t>(cfg.n_joints()), JointState{});
  w.follower.assign(static_cast<std::size_t>(cfg.n_joints()), JointState{});
  w.rng_seed = seed;
  return w;
}

double kinetic_energy(const WorldState& w, const WorldConfig& cfg) {
  double e = 0.0;
  for (int j = 0; j < cfg.n_joints(); ++j) {
    e += 0.5 * cfg.params_for(j).inertia *
         (w.leader[j].velocity * w.leader[j].velocity +
          w.follower[j].velocity * w.follower[j].velocity);
  }
  return e;
}

void step_world(WorldState& w, const WorldConfig& cfg,
                std::span<const double> leader_cmds,
                std::span<const double> follower_cmds) {
  const int n = cfg.n_joints();
  if (static_cast<int>(leader_cmds.size()) != n ||
      static_cast<int>(follower_cmds.size()) != n ||
      static_cast<int>(w.leader.size()) != n || static_cast<int>(w.follower.size()) != n) {
    throw ConfigError("step_world: command/joint dimension mismatch");
  }

  // 1. Apply clamped commands.
  for (int j = 0; j < n; ++j) {
    const double lim = cfg.params_for(j).torque_limit;
    if (!finite(leader_cmds[j]) || !finite(follower_cmds[j])) {
      throw ExecFault("simulation integrity violation: non-finite command torque");
    }
    w.leader[j].applied_torque = std::clamp(leader_cmds[j], -lim, lim);
    w.follower[j].applied_torque = std::clamp(follower_cmds[j], -lim, lim);
  }

  // 2. Contact torques on follower grippers. Leader joints keep whatever
  // external torque the caller (operator model) set.
  for (int a = 0; a < cfg.arms; ++a) {
    const int g = cfg.grip_index(a);
    double tau = 0.0;
    for (const auto& obj : w.objects) {
      if (arm_engaged(cfg, w, a, obj)) tau += contact_torque(cfg, w.follower[g], obj);
    }
    w.follower[g].external_torque = tau;
  }

  // 3. Grasp / drop state machine.
  const double t_s = static_cast<double>(w.sim_time_us) * 1e-6;
  for (auto& obj : w.objects) {
    if (!obj.grasped) {
      int satisfied = 0;
      int debounced = 0;
      double earliest = t_s, latest = t_s;
      for (int a = 0; a < obj.required_grasps; ++a) {
        const bool holding = arm_engaged(cfg, w, a, obj) &&
                             grasp_force(cfg, w.follower[cfg.grip_index(a)], obj) >=
                                 cfg.grasp_threshold;
        if (holding) {
          if (obj.hold_since_s[a] < 0.0) obj.hold_since_s[a] = t_s;
          ++satisfied;
          if (t_s - obj.hold_since_s[a] >= cfg.attach_after_s) ++debounced;
          earliest = std::min(earliest, obj.hold_since_s[a]);
          latest = std::max(latest, obj.hold_since_s[a]);
        } else {
          obj.hold_since_s[a] = -1.0;
        }
      }
      if (satisfied == obj.required_grasps && debounced == obj.required_grasps &&
          (latest - earliest) <= cfg.dual_grasp_window_s) {
        obj.grasped = true;
        obj.below_threshold_s = 0.0;
        for (int a = 0; a < obj.required_grasps; ++a) {
          obj.grasp_offset[a] = obj.center - w.follower[cfg.transport_index(a)].angle;
        }
      }
    } else {
      bool all_hold = true;
      for (int a = 0; a < obj.required_grasps; ++a) {
        if (grasp_force(cfg, w.follower[cfg.grip_index(a)], obj) < cfg.grasp_threshold) {
          all_hold = false;
        }
      }
      if (all_hold) {
        obj.below_threshold_s = 0.0;
      } else {
        obj.below_threshold_s += kDt;
        if (obj.below_threshold_s > cfg.detach_after_s) {
          obj.grasped = false;  // drop: object stays where it is
          obj.below_threshold_s = 0.0;
          obj.hold_since_s = {-1.0, -1.0};
        }
      }
    }
  }

  // 4. Integrate joints. A carried object adds its mass proxy to the carrying
  // transport joints (split between arms for a dual grasp).
  for (int j = 0; j < n; ++j) {
    JointParams lp = cfg.params_for(j);
    JointParams fp = cfg.params_for(j);
    for (const auto& obj : w.objects) {
      if (!obj.grasped) continue;
      for (int a = 0; a < obj.required_grasps; ++a) {
        if (j == cfg.transport_index(a)) {
          fp.inertia += obj.mass_proxy / obj.required_grasps;
        }
      }
    }
    w.leader[j] = step_joint(w.leader[j], lp, kDt);
    w.follower[j] = step_joint(w.follower[j], fp, kDt);
  }

  // 5. Carried objects follow their grippers.
  for (auto& obj : w.objects) {
    if (!obj.grasped) continue;
    double c = 0.0;
    for (int a = 0; a < obj.required_grasps; ++a) {
      c += w.follower[cfg.transport_index(a)].angle + obj.grasp_offset[a];
    }
    obj.center = c / obj.required_grasps;
  }

  w.sim_time_us += kDtUs;
}

}  // namespace bcil::sim
