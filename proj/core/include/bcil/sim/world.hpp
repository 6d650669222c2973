// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <span>

#include "bcil/sim/types.hpp"

namespace bcil::sim {

// Semi-implicit Euler update of a single joint. dt must be the fixed 1 ms
// step; non-finite inputs are a simulation integrity fault.
JointState step_joint(const JointState& state, const JointParams& params, double dt);

// Contact torque on a closing gripper from one object. Zero when the jaws are
// wider than the object; otherwise a resistive spring-damper, clamped to <= 0
// so the object can push the jaws open but never pull them shut.
double contact_torque(const WorldConfig& cfg, const JointState& gripper, const ContactObject& obj);

// Static squeeze force used for the grasp decision (spring part only, >= 0).
double grasp_force(const WorldConfig& cfg, const JointState& gripper, const ContactObject& obj);

// Whether arm `arm` is close enough to engage the object with its jaws.
bool arm_engaged(const WorldConfig& cfg, const WorldState& w, int arm, const ContactObject& obj);

// Advances the world by exactly one 1 ms step: applies commands (clamped to
// torque limits), computes follower contact torques, updates grasp/drop state
// and carried-object kinematics, integrates every joint.
void step_world(WorldState& w, const WorldConfig& cfg,
                std::span<const double> leader_cmds,
                std::span<const double> follower_cmds);

// Fresh world with all joints at rest at given start angles.
WorldState make_world(const WorldConfig& cfg, std::uint64_t seed);

double kinetic_energy(const WorldState& w, const WorldConfig& cfg);

}  // namespace bcil::sim
