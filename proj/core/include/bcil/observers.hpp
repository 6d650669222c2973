// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include "bcil/errors.hpp"

namespace bcil::obs {

// First-order disturbance observer realized with velocity feedback (no
// explicit acceleration differentiation).
struct ObserverConfig {
  double cutoff = 100.0;           // g, rad/s
  double nominal_inertia = 0.01;   // J_n
  double nominal_friction = 0.05;  // D_n

  void validate(double dt) const {
    if (!(cutoff > 0.0)) throw ConfigError("observer cutoff must be > 0");
    if (!(nominal_inertia > 0.0)) throw ConfigError("nominal inertia must be > 0");
    if (!(nominal_friction >= 0.0)) throw ConfigError("nominal friction must be >= 0");
    if (!(cutoff * dt < 1.0)) throw ConfigError("observer cutoff too high for step size");
  }
};

struct ObserverState {
  double lpf_state = 0.0;      // p
  double dist_estimate = 0.0;  // tau_dis_hat, the negated lumped disturbance
  double ext_estimate = 0.0;   // tau_ext_hat from the RFOB step

  void reset() { *this = ObserverState{}; }
};

// p' = p + dt*g*(tau_cmd + g*J_n*velocity - p); dist = p' - g*J_n*velocity.
// This low-passes (tau_cmd - J_n * accel), i.e. minus the lumped disturbance,
// so the loop can compensate with tau_cmd = tau_ref + dist_estimate.
inline void dob_update(ObserverState& s, const ObserverConfig& c, double tau_cmd,
                       double velocity, double dt) {
  const double gjv = c.cutoff * c.nominal_inertia * velocity;
  s.lpf_state += dt * c.cutoff * (tau_cmd + gjv - s.lpf_state);
  s.dist_estimate = s.lpf_state - gjv;
}

// Subtracts modeled friction to isolate the external torque acting on the
// joint. Requires dob_update to have run this tick.
inline double rfob_estimate(ObserverState& s, const ObserverConfig& c, double velocity) {
  s.ext_estimate = c.nominal_friction * velocity - s.dist_estimate;
  return s.ext_estimate;
}

}  // namespace bcil::obs
