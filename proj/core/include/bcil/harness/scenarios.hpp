// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <string>
#include <vector>

#include "bcil/exec/executor.hpp"
#include "bcil/harness/task.hpp"

namespace bcil::harness {

// Canonical controller/observer probes, shared by the CLI selftest and the
// acceptance suite.

struct TrackingMetrics {
  double rms_after_1s = 0.0;  // RMS(theta_l - theta_f) past the transient
  double max_abs_e = 0.0;
  double elapsed_s = 0.0;  // wall-clock runtime of the probe
};

// 0.5 Hz, 0.5 rad sinusoidal hand drive on the transport joint against a
// free follower.
TrackingMetrics run_tracking_scenario(double duration_s = 5.0);

struct WallPressMetrics {
  double tau_hat_l = 0.0;     // steady leader torque estimate (grip joint)
  double tau_hat_f = 0.0;     // steady follower torque estimate
  double tau_true_f = 0.0;    // plant-truth contact torque
  double residual_ratio = 0.0;  // |tau_l + tau_f| / max(|tau_f|, 0.01)
  bool signs_opposite = false;
  double rfob_rel_err = 0.0;  // |tau_hat_f - tau_true_f| / |tau_true_f|
  double settle_used_s = 0.0;
};

// The hand presses the gripper into a stiff object and holds.
WallPressMetrics run_wall_press(double stiffness = 200.0, double duration_s = 2.0,
                                double nominal_scale = 1.0);

struct ScheduleMetrics {
  int underruns = 0;
  long latches = 0;
  long ticks = 0;
  int inferences = 0;
  bool fault = false;
  std::string fault_message;
};

// Runs the executor against a hold-pose replay source to probe the refill
// schedule in isolation.
ScheduleMetrics run_schedule_probe(double latency_ms, double duration_s, int chunk_len = 20,
                                   int refill_trigger = 2);

}  // namespace bcil::harness
