// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include <cmath>
#include <vector>

#include "bcil/observers.hpp"
#include "bcil/rng.hpp"
#include "bcil/sim/world.hpp"
#include "doctest.h"

using namespace bcil;
using namespace bcil::obs;

TEST_SUITE_BEGIN("observers");

TEST_CASE("all-zero inputs from reset estimate zero") {
  ObserverConfig cfg;
  ObserverState s;
  for (int i = 0; i < 100; ++i) {
    dob_update(s, cfg, 0.0, 0.0, sim::kDt);
    CHECK(rfob_estimate(s, cfg, 0.0) == 0.0);
  }
  CHECK(s.dist_estimate == 0.0);
}

TEST_CASE("single step from reset matches the hand evaluation (g dt = 0.1)") {
  ObserverConfig cfg;
  cfg.cutoff = 100.0;
  ObserverState s;
  dob_update(s, cfg, 1.0, 0.0, 1e-3);
  CHECK(s.lpf_state == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(s.dist_estimate == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("disturbance step response follows -(1 - e^{-gt}) within 2%") {
  // Compensated plant with exact nominal parameters: a constant external
  // torque d0 enters at t=0 and the command cancels the running estimate
  // (tau_cmd = dist_estimate). In continuous time the estimate then follows
  // the textbook first-order step response exactly.
  ObserverConfig cfg;
  cfg.cutoff = 50.0;
  cfg.nominal_inertia = 0.01;
  cfg.nominal_friction = 0.0;
  const double d0 = 0.7;

  sim::JointParams plant;
  plant.inertia = cfg.nominal_inertia;
  plant.viscous_friction = 0.0;
  plant.angle_min = -1e9;
  plant.angle_max = 1e9;

  sim::JointState js;
  js.external_torque = d0;
  ObserverState s;
  double tau_cmd = 0.0;
  double max_err = 0.0;
  for (int i = 1; i <= 2000; ++i) {
    // The estimate after this update reflects the velocity at tick i-1.
    const double t = (i - 1) * sim::kDt;
    dob_update(s, cfg, tau_cmd, js.velocity, sim::kDt);
    tau_cmd = s.dist_estimate;
    js.applied_torque = tau_cmd;
    js = sim::step_joint(js, plant, sim::kDt);
    js.external_torque = d0;
    const double analytic = -d0 * (1.0 - std::exp(-cfg.cutoff * t));
    max_err = std::max(max_err, std::abs(s.dist_estimate - analytic));
  }
  CHECK(max_err < 0.02 * d0);
  CHECK(s.dist_estimate == doctest::Approx(-d0).epsilon(1e-3));
}

TEST_CASE("step response is monotone (first-order filter property)") {
  ObserverConfig cfg;
  ObserverState s;
  double prev = 0.0;
  for (int i = 0; i < 300; ++i) {
    dob_update(s, cfg, -1.0, 0.0, sim::kDt);  // constant negated disturbance
    CHECK(s.dist_estimate <= prev + 1e-15);
    prev = s.dist_estimate;
  }
}

TEST_CASE("discrete LTI linearity at machine precision") {
  ObserverConfig cfg;
  Rng rng(5);
  ObserverState s1, s2, s12;
  for (int i = 0; i < 500; ++i) {
    const double c1 = rng.uniform(-2.0, 2.0), v1 = rng.uniform(-3.0, 3.0);
    const double c2 = rng.uniform(-2.0, 2.0), v2 = rng.uniform(-3.0, 3.0);
    dob_update(s1, cfg, c1, v1, sim::kDt);
    dob_update(s2, cfg, c2, v2, sim::kDt);
    dob_update(s12, cfg, c1 + c2, v1 + v2, sim::kDt);
    const double e1 = rfob_estimate(s1, cfg, v1);
    const double e2 = rfob_estimate(s2, cfg, v2);
    const double e12 = rfob_estimate(s12, cfg, v1 + v2);
    CHECK(e12 == doctest::Approx(e1 + e2).epsilon(1e-12));
  }
}

TEST_CASE("free motion at constant velocity: friction fully compensated") {
  // A constant feedforward command spins the plant up to tau/D; with exact
  // nominal friction the external estimate decays to ~zero once both the
  // plant (J/D) and the observer (5/g) transients are done.
  ObserverConfig cfg;
  cfg.cutoff = 100.0;
  sim::JointParams plant;
  plant.inertia = cfg.nominal_inertia;
  plant.viscous_friction = cfg.nominal_friction;
  plant.angle_min = -1e9;
  plant.angle_max = 1e9;

  const double vel_target = 1.3;
  const double cmd = plant.viscous_friction * vel_target;
  sim::JointState js;
  js.applied_torque = cmd;
  ObserverState s;
  double est = 1.0;
  const int ticks = static_cast<int>((5.0 * plant.inertia / plant.viscous_friction +
                                      5.0 / cfg.cutoff) / sim::kDt);
  for (int i = 0; i < ticks; ++i) {
    dob_update(s, cfg, cmd, js.velocity, sim::kDt);
    est = rfob_estimate(s, cfg, js.velocity);
    js = sim::step_joint(js, plant, sim::kDt);
  }
  CHECK(std::abs(js.velocity - vel_target) < 0.01 * vel_target);
  CHECK(std::abs(est) < 0.02 * plant.viscous_friction * vel_target);
}

TEST_CASE("config validation") {
  ObserverConfig cfg;
  cfg.cutoff = 2000.0;  // g dt >= 1
  CHECK_THROWS_AS(cfg.validate(sim::kDt), ConfigError);
  cfg.cutoff = 100.0;
  cfg.nominal_inertia = 0.0;
  CHECK_THROWS_AS(cfg.validate(sim::kDt), ConfigError);
}

TEST_SUITE_END();
