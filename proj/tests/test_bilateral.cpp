// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include <cmath>

#include "bcil/bilateral.hpp"
#include "bcil/harness/scenarios.hpp"
#include "bcil/loop.hpp"
#include "doctest.h"

using namespace bcil;
using namespace bcil::ctrl;

TEST_SUITE_BEGIN("bilateral");

TEST_CASE("fourch satisfies both goals at the trivial fixed point") {
  BilateralGains g;
  const JointObs same{0.4, -0.2, 0.0};
  const auto out = fourch_commands(same, same, g, 0.01);
  CHECK(out.leader == 0.0);
  CHECK(out.follower == 0.0);
}

TEST_CASE("fourch position term matches the hand evaluation") {
  BilateralGains g;
  g.kp = 400.0;
  g.kd = 40.0;
  const JointObs l{0.1, 0.0, 0.0};
  const JointObs f{0.0, 0.0, 0.0};
  const auto out = fourch_commands(l, f, g, 0.01);
  CHECK(out.leader == doctest::Approx(-0.2).epsilon(1e-12));
  CHECK(out.follower == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("swapping sides negates the position term and preserves the force term") {
  BilateralGains g;
  const JointObs l{0.3, 0.1, 0.5};
  const JointObs f{0.1, -0.2, -0.1};
  const auto ab = fourch_commands(l, f, g, 0.01);
  const auto ba = fourch_commands(f, l, g, 0.01);
  // Position parts are antisymmetric, force parts symmetric:
  const double pos_ab = 0.5 * (ab.follower - ab.leader);
  const double pos_ba = 0.5 * (ba.follower - ba.leader);
  const double frc_ab = 0.5 * (ab.follower + ab.leader);
  const double frc_ba = 0.5 * (ba.follower + ba.leader);
  CHECK(pos_ab == doctest::Approx(-pos_ba).epsilon(1e-12));
  CHECK(frc_ab == doctest::Approx(frc_ba).epsilon(1e-12));
}

TEST_CASE("goal_errors returns the literal residuals") {
  const JointObs l{0.3, 0.0, 0.5};
  const JointObs f{0.1, 0.0, -0.4};
  const auto [pos, frc] = goal_errors(l, f);
  CHECK(pos == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(frc == doctest::Approx(0.1).epsilon(1e-12));

  const JointObs a{0.2, 0.0, 0.7};
  const JointObs b{0.2, 0.0, -0.7};
  const auto [p2, f2] = goal_errors(a, b);
  CHECK(p2 == 0.0);
  CHECK(f2 == 0.0);
}

TEST_CASE("position-only bridge") {
  BilateralGains g;
  g.kp = 400.0;
  g.kd = 40.0;
  SUBCASE("zero error gives zero command") {
    const JointObs same{0.2, 0.1, 0.0};
    CHECK(position_only_command(same, same, g, 0.01) == 0.0);
  }
  SUBCASE("hand evaluation") {
    const JointObs pred{0.1, 0.0, 0.0};
    const JointObs f{0.0, 0.0, 0.0};
    CHECK(position_only_command(pred, f, g, 0.01) == doctest::Approx(0.4).epsilon(1e-12));
  }
  SUBCASE("output is independent of the torque estimates") {
    JointObs pred{0.1, 0.05, 0.0};
    JointObs f{0.0, 0.0, 0.0};
    const double base = position_only_command(pred, f, g, 0.01);
    pred.torque = 3.0;
    f.torque = -7.0;
    CHECK(position_only_command(pred, f, g, 0.01) == base);
  }
}

TEST_CASE("gains validation") {
  BilateralGains g;
  g.kp = 0.0;
  CHECK_THROWS_AS(g.validate(), ConfigError);
  g = BilateralGains{};
  CHECK(g.critically_damped());  // 40^2 >= 4*400
  g.kd = 10.0;
  CHECK_FALSE(g.critically_damped());
}

TEST_CASE("tracking: sinusoidal leader drive, free follower (Eq.1 residual)") {
  const auto m = harness::run_tracking_scenario(3.0);
  CHECK(m.rms_after_1s < 0.01);
  CHECK(m.max_abs_e < 0.05);
}

TEST_CASE("wall press: action-reaction and force reflection (Eq.2 residual)") {
  const auto m = harness::run_wall_press(200.0, 2.0);
  CHECK(m.residual_ratio < 0.05);
  CHECK(m.signs_opposite);
  CHECK(std::abs(m.tau_hat_f) > 0.5);  // a real contact built up
  CHECK(m.rfob_rel_err < 0.05);        // sensorless estimate matches plant truth
}

TEST_CASE("with Kf = 0 the force residual is unregulated while tracking converges") {
  LoopConfig lc;
  lc.gains.kf = 0.0;
  sim::WorldState world = sim::make_world(lc.world, 1);
  world.leader[0].angle = 0.3;  // initial mismatch
  ControlLoop loop(lc, world);
  std::vector<double> hand(lc.world.n_joints(), 0.0);
  hand[0] = 0.5;  // constant push that nothing regulates away
  for (int i = 0; i < 3000; ++i) loop.step_teleop(hand);
  const double e = loop.world().leader[0].angle - loop.world().follower[0].angle;
  const double f = loop.tau_hat_leader()[0] + loop.tau_hat_follower()[0];
  CHECK(std::abs(e) < 0.01);  // Eq.1 still served by the position channel
  CHECK(std::abs(f) > 0.3);   // Eq.2 residual stays, the channel is off
}

TEST_SUITE_END();
