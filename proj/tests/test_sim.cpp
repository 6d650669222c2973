// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include <cstring>

#include "bcil/errors.hpp"
#include "bcil/rng.hpp"
#include "bcil/sim/camera.hpp"
#include "bcil/sim/world.hpp"
#include "doctest.h"

using namespace bcil;
using namespace bcil::sim;

TEST_SUITE_BEGIN("sim");

TEST_CASE("step_joint equilibrium is a fixed point") {
  JointParams p;
  JointState s;
  const JointState next = step_joint(s, p, kDt);
  CHECK(next.angle == 0.0);
  CHECK(next.velocity == 0.0);
}

TEST_CASE("step_joint matches the hand-evaluated update") {
  JointParams p;
  p.inertia = 0.01;
  p.viscous_friction = 0.0;
  JointState s;
  s.applied_torque = 0.1;
  const JointState next = step_joint(s, p, 1e-3);
  CHECK(next.velocity == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(next.angle == doctest::Approx(1e-5).epsilon(1e-12));
}

TEST_CASE("constant torque converges to tau/D within 1% after 5 J/D") {
  JointParams p;
  p.inertia = 0.01;
  p.viscous_friction = 0.05;
  p.angle_max = 1e9;  // no stop in the way
  p.angle_min = -1e9;
  JointState s;
  s.applied_torque = 0.1;
  const double v_inf = 0.1 / 0.05;
  const int ticks = static_cast<int>(5.0 * p.inertia / p.viscous_friction / kDt);
  for (int i = 0; i < ticks; ++i) s = step_joint(s, p, kDt);
  CHECK(std::abs(s.velocity - v_inf) < 0.01 * v_inf);
}

TEST_CASE("non-finite input is a hard fault") {
  JointParams p;
  JointState s;
  s.velocity = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(step_joint(s, p, kDt), ExecFault);
}

TEST_CASE("angle limits clamp and zero velocity at the stop") {
  JointParams p;
  p.angle_max = 0.1;
  JointState s;
  s.velocity = 5.0;
  s.angle = 0.099;
  const JointState next = step_joint(s, p, kDt);
  CHECK(next.angle == 0.1);
  CHECK(next.velocity == 0.0);
}

TEST_CASE("contact torque") {
  WorldConfig cfg;
  ContactObject obj;
  obj.radius = 0.5;
  obj.stiffness = 200.0;
  obj.damping = 0.0;
  const double touch = touch_angle(cfg, obj);

  JointState grip;
  SUBCASE("jaws wider than the object: no torque") {
    grip.angle = touch - 0.2;
    CHECK(contact_torque(cfg, grip, obj) == 0.0);
  }
  SUBCASE("0.05 rad squeeze at K=200 gives -10 N*m") {
    grip.angle = touch + 0.05;
    CHECK(contact_torque(cfg, grip, obj) == doctest::Approx(-10.0).epsilon(1e-12));
  }
  SUBCASE("doubling stiffness doubles the steady torque") {
    grip.angle = touch + 0.03;
    const double t1 = contact_torque(cfg, grip, obj);
    obj.stiffness *= 2.0;
    CHECK(contact_torque(cfg, grip, obj) == doctest::Approx(2.0 * t1).epsilon(1e-12));
  }
}

TEST_CASE("contact is resistive for any penetrating state (passivity)") {
  WorldConfig cfg;
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    ContactObject obj;
    obj.radius = rng.uniform(0.2, 0.8);
    obj.stiffness = rng.uniform(10.0, 1000.0);
    obj.damping = rng.uniform(0.0, 10.0);
    JointState grip;
    grip.angle = touch_angle(cfg, obj) + rng.uniform(1e-6, 0.4);
    grip.velocity = rng.uniform(-3.0, 3.0);
    const double tau = contact_torque(cfg, grip, obj);
    CHECK(tau <= 0.0);  // never accelerates the closing direction, never adhesive
  }
}

TEST_CASE("kinetic energy is non-increasing without drive") {
  WorldConfig cfg;
  WorldState w = make_world(cfg, 3);
  Rng rng(4);
  for (auto& j : w.leader) j.velocity = rng.uniform(-2.0, 2.0);
  for (auto& j : w.follower) j.velocity = rng.uniform(-2.0, 2.0);
  const std::vector<double> zeros(cfg.n_joints(), 0.0);
  double e_prev = kinetic_energy(w, cfg);
  for (int i = 0; i < 500; ++i) {
    step_world(w, cfg, zeros, zeros);
    const double e = kinetic_energy(w, cfg);
    CHECK(e <= e_prev + 1e-15);
    e_prev = e;
  }
}

TEST_CASE("step_world with zero commands and no contact only advances time") {
  WorldConfig cfg;
  WorldState w = make_world(cfg, 1);
  const WorldState before = w;
  const std::vector<double> zeros(cfg.n_joints(), 0.0);
  step_world(w, cfg, zeros, zeros);
  CHECK(w.sim_time_us == before.sim_time_us + 1000);
  for (int j = 0; j < cfg.n_joints(); ++j) {
    CHECK(w.leader[j].angle == before.leader[j].angle);
    CHECK(w.follower[j].velocity == 0.0);
  }
}

TEST_CASE("step_world rejects dimension mismatches") {
  WorldConfig cfg;
  WorldState w = make_world(cfg, 1);
  const std::vector<double> bad(cfg.n_joints() + 1, 0.0);
  const std::vector<double> good(cfg.n_joints(), 0.0);
  CHECK_THROWS_AS(step_world(w, cfg, bad, good), ConfigError);
}

TEST_CASE("grasp drops after more than 50 ms below threshold") {
  WorldConfig cfg;
  cfg.grasp_threshold = 0.3;
  WorldState w = make_world(cfg, 1);
  ContactObject obj;
  obj.center = 0.0;
  obj.stiffness = 200.0;
  obj.damping = 0.0;
  w.objects.push_back(obj);
  const int g = cfg.grip_index(0);
  const double touch = touch_angle(cfg, w.objects[0]);
  const std::vector<double> zeros(cfg.n_joints(), 0.0);

  // Kinematic override: pin the grip angle each tick so the squeeze force is
  // exactly scripted.
  auto hold = [&](double pen, int ticks) {
    for (int i = 0; i < ticks; ++i) {
      w.follower[g].angle = touch + pen;
      w.follower[g].velocity = 0.0;
      step_world(w, cfg, zeros, zeros);
    }
  };

  hold(0.01, 5);  // 2 N*m squeeze, but not yet held long enough to attach
  CHECK_FALSE(w.objects[0].grasped);
  hold(0.01, 35);  // past the attach debounce
  CHECK(w.objects[0].grasped);

  SUBCASE("49 ms below threshold keeps the grasp") {
    hold(0.001, 49);  // 0.2 N*m < threshold
    CHECK(w.objects[0].grasped);
  }
  SUBCASE("51 ms below threshold drops the object") {
    hold(0.001, 51);
    CHECK_FALSE(w.objects[0].grasped);
    const double dropped_at = w.objects[0].center;
    hold(0.001, 20);
    CHECK(w.objects[0].center == dropped_at);  // a dropped object stays put
  }
  SUBCASE("carried object follows the gripper") {
    const double before = w.objects[0].center;
    // Drive the transport joint; object must track it while grasped.
    std::vector<double> cmd(cfg.n_joints(), 0.0);
    cmd[cfg.transport_index(0)] = 0.5;
    for (int i = 0; i < 200; ++i) {
      w.follower[g].angle = touch + 0.01;
      w.follower[g].velocity = 0.0;
      step_world(w, cfg, zeros, cmd);
    }
    CHECK(w.objects[0].grasped);
    CHECK(w.objects[0].center > before + 0.01);
    CHECK(w.objects[0].center ==
          doctest::Approx(w.follower[cfg.transport_index(0)].angle).epsilon(1e-9));
  }
}

TEST_CASE("identical seeds and command streams give bitwise-identical trajectories") {
  WorldConfig cfg;
  auto run = [&]() {
    WorldState w = make_world(cfg, 42);
    ContactObject obj;
    obj.center = 0.1;
    w.objects.push_back(obj);
    Rng rng(7);
    std::vector<double> cl(cfg.n_joints()), cf(cfg.n_joints());
    for (int i = 0; i < 400; ++i) {
      for (auto& c : cl) c = rng.uniform(-1.0, 1.0);
      for (auto& c : cf) c = rng.uniform(-1.0, 1.0);
      step_world(w, cfg, cl, cf);
    }
    return w;
  };
  const WorldState a = run();
  const WorldState b = run();
  REQUIRE(a.leader.size() == b.leader.size());
  for (std::size_t j = 0; j < a.leader.size(); ++j) {
    CHECK(std::memcmp(&a.leader[j], &b.leader[j], sizeof(JointState)) == 0);
    CHECK(std::memcmp(&a.follower[j], &b.follower[j], sizeof(JointState)) == 0);
  }
  CHECK(a.objects[0].center == b.objects[0].center);
}

TEST_CASE("camera rendering") {
  WorldConfig cfg;

  SUBCASE("empty world renders byte-identical background") {
    WorldState w;  // no arms, no objects
    const Image a = render_camera(w, cfg, 0);
    const Image b = render_camera(w, cfg, 0);
    CHECK(a.rgb == b.rgb);
    CHECK(a.bytes() == std::size_t(32) * 32 * 3);
  }

  SUBCASE("invalid camera id is a configuration error") {
    WorldState w = make_world(cfg, 1);
    CHECK_THROWS_AS(render_camera(w, cfg, cfg.n_cameras()), ConfigError);
  }

  SUBCASE("object shift moves the disc centroid by the predicted pixels") {
    auto centroid_col = [](const Image& img) {
      double acc = 0.0;
      long n = 0;
      for (int y = 0; y < img.h; ++y) {
        for (int x = 0; x < img.w; ++x) {
          const std::size_t i = (static_cast<std::size_t>(y) * img.w + x) * 3;
          if (img.rgb[i] == 210 && img.rgb[i + 1] == 70) {
            acc += x;
            ++n;
          }
        }
      }
      REQUIRE(n > 0);
      return acc / n;
    };
    WorldState w = make_world(cfg, 1);
    ContactObject obj;
    obj.center = -0.4;
    w.objects.push_back(obj);
    const Image img1 = render_camera(w, cfg, 0);
    const double dx = 0.4;
    w.objects[0].center += dx;
    const Image img2 = render_camera(w, cfg, 0);
    const int predicted = overhead_column(cfg, 0.0) - overhead_column(cfg, -0.4);
    CHECK(centroid_col(img2) - centroid_col(img1) == doctest::Approx(predicted).epsilon(1e-9));
  }

  SUBCASE("hardness is invisible: different stiffness, same image") {
    WorldState w = make_world(cfg, 1);
    ContactObject obj;
    obj.center = 0.2;
    obj.stiffness = 50.0;
    w.objects.push_back(obj);
    const Image soft = render_camera(w, cfg, 0);
    w.objects[0].stiffness = 500.0;
    const Image hard = render_camera(w, cfg, 0);
    CHECK(soft.rgb == hard.rgb);
    const Image soft1 = render_camera(w, cfg, 1);
    w.objects[0].stiffness = 50.0;
    const Image hard1 = render_camera(w, cfg, 1);
    CHECK(soft1.rgb == hard1.rgb);
  }
}

TEST_SUITE_END();
