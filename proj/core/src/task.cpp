// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include "bcil/harness/task.hpp"

#include <cmath>
#include <cstdio>

#include "bcil/errors.hpp"
#include "bcil/rng.hpp"

namespace bcil::harness {
namespace {

std::string fmt_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void TaskSpec::validate() const {
  if (arms < 1 || arms > 2) throw ConfigError("task: arms must be 1 or 2");
  if (trained_stiffness.empty()) throw ConfigError("task: need at least one trained stiffness");
  for (double k : trained_stiffness) {
    if (!(k > 0.0)) throw ConfigError("task: stiffness must be > 0");
  }
  const double gap = std::abs(place_center - pick_center);
  if (gap <= 2.0 * region_halfwidth) {
    throw ConfigError("task: pick and place regions must be disjoint");
  }
  if (!(episode_s > 0.5)) throw ConfigError("task: episode too short");
}

TaskSpec TaskSpec::pick_place() {
  TaskSpec t;
  t.name = "pick_place";
  t.validate();
  return t;
}

TaskSpec TaskSpec::lift_bar() {
  TaskSpec t;
  t.name = "lift_bar";
  t.arms = 2;
  t.object_radius = 0.5;
  t.object_mass = 0.008;
  t.episode_s = 6.0;
  t.validate();
  return t;
}

TaskSpec TaskSpec::by_name(const std::string& name) {
  if (name == "pick" || name == "pick_place") return pick_place();
  if (name == "lift_bar") return lift_bar();
  throw UsageError("unknown task: " + name + " (expected pick|pick_place|lift_bar)");
}

LoopConfig TaskSpec::loop_config() const {
  LoopConfig cfg;
  cfg.world.arms = arms;
  return cfg;
}

sim::WorldState TaskSpec::make_world(std::uint64_t seed, double stiffness_override) const {
  const LoopConfig lc = loop_config();
  sim::WorldState w = sim::make_world(lc.world, seed);
  w.pick_center = pick_center;
  w.place_center = place_center;
  w.region_halfwidth = region_halfwidth;

  Rng rng(seed);
  sim::ContactObject obj;
  obj.center = pick_center + rng.uniform(-position_jitter, position_jitter);
  obj.radius = object_radius;
  obj.damping = object_damping;
  obj.mass_proxy = object_mass;
  obj.required_grasps = arms == 2 ? 2 : 1;
  if (stiffness_override > 0.0) {
    obj.stiffness = stiffness_override;
  } else {
    obj.stiffness =
        trained_stiffness[rng.uniform_int(0, static_cast<int>(trained_stiffness.size()) - 1)];
  }
  w.objects.push_back(obj);

  // Arms start at home.
  for (int a = 0; a < arms; ++a) {
    w.leader[lc.world.transport_index(a)].angle = home_x;
    w.follower[lc.world.transport_index(a)].angle = home_x;
  }
  return w;
}

std::string TaskSpec::world_meta(const sim::WorldState& w, std::uint64_t seed) const {
  KvConfig kv;
  kv.set("task", name);
  kv.set("arms", std::to_string(arms));
  kv.set("seed", std::to_string(seed));
  const auto& obj = w.objects.front();
  kv.set("object_x", fmt_double(obj.center));
  kv.set("object_radius", fmt_double(obj.radius));
  kv.set("object_stiffness", fmt_double(obj.stiffness));
  kv.set("object_damping", fmt_double(obj.damping));
  kv.set("object_mass", fmt_double(obj.mass_proxy));
  kv.set("pick_center", fmt_double(w.pick_center));
  kv.set("place_center", fmt_double(w.place_center));
  kv.set("region_halfwidth", fmt_double(w.region_halfwidth));
  kv.set("home_x", fmt_double(home_x));
  return kv.to_text();
}

sim::WorldState world_from_meta(const KvConfig& meta, TaskSpec* task_out) {
  TaskSpec task = TaskSpec::by_name(meta.get_string("task", "pick_place"));
  const LoopConfig lc = task.loop_config();
  sim::WorldState w = sim::make_world(lc.world, meta.get_int("seed", 0));
  w.pick_center = meta.get_double("pick_center", w.pick_center);
  w.place_center = meta.get_double("place_center", w.place_center);
  w.region_halfwidth = meta.get_double("region_halfwidth", w.region_halfwidth);

  sim::ContactObject obj;
  obj.center = meta.get_double("object_x", w.pick_center);
  obj.radius = meta.get_double("object_radius", task.object_radius);
  obj.stiffness = meta.get_double("object_stiffness", 200.0);
  obj.damping = meta.get_double("object_damping", task.object_damping);
  obj.mass_proxy = meta.get_double("object_mass", task.object_mass);
  obj.required_grasps = task.arms == 2 ? 2 : 1;
  w.objects.push_back(obj);

  const double home = meta.get_double("home_x", task.home_x);
  for (int a = 0; a < task.arms; ++a) {
    w.leader[lc.world.transport_index(a)].angle = home;
    w.follower[lc.world.transport_index(a)].angle = home;
  }
  if (task_out != nullptr) *task_out = task;
  return w;
}

}  // namespace bcil::harness
