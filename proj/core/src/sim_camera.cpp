// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include "bcil/sim/camera.hpp"

#include <algorithm>
#include <cmath>

#include "bcil/errors.hpp"

namespace bcil::sim {
namespace {

struct Canvas {
  Image img;

  Canvas(std::uint16_t w, std::uint16_t h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    img.w = w;
    img.h = h;
    img.rgb.assign(static_cast<std::size_t>(w) * h * 3, 0);
    for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
      img.rgb[i] = r;
      img.rgb[i + 1] = g;
      img.rgb[i + 2] = b;
    }
  }

  void put(int col, int row, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    if (col < 0 || row < 0 || col >= img.w || row >= img.h) return;
    const std::size_t i = (static_cast<std::size_t>(row) * img.w + col) * 3;
    img.rgb[i] = r;
    img.rgb[i + 1] = g;
    img.rgb[i + 2] = b;
  }

  void disc(int cc, int cr, int radius, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    for (int dr = -radius; dr <= radius; ++dr) {
      for (int dc = -radius; dc <= radius; ++dc) {
        if (dr * dr + dc * dc <= radius * radius) put(cc + dc, cr + dr, r, g, b);
      }
    }
  }

  void vbar(int col, int row0, int row1, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    for (int row = row0; row <= row1; ++row) put(col, row, r, g, b);
  }

  void hband(int col0, int col1, int row0, int row1, std::uint8_t r, std::uint8_t g,
             std::uint8_t b) {
    for (int row = row0; row <= row1; ++row) {
      for (int col = col0; col <= col1; ++col) put(col, row, r, g, b);
    }
  }
};

constexpr double kViewMin = -1.6;
constexpr double kViewMax = 1.6;

}  // namespace

int overhead_column(const WorldConfig& cfg, double x) {
  const double scale = (cfg.img_w - 1) / (kViewMax - kViewMin);
  const long long c = std::llround((x - kViewMin) * scale);
  return static_cast<int>(std::clamp<long long>(c, -1000, 1000));
}

Image render_camera(const WorldState& w, const WorldConfig& cfg, int cam_id) {
  if (cam_id < 0 || cam_id >= cfg.n_cameras()) {
    throw ConfigError("render_camera: invalid cam_id " + std::to_string(cam_id));
  }
  const int arm = cam_id / cfg.cameras_per_arm;
  const bool overhead = (cam_id % cfg.cameras_per_arm) == 0;
  const int W = cfg.img_w, H = cfg.img_h;
  const bool has_arm = static_cast<int>(w.follower.size()) >= (arm + 1) * cfg.joints_per_arm;

  if (overhead) {
    Canvas c(cfg.img_w, cfg.img_h, 40, 40, 40);
    // Task regions along the bottom rows.
    const int half = std::max(1, static_cast<int>(std::llround(
                                     w.region_halfwidth * (W - 1) / (kViewMax - kViewMin))));
    const int pc = overhead_column(cfg, w.pick_center);
    const int qc = overhead_column(cfg, w.place_center);
    c.hband(pc - half, pc + half, H - 6, H - 3, 0, 60, 160);
    c.hband(qc - half, qc + half, H - 6, H - 3, 0, 140, 0);
    // Objects: fixed color, stiffness invisible.
    for (const auto& obj : w.objects) {
      c.disc(overhead_column(cfg, obj.center), H / 2, 3, 210, 70, 70);
    }
    // Follower gripper: two jaws left/right of the transport position.
    if (has_arm) {
      const double x = w.follower[cfg.transport_index(arm)].angle;
      const double gap = jaw_gap(cfg, w.follower[cfg.grip_index(arm)].angle);
      const int sep = 1 + static_cast<int>(std::llround(gap / cfg.grip.angle_max * 6.0));
      const int gc = overhead_column(cfg, x);
      c.vbar(gc - sep, H / 2 - 8, H / 2 - 2, 230, 230, 230);
      c.vbar(gc + sep, H / 2 - 8, H / 2 - 2, 230, 230, 230);
    }
    return c.img;
  }

  // Gripper close-up, centered on the arm's transport position.
  Canvas c(cfg.img_w, cfg.img_h, 25, 25, 25);
  if (has_arm) {
    const double x = w.follower[cfg.transport_index(arm)].angle;
    const double zoom = (W - 1) / 0.8;  // +-0.4 task units visible
    for (const auto& obj : w.objects) {
      const int col = W / 2 + static_cast<int>(std::llround((obj.center - x) * zoom));
      c.disc(col, H / 2, 5, 210, 70, 70);
    }
    const double gap = jaw_gap(cfg, w.follower[cfg.grip_index(arm)].angle);
    const int sep = 2 + static_cast<int>(std::llround(gap / cfg.grip.angle_max * 10.0));
    c.vbar(W / 2 - sep, 4, H - 5, 230, 230, 230);
    c.vbar(W / 2 + sep, 4, H - 5, 230, 230, 230);
  }
  return c.img;
}

}  // namespace bcil::sim
