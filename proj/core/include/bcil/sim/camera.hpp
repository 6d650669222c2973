// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <cstdint>
#include <vector>

#include "bcil/sim/types.hpp"

namespace bcil::sim {

struct Image {
  std::uint16_t w = 0, h = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  std::size_t bytes() const { return rgb.size(); }
};

// Deterministic rasterization of the workspace. Camera 2a is the overhead
// view of arm a, camera 2a+1 the close-up of its gripper. Object color is
// fixed regardless of stiffness, so hardness is invisible to vision.
Image render_camera(const WorldState& w, const WorldConfig& cfg, int cam_id);

// Pixel column the overhead view assigns to a transport coordinate; exposed
// so tests can predict where a moved object lands.
int overhead_column(const WorldConfig& cfg, double x);

}  // namespace bcil::sim
