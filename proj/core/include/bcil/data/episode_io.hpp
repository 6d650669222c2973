// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <string>
#include <vector>

#include "bcil/data/episode.hpp"

namespace bcil::data {

// "BIEP" episode file, little-endian, no padding:
//   magic "BIEP" | u16 version=1 | u16 n_joints | u32 robot_rate_hz |
//   u32 image_rate_hz | u16 img_w | u16 img_h | u8 n_cameras | u8 end_flag |
//   u64 n_samples | u64 n_frames | u32 meta_len | meta bytes |
//   samples (u64 t_us + 6*n_joints f64) | frames (u64 t_us + u8 cam_id +
//   img_w*img_h*3 bytes) | u32 CRC32 of all preceding bytes.
inline constexpr char kEpisodeMagic[4] = {'B', 'I', 'E', 'P'};
inline constexpr std::uint16_t kEpisodeVersion = 1;

std::vector<std::uint8_t> encode_episode(const Episode& ep);
Episode decode_episode(const std::vector<std::uint8_t>& bytes);

void write_episode(const Episode& ep, const std::string& path);
Episode read_episode(const std::string& path);

// Per-tick debug sidecar (motor commands and ground-truth external torques)
// written next to an episode as <path>.debug.csv; used by replay and the
// observer-fidelity checks. Doubles round-trip exactly via %.17g.
struct DebugTrace {
  std::uint16_t n_joints = 0;
  std::vector<std::uint64_t> t_us;
  std::vector<std::vector<double>> tau_cmd_l, tau_cmd_f;       // applied commands
  std::vector<std::vector<double>> tau_ext_true_l, tau_ext_true_f;  // plant truth

  void append(std::uint64_t t, const std::vector<double>& cl, const std::vector<double>& cf,
              const std::vector<double>& el, const std::vector<double>& ef);
};

std::string debug_sidecar_path(const std::string& episode_path);
void write_debug_trace(const DebugTrace& tr, const std::string& path);
DebugTrace read_debug_trace(const std::string& path);

}  // namespace bcil::data
