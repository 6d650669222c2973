// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bcil::data {

// One 1 kHz snapshot. Values are laid out joint-major, six per joint:
// [theta_l, dtheta_l, tau_l, theta_f, dtheta_f, tau_f]. The torque channel
// carries the RFOB estimate, matching the sensorless recording pipeline.
struct JointSample {
  std::uint64_t t_us = 0;
  std::vector<double> v;
};

struct Frame {
  std::uint64_t t_us = 0;
  std::uint8_t cam_id = 0;
  std::vector<std::uint8_t> pixels;  // img_w * img_h * 3, RGB8 row-major
};

struct EpisodeHeader {
  std::uint16_t n_joints = 2;
  std::uint32_t robot_rate_hz = 1000;
  std::uint32_t image_rate_hz = 100;
  std::uint16_t img_w = 32;
  std::uint16_t img_h = 32;
  std::uint8_t n_cameras = 2;
  std::uint8_t end_flag = 0;
  std::string meta;  // UTF-8 key=value lines
};

// Multirate container: 1 kHz joint sextuples plus ~100 Hz camera frames. The
// end flag stands in for the operator's foot pedal and is set exactly once
// at finalization.
class Episode {
 public:
  Episode() = default;
  explicit Episode(EpisodeHeader header) : header_(std::move(header)) {}

  // Requires strictly monotone timestamps advancing by exactly 1000 us and a
  // sample width of 6 * n_joints finite-or-not values (validation reports
  // non-finiteness; sequencing is enforced here).
  void append_sample(JointSample sample);
  void append_frame(Frame frame);

  void finalize();
  bool finalized() const { return finalized_; }

  const EpisodeHeader& header() const { return header_; }
  EpisodeHeader& mutable_header() { return header_; }
  const std::vector<JointSample>& samples() const { return samples_; }
  const std::vector<Frame>& frames() const { return frames_; }

  std::size_t sample_width() const { return 6u * header_.n_joints; }
  std::size_t frame_bytes() const {
    return static_cast<std::size_t>(header_.img_w) * header_.img_h * 3u;
  }

  // Frames of one camera, in append order (indices into frames()).
  std::vector<std::size_t> frames_of_camera(int cam_id) const;

 private:
  EpisodeHeader header_;
  std::vector<JointSample> samples_;
  std::vector<Frame> frames_;
  bool finalized_ = false;

  friend Episode episode_from_parts(EpisodeHeader, std::vector<JointSample>, std::vector<Frame>,
                                    bool);
};

// Used by the reader; bypasses append-time sequencing so that validation can
// report problems instead.
Episode episode_from_parts(EpisodeHeader h, std::vector<JointSample> samples,
                           std::vector<Frame> frames, bool finalized);

struct Violation {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  std::string message;
  std::int64_t index = -1;   // sample or frame index, -1 when not applicable
  std::string field;
};

struct ValidationReport {
  bool pass = true;  // true when no error-severity findings (warnings allowed)
  std::vector<Violation> findings;

  std::string summary() const;
};

// Checks monotone time, finiteness (naming the sample index and field),
// header/body agreement, and frame cadence. A broken cadence is a warning,
// not a failure: the nominal image rate is approximate by design.
ValidationReport validate_episode(const Episode& ep);

}  // namespace bcil::data
