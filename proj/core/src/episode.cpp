// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include "bcil/data/episode.hpp"

#include <cmath>

#include "bcil/errors.hpp"

namespace bcil::data {

namespace {
const char* kFieldNames[6] = {"theta_l", "dtheta_l", "tau_l", "theta_f", "dtheta_f", "tau_f"};
}

void Episode::append_sample(JointSample sample) {
  if (finalized_) throw StateError("append_sample: episode already finalized");
  if (sample.v.size() != sample_width()) {
    throw ConfigError("append_sample: expected " + std::to_string(sample_width()) +
                      " values, got " + std::to_string(sample.v.size()));
  }
  if (!samples_.empty()) {
    const std::uint64_t expected = samples_.back().t_us + 1000;
    if (sample.t_us <= samples_.back().t_us) {
      throw SequenceError("append_sample: timestamp " + std::to_string(sample.t_us) +
                          " not after previous " + std::to_string(samples_.back().t_us));
    }
    if (sample.t_us != expected) {
      throw SequenceError("append_sample: timestamp " + std::to_string(sample.t_us) +
                          " breaks the 1 kHz cadence (expected " + std::to_string(expected) + ")");
    }
  }
  samples_.push_back(std::move(sample));
}

void Episode::append_frame(Frame frame) {
  if (finalized_) throw StateError("append_frame: episode already finalized");
  if (frame.cam_id >= header_.n_cameras) {
    throw ConfigError("append_frame: cam_id " + std::to_string(frame.cam_id) +
                      " out of range (n_cameras=" + std::to_string(header_.n_cameras) + ")");
  }
  if (frame.pixels.size() != frame_bytes()) {
    throw ConfigError("append_frame: expected " + std::to_string(frame_bytes()) +
                      " pixel bytes, got " + std::to_string(frame.pixels.size()));
  }
  for (auto it = frames_.rbegin(); it != frames_.rend(); ++it) {
    if (it->cam_id == frame.cam_id) {
      if (frame.t_us <= it->t_us) {
        throw SequenceError("append_frame: timestamp " + std::to_string(frame.t_us) +
                            " not after previous frame of camera " +
                            std::to_string(frame.cam_id));
      }
      break;
    }
  }
  frames_.push_back(std::move(frame));
}

void Episode::finalize() {
  if (finalized_) throw StateError("finalize: episode already finalized");
  finalized_ = true;
  header_.end_flag = 1;
}

std::vector<std::size_t> Episode::frames_of_camera(int cam_id) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    if (frames_[i].cam_id == cam_id) out.push_back(i);
  }
  return out;
}

Episode episode_from_parts(EpisodeHeader h, std::vector<JointSample> samples,
                           std::vector<Frame> frames, bool finalized) {
  Episode ep(std::move(h));
  ep.samples_ = std::move(samples);
  ep.frames_ = std::move(frames);
  ep.finalized_ = finalized;
  return ep;
}

std::string ValidationReport::summary() const {
  std::string s = pass ? "pass" : "fail";
  for (const auto& f : findings) {
    s += "\n  ";
    s += (f.severity == Violation::Severity::error ? "[error] " : "[warn]  ");
    s += f.message;
  }
  return s;
}

ValidationReport validate_episode(const Episode& ep) {
  ValidationReport rep;
  auto error = [&](std::string msg, std::int64_t idx, std::string field) {
    rep.findings.push_back({Violation::Severity::error, std::move(msg), idx, std::move(field)});
    rep.pass = false;
  };
  auto warn = [&](std::string msg, std::int64_t idx) {
    rep.findings.push_back({Violation::Severity::warning, std::move(msg), idx, ""});
  };

  const auto& h = ep.header();
  const auto& samples = ep.samples();
  const std::size_t width = ep.sample_width();

  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.v.size() != width) {
      error("sample " + std::to_string(i) + ": width " + std::to_string(s.v.size()) +
                " != " + std::to_string(width),
            static_cast<std::int64_t>(i), "width");
      continue;
    }
    if (i > 0 && s.t_us != samples[i - 1].t_us + 1000) {
      error("sample " + std::to_string(i) + ": timestamp " + std::to_string(s.t_us) +
                " does not advance by 1000 us",
            static_cast<std::int64_t>(i), "t_us");
    }
    for (std::size_t k = 0; k < s.v.size(); ++k) {
      if (!std::isfinite(s.v[k])) {
        const std::string field =
            std::string(kFieldNames[k % 6]) + "[" + std::to_string(k / 6) + "]";
        error("sample " + std::to_string(i) + ": non-finite value in " + field,
              static_cast<std::int64_t>(i), field);
      }
    }
  }

  if (!samples.empty()) {
    const std::uint64_t t0 = samples.front().t_us;
    const std::uint64_t t1 = samples.back().t_us;
    for (std::size_t i = 0; i < ep.frames().size(); ++i) {
      const auto& f = ep.frames()[i];
      if (f.t_us < t0 || f.t_us > t1) {
        error("frame " + std::to_string(i) + ": timestamp outside episode span",
              static_cast<std::int64_t>(i), "t_us");
      }
    }
  }

  for (int cam = 0; cam < h.n_cameras; ++cam) {
    const auto idx = ep.frames_of_camera(cam);
    const std::uint64_t step = 1000000ull / h.image_rate_hz;
    for (std::size_t i = 1; i < idx.size(); ++i) {
      const std::uint64_t dt = ep.frames()[idx[i]].t_us - ep.frames()[idx[i - 1]].t_us;
      if (dt != step) {
        warn("camera " + std::to_string(cam) + ": frame cadence " + std::to_string(dt) +
                 " us at frame " + std::to_string(idx[i]) + " (nominal " + std::to_string(step) +
                 ")",
             static_cast<std::int64_t>(idx[i]));
      }
    }
  }

  if (ep.finalized() && h.end_flag != 1) {
    error("finalized episode without end flag", -1, "end_flag");
  }
  return rep;
}

}  // namespace bcil::data
