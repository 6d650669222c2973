// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include "bcil/data/episode_io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "bcil/crc32.hpp"
#include "bcil/errors.hpp"

namespace bcil::data {
namespace {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) {
    buf_.push_back(static_cast<std::uint8_t>(v));
    buf_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& b, const char* what) : buf_(b), what_(what) {}

  std::size_t offset() const { return off_; }
  std::size_t remaining() const { return buf_.size() - off_; }

  void need(std::size_t n, const std::string& item) {
    if (remaining() < n) {
      throw FormatError("truncated " + std::string(what_) + ": need " + std::to_string(n) +
                            " bytes for " + item + ", file has " + std::to_string(remaining()) +
                            " left",
                        off_);
    }
  }
  std::uint8_t u8(const std::string& item) {
    need(1, item);
    return buf_[off_++];
  }
  std::uint16_t u16(const std::string& item) {
    need(2, item);
    std::uint16_t v = static_cast<std::uint16_t>(buf_[off_]) |
                      static_cast<std::uint16_t>(buf_[off_ + 1]) << 8;
    off_ += 2;
    return v;
  }
  std::uint32_t u32(const std::string& item) {
    need(4, item);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf_[off_ + i]) << (8 * i);
    off_ += 4;
    return v;
  }
  std::uint64_t u64(const std::string& item) {
    need(8, item);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf_[off_ + i]) << (8 * i);
    off_ += 8;
    return v;
  }
  double f64(const std::string& item) {
    const std::uint64_t bits = u64(item);
    double v = 0;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::vector<std::uint8_t> bytes(std::size_t n, const std::string& item) {
    need(n, item);
    std::vector<std::uint8_t> out(buf_.begin() + off_, buf_.begin() + off_ + n);
    off_ += n;
    return out;
  }

 private:
  const std::vector<std::uint8_t>& buf_;
  std::size_t off_ = 0;
  const char* what_;
};

}  // namespace

std::vector<std::uint8_t> encode_episode(const Episode& ep) {
  if (!ep.finalized()) throw StateError("write_episode: episode not finalized");
  const auto& h = ep.header();
  ByteWriter w;
  w.raw(kEpisodeMagic, 4);
  w.u16(kEpisodeVersion);
  w.u16(h.n_joints);
  w.u32(h.robot_rate_hz);
  w.u32(h.image_rate_hz);
  w.u16(h.img_w);
  w.u16(h.img_h);
  w.u8(h.n_cameras);
  w.u8(h.end_flag);
  w.u64(ep.samples().size());
  w.u64(ep.frames().size());
  w.u32(static_cast<std::uint32_t>(h.meta.size()));
  w.raw(h.meta.data(), h.meta.size());
  for (const auto& s : ep.samples()) {
    w.u64(s.t_us);
    for (double v : s.v) w.f64(v);
  }
  for (const auto& f : ep.frames()) {
    w.u64(f.t_us);
    w.u8(f.cam_id);
    w.raw(f.pixels.data(), f.pixels.size());
  }
  auto body = w.take();
  const std::uint32_t crc = crc32(body.data(), body.size());
  ByteWriter tail;
  tail.u32(crc);
  auto t = tail.take();
  body.insert(body.end(), t.begin(), t.end());
  return body;
}

Episode decode_episode(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes, "episode file");
  r.need(4, "magic");
  if (std::memcmp(bytes.data(), kEpisodeMagic, 4) != 0) {
    throw FormatError("bad magic: not a BIEP episode file", 0);
  }
  (void)r.bytes(4, "magic");
  const std::uint16_t version = r.u16("version");
  if (version != kEpisodeVersion) {
    throw FormatError("unsupported episode version " + std::to_string(version), 4);
  }
  EpisodeHeader h;
  h.n_joints = r.u16("n_joints");
  h.robot_rate_hz = r.u32("robot_rate_hz");
  h.image_rate_hz = r.u32("image_rate_hz");
  h.img_w = r.u16("img_w");
  h.img_h = r.u16("img_h");
  h.n_cameras = r.u8("n_cameras");
  h.end_flag = r.u8("end_flag");
  if (h.n_joints == 0) throw FormatError("header declares zero joints", r.offset());
  if (h.robot_rate_hz == 0 || h.image_rate_hz == 0) {
    throw FormatError("header declares zero rate", r.offset());
  }
  const std::uint64_t n_samples = r.u64("n_samples");
  const std::uint64_t n_frames = r.u64("n_frames");
  const std::uint32_t meta_len = r.u32("meta_len");
  const auto meta = r.bytes(meta_len, "meta");
  h.meta.assign(meta.begin(), meta.end());

  const std::size_t width = 6u * h.n_joints;
  std::vector<JointSample> samples;
  samples.reserve(n_samples);
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    JointSample s;
    s.t_us = r.u64("sample " + std::to_string(i) + " timestamp");
    s.v.resize(width);
    r.need(width * 8, "sample " + std::to_string(i) + " values");
    for (std::size_t k = 0; k < width; ++k) s.v[k] = r.f64("sample value");
    samples.push_back(std::move(s));
  }
  const std::size_t frame_bytes = static_cast<std::size_t>(h.img_w) * h.img_h * 3u;
  std::vector<Frame> frames;
  frames.reserve(n_frames);
  for (std::uint64_t i = 0; i < n_frames; ++i) {
    Frame f;
    f.t_us = r.u64("frame " + std::to_string(i) + " timestamp");
    f.cam_id = r.u8("frame " + std::to_string(i) + " cam_id");
    f.pixels = r.bytes(frame_bytes, "frame " + std::to_string(i) + " pixels");
    frames.push_back(std::move(f));
  }
  const std::size_t crc_offset = r.offset();
  const std::uint32_t stored = r.u32("checksum");
  if (r.remaining() != 0) {
    throw FormatError("trailing bytes after checksum", r.offset());
  }
  const std::uint32_t computed = crc32(bytes.data(), crc_offset);
  if (stored != computed) {
    throw CorruptionError("episode checksum mismatch: stored " + std::to_string(stored) +
                          ", computed " + std::to_string(computed));
  }
  return episode_from_parts(std::move(h), std::move(samples), std::move(frames),
                            /*finalized=*/true);
}

void write_episode(const Episode& ep, const std::string& path) {
  const auto bytes = encode_episode(ep);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

Episode read_episode(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_episode(bytes);
}

void DebugTrace::append(std::uint64_t t, const std::vector<double>& cl,
                        const std::vector<double>& cf, const std::vector<double>& el,
                        const std::vector<double>& ef) {
  t_us.push_back(t);
  tau_cmd_l.push_back(cl);
  tau_cmd_f.push_back(cf);
  tau_ext_true_l.push_back(el);
  tau_ext_true_f.push_back(ef);
}

std::string debug_sidecar_path(const std::string& episode_path) {
  return episode_path + ".debug.csv";
}

void write_debug_trace(const DebugTrace& tr, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "# bcil-debug-trace v1 n_joints=" << tr.n_joints << "\n";
  out << "t_us";
  for (int j = 0; j < tr.n_joints; ++j) {
    out << ",tau_cmd_l" << j << ",tau_cmd_f" << j << ",tau_ext_true_l" << j << ",tau_ext_true_f"
        << j;
  }
  out << "\n";
  char num[64];
  for (std::size_t i = 0; i < tr.t_us.size(); ++i) {
    out << tr.t_us[i];
    for (int j = 0; j < tr.n_joints; ++j) {
      for (double v : {tr.tau_cmd_l[i][j], tr.tau_cmd_f[i][j], tr.tau_ext_true_l[i][j],
                       tr.tau_ext_true_f[i][j]}) {
        std::snprintf(num, sizeof(num), ",%.17g", v);
        out << num;
      }
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

DebugTrace read_debug_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# bcil-debug-trace v1", 0) != 0) {
    throw FormatError("not a bcil debug trace: " + path, 0);
  }
  DebugTrace tr;
  const auto pos = line.find("n_joints=");
  if (pos == std::string::npos) throw FormatError("debug trace missing n_joints", 0);
  tr.n_joints = static_cast<std::uint16_t>(std::stoi(line.substr(pos + 9)));
  std::getline(in, line);  // column header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    const std::uint64_t t = std::stoull(cell);
    std::vector<double> cl(tr.n_joints), cf(tr.n_joints), el(tr.n_joints), ef(tr.n_joints);
    for (int j = 0; j < tr.n_joints; ++j) {
      for (double* dst : {&cl[j], &cf[j], &el[j], &ef[j]}) {
        if (!std::getline(ss, cell, ',')) {
          throw FormatError("debug trace row too short", static_cast<std::uint64_t>(tr.t_us.size()));
        }
        *dst = std::strtod(cell.c_str(), nullptr);
      }
    }
    tr.append(t, cl, cf, el, ef);
  }
  return tr;
}

}  // namespace bcil::data
