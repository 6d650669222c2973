// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#include "bcil/nn/model_io.hpp"

#include <cstring>
#include <fstream>

#include "bcil/errors.hpp"

namespace bcil::nn {
namespace {

void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_f32(std::vector<std::uint8_t>& b, float v) {
  std::uint32_t bits = 0;
  std::memcpy(&bits, &v, 4);
  put_u32(b, bits);
}

struct Cursor {
  const std::vector<std::uint8_t>& b;
  std::size_t off = 0;

  void need(std::size_t n, const std::string& item) {
    if (b.size() - off < n) {
      throw FormatError("truncated model file: need " + std::to_string(n) + " bytes for " + item,
                        off);
    }
  }
  std::uint8_t u8(const std::string& item) {
    need(1, item);
    return b[off++];
  }
  std::uint16_t u16(const std::string& item) {
    need(2, item);
    std::uint16_t v = static_cast<std::uint16_t>(b[off]) | static_cast<std::uint16_t>(b[off + 1]) << 8;
    off += 2;
    return v;
  }
  std::uint32_t u32(const std::string& item) {
    need(4, item);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[off + i]) << (8 * i);
    off += 4;
    return v;
  }
  float f32(const std::string& item) {
    const std::uint32_t bits = u32(item);
    float v = 0;
    std::memcpy(&v, &bits, 4);
    return v;
  }
};

}  // namespace

std::vector<std::uint8_t> encode_model(const ModelBlob& m) {
  std::vector<std::uint8_t> b;
  b.insert(b.end(), kModelMagic, kModelMagic + 4);
  put_u16(b, kModelVersion);
  put_u32(b, static_cast<std::uint32_t>(m.config_text.size()));
  b.insert(b.end(), m.config_text.begin(), m.config_text.end());
  for (const auto& p : m.params) {
    put_u16(b, static_cast<std::uint16_t>(p.name.size()));
    b.insert(b.end(), p.name.begin(), p.name.end());
    b.push_back(static_cast<std::uint8_t>(p.dims.size()));
    std::size_t n = 1;
    for (int d : p.dims) {
      put_u32(b, static_cast<std::uint32_t>(d));
      n *= static_cast<std::size_t>(d);
    }
    if (n != p.values.size()) {
      throw StateError("model parameter " + p.name + ": dims do not match value count");
    }
    for (float v : p.values) put_f32(b, v);
  }
  return b;
}

ModelBlob decode_model(const std::vector<std::uint8_t>& bytes) {
  Cursor c{bytes};
  c.need(4, "magic");
  if (std::memcmp(bytes.data(), kModelMagic, 4) != 0) {
    throw FormatError("bad magic: not a BIWT model file", 0);
  }
  c.off = 4;
  const std::uint16_t version = c.u16("version");
  if (version != kModelVersion) {
    throw FormatError("unsupported model version " + std::to_string(version), 4);
  }
  ModelBlob m;
  const std::uint32_t cfg_len = c.u32("config length");
  c.need(cfg_len, "config echo");
  m.config_text.assign(bytes.begin() + c.off, bytes.begin() + c.off + cfg_len);
  c.off += cfg_len;

  while (c.off < bytes.size()) {
    ModelBlob::Param p;
    const std::uint16_t name_len = c.u16("parameter name length");
    c.need(name_len, "parameter name");
    p.name.assign(bytes.begin() + c.off, bytes.begin() + c.off + name_len);
    c.off += name_len;
    const std::uint8_t rank = c.u8("parameter rank");
    std::size_t n = 1;
    for (int i = 0; i < rank; ++i) {
      const std::uint32_t d = c.u32("parameter dim");
      if (d == 0 || d > (1u << 24)) throw FormatError("implausible dimension in " + p.name, c.off);
      p.dims.push_back(static_cast<int>(d));
      n *= d;
    }
    c.need(n * 4, "values of " + p.name);
    p.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) p.values[i] = c.f32("parameter value");
    m.params.push_back(std::move(p));
  }
  return m;
}

void write_model_file(const ModelBlob& m, const std::string& path) {
  const auto bytes = encode_model(m);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

ModelBlob read_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_model(bytes);
}

}  // namespace bcil::nn
