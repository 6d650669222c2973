// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bcil::nn {

// "BIWT" model file, little-endian:
//   magic "BIWT" | u16 version=1 | u32 config_len | config echo (UTF-8
//   key=value lines) | per parameter: u16 name_len | name | u8 rank |
//   rank x u32 dims | f32 values. Parameters appear in registration order.
inline constexpr char kModelMagic[4] = {'B', 'I', 'W', 'T'};
inline constexpr std::uint16_t kModelVersion = 1;

struct ModelBlob {
  struct Param {
    std::string name;
    std::vector<int> dims;
    std::vector<float> values;
  };
  std::string config_text;
  std::vector<Param> params;
};

std::vector<std::uint8_t> encode_model(const ModelBlob& m);
ModelBlob decode_model(const std::vector<std::uint8_t>& bytes);

void write_model_file(const ModelBlob& m, const std::string& path);
ModelBlob read_model_file(const std::string& path);

}  // namespace bcil::nn
