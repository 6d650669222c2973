// Copyright (c) 2026 the bcil authors.
// Use of this source code is governed by the Apache-2.0 license, see LICENSE.
#pragma once

#include <cstddef>
#include <cstdint>

namespace bcil {

// CRC-32 (IEEE 802.3 polynomial, reflected), as used by zip/png.
std::uint32_t crc32(const void* data, std::size_t len, std::uint32_t seed = 0);

}  // namespace bcil
