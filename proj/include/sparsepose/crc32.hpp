#pragma once

#include <cstddef>
#include <cstdint>

namespace sparsepose {

// CRC-32 (IEEE 802.3, reflected polynomial 0xEDB88320).
std::uint32_t crc32(const void* data, std::size_t size, std::uint32_t seed = 0);

}  // namespace sparsepose
