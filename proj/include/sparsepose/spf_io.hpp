#pragma once

#include "sparsepose/sparse_frame.hpp"

#include <string>
#include <vector>

namespace sparsepose {

// SPF container, the canonical on-disk form of a sensor clip.
//
//   magic   "SPF1"
//   header  u16 width, u16 height, u16 fps, u32 frame_count, u8 channel mask
//           (bit0 edge, bit1 mv_x, bit2 mv_y; always 0b111)
//   frames  u32 active-site count, then per site (canonical row-major order)
//           u16 row, u16 col, u8 edge, u8 mv_x, u8 mv_y
//   tail    u32 CRC-32 of every preceding byte
//
// All integers little-endian. MV bytes are offset-binary (value + 128); the
// in-memory +128 is unrepresentable in 8 bits and clamps to +127 on write.
// Every record must carry a nonzero channel, so write->read->write is
// byte-identical and any single corrupted byte fails validation or the CRC.

void write_spf(const std::string& path, const std::vector<SparseFrame>& frames, int fps);
std::vector<std::uint8_t> encode_spf(const std::vector<SparseFrame>& frames, int fps);

struct SpfContents {
    std::vector<SparseFrame> frames;
    int fps = 0;
    int width = 0;
    int height = 0;
};

SpfContents read_spf(const std::string& path);                    // throws data_error
SpfContents decode_spf(const std::vector<std::uint8_t>& bytes);   // throws data_error

}  // namespace sparsepose
