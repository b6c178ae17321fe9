#pragma once

#include "sparsepose/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sparsepose {

struct GrayImage {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> pixels;  // row-major

    GrayImage() = default;
    GrayImage(int h, int w, std::uint8_t fill = 0)
        : height(h), width(w), pixels(static_cast<std::size_t>(h) * w, fill) {}

    std::uint8_t at(int r, int c) const {
        return pixels[static_cast<std::size_t>(r) * width + c];
    }
    std::uint8_t& at(int r, int c) {
        return pixels[static_cast<std::size_t>(r) * width + c];
    }
    // Border-replicated sampling.
    std::uint8_t at_clamped(int r, int c) const {
        r = std::clamp(r, 0, height - 1);
        c = std::clamp(c, 0, width - 1);
        return at(r, c);
    }

    bool operator==(const GrayImage&) const = default;
};

struct GraySequence {
    std::vector<GrayImage> frames;
    int fps = 30;
};

void write_pgm(std::ostream& os, const GrayImage& img);
GrayImage read_pgm(std::istream& is);  // throws data_error

// Concatenated binary P5 images in a single file.
void write_pgm_stream(const std::string& path, const std::vector<GrayImage>& frames);
std::vector<GrayImage> read_pgm_stream(const std::string& path);

// Raw 8-bit frames with a text sidecar header at <path>.hdr containing
// "width=<w> height=<h> fps=<n> frames=<n>" tokens.
void write_raw_video(const std::string& path, const GraySequence& seq);
GraySequence read_raw_video(const std::string& path);

// Sniffs P5 vs raw-with-sidecar by magic bytes.
GraySequence load_gray_video(const std::string& path, int default_fps = 30);

}  // namespace sparsepose
