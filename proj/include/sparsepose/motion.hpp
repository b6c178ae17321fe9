#pragma once

#include "sparsepose/pgm_io.hpp"
#include "sparsepose/sparse_tensor.hpp"

namespace sparsepose {

// Block-matching motion estimator standing in for the sensor's MV channels.
// Displacement d (pixels/frame, rightward/downward positive) quantizes to
// clamp(round(d * scale), -128, 128), so +-8 px/frame saturates the range.
struct MotionConfig {
    int block_size = 8;
    int search_radius = 8;
    double mv_scale = 16.0;             // quantization units per pixel/frame
    double pixel_gradient_floor = 8.0;  // MV sites need at least this gradient
    // Within a moving block, values land only on pixels whose gradient is a
    // fraction of the block's strongest; adapts between crisp and smeared
    // content (keeps MV sparser than the edge channel on sharp frames while
    // motion on blurred frames still registers).
    double relative_floor = 0.6;
    int min_textured_pixels = 4;    // blocks with less texture are skipped
    double min_improvement = 2.0;   // mean SAD gain per pixel to accept motion
};

// Two-channel MV tensor (channel 0 = MV_X horizontal, 1 = MV_Y vertical)
// from two consecutive frames. Static content emits nothing.
SparseTensor2D<float> extract_motion(const GrayImage& prev, const GrayImage& cur,
                                     const MotionConfig& config = {});

}  // namespace sparsepose
