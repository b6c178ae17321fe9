#pragma once

#include "sparsepose/pgm_io.hpp"
#include "sparsepose/sparse_tensor.hpp"

namespace sparsepose {

// Canny-style detector standing in for the sensor's hardware edge channel.
// Thresholds apply to the quantized gradient magnitude (Sobel L2 norm / 4,
// so a clean step of height h reads about h).
struct EdgeDetectConfig {
    double low_threshold = 40;
    double high_threshold = 100;
    bool presmooth = true;  // 5x5 Gaussian, sigma 1
};

// Gradient-magnitude edges with non-maximum suppression and hysteresis.
// Surviving pixels carry their magnitude quantized to [0, 255]; everything
// else is inactive.
SparseTensor2D<float> extract_edge(const GrayImage& gray,
                                   const EdgeDetectConfig& config = {});

}  // namespace sparsepose
