#include "sparsepose/edge_detect.hpp"

#include <cmath>
#include <deque>

namespace sparsepose {

namespace {

std::vector<double> gaussian5(const GrayImage& img) {
    // Separable 5-tap Gaussian, sigma 1.
    static const double k[5] = {0.054488684549642945, 0.24420134200323332,
                                0.4026199468928434, 0.24420134200323332,
                                0.054488684549642945};
    const int h = img.height, w = img.width;
    std::vector<double> tmp(static_cast<std::size_t>(h) * w);
    std::vector<double> out(static_cast<std::size_t>(h) * w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            double acc = 0;
            for (int d = -2; d <= 2; ++d) acc += k[d + 2] * img.at_clamped(r, c + d);
            tmp[static_cast<std::size_t>(r) * w + c] = acc;
        }
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            double acc = 0;
            for (int d = -2; d <= 2; ++d) {
                const int rr = std::clamp(r + d, 0, h - 1);
                acc += k[d + 2] * tmp[static_cast<std::size_t>(rr) * w + c];
            }
            out[static_cast<std::size_t>(r) * w + c] = acc;
        }
    return out;
}

}  // namespace

SparseTensor2D<float> extract_edge(const GrayImage& gray, const EdgeDetectConfig& config) {
    const int h = gray.height, w = gray.width;
    std::vector<double> img;
    if (config.presmooth) {
        img = gaussian5(gray);
    } else {
        img.resize(static_cast<std::size_t>(h) * w);
        for (std::size_t i = 0; i < img.size(); ++i) img[i] = gray.pixels[i];
    }
    auto px = [&](int r, int c) { return img[static_cast<std::size_t>(r) * w + c]; };

    // Sobel gradients; border pixels carry no gradient.
    std::vector<double> gx(static_cast<std::size_t>(h) * w, 0);
    std::vector<double> gy(static_cast<std::size_t>(h) * w, 0);
    std::vector<double> mag(static_cast<std::size_t>(h) * w, 0);
    for (int r = 1; r < h - 1; ++r)
        for (int c = 1; c < w - 1; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * w + c;
            gx[i] = (px(r - 1, c + 1) + 2 * px(r, c + 1) + px(r + 1, c + 1)) -
                    (px(r - 1, c - 1) + 2 * px(r, c - 1) + px(r + 1, c - 1));
            gy[i] = (px(r + 1, c - 1) + 2 * px(r + 1, c) + px(r + 1, c + 1)) -
                    (px(r - 1, c - 1) + 2 * px(r - 1, c) + px(r - 1, c + 1));
            mag[i] = std::sqrt(gx[i] * gx[i] + gy[i] * gy[i]) / 4.0;
        }

    // Non-maximum suppression along the quantized gradient direction; ties
    // kept so clean steps leave a band of width <= 2.
    std::vector<std::uint8_t> keep(static_cast<std::size_t>(h) * w, 0);
    for (int r = 1; r < h - 1; ++r)
        for (int c = 1; c < w - 1; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * w + c;
            if (mag[i] < config.low_threshold) continue;
            const double ax = std::abs(gx[i]), ay = std::abs(gy[i]);
            double m1, m2;
            if (ax >= 2.0 * ay) {  // ~horizontal gradient
                m1 = mag[i - 1];
                m2 = mag[i + 1];
            } else if (ay >= 2.0 * ax) {  // ~vertical
                m1 = mag[i - w];
                m2 = mag[i + w];
            } else if ((gx[i] > 0) == (gy[i] > 0)) {  // diagonal "\"
                m1 = mag[i - w - 1];
                m2 = mag[i + w + 1];
            } else {  // diagonal "/"
                m1 = mag[i - w + 1];
                m2 = mag[i + w - 1];
            }
            if (mag[i] >= m1 && mag[i] >= m2) keep[i] = 1;
        }

    // Hysteresis: strong pixels seed 8-connected chains through weak ones.
    std::vector<std::uint8_t> state(static_cast<std::size_t>(h) * w, 0);  // 2 = edge
    std::deque<std::size_t> stack;
    for (int r = 1; r < h - 1; ++r)
        for (int c = 1; c < w - 1; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * w + c;
            if (keep[i] && mag[i] >= config.high_threshold) {
                state[i] = 2;
                stack.push_back(i);
            }
        }
    while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        const int r = static_cast<int>(i) / w, c = static_cast<int>(i) % w;
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
                const int rr = r + dr, cc = c + dc;
                if (rr < 1 || rr >= h - 1 || cc < 1 || cc >= w - 1) continue;
                const std::size_t n = static_cast<std::size_t>(rr) * w + cc;
                if (state[n] == 0 && keep[n] && mag[n] >= config.low_threshold) {
                    state[n] = 2;
                    stack.push_back(n);
                }
            }
    }

    std::vector<Coord> sites;
    std::vector<float> vals;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * w + c;
            if (state[i] != 2) continue;
            sites.push_back({r, c});
            vals.push_back(static_cast<float>(
                std::min(255.0, std::max(1.0, std::nearbyint(mag[i])))));
        }
    SparseTensor2D<float>::ValueMatrix values(static_cast<Eigen::Index>(vals.size()), 1);
    for (std::size_t i = 0; i < vals.size(); ++i)
        values(static_cast<Eigen::Index>(i), 0) = vals[i];
    return SparseTensor2D<float>::from_sites(h, w, 1, std::move(sites), std::move(values));
}

}  // namespace sparsepose
