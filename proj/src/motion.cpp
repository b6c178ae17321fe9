#include "sparsepose/motion.hpp"

#include <algorithm>
#include <cmath>

namespace sparsepose {

namespace {

// Search offsets ordered by radius so ties resolve to the smallest motion
// (and (0,0) first of all).
std::vector<Coord> search_offsets(int radius) {
    std::vector<Coord> offsets;
    for (int dr = -radius; dr <= radius; ++dr)
        for (int dc = -radius; dc <= radius; ++dc) offsets.push_back({dr, dc});
    std::stable_sort(offsets.begin(), offsets.end(), [](const Coord& a, const Coord& b) {
        const int ra = a.row * a.row + a.col * a.col;
        const int rb = b.row * b.row + b.col * b.col;
        if (ra != rb) return ra < rb;
        return a < b;
    });
    return offsets;
}

}  // namespace

SparseTensor2D<float> extract_motion(const GrayImage& prev, const GrayImage& cur,
                                     const MotionConfig& config) {
    if (prev.height != cur.height || prev.width != cur.width)
        throw data_error("extract_motion: frame size mismatch");
    const int h = cur.height, w = cur.width, bs = config.block_size;

    // Central-difference gradient magnitude of the current frame; MV values
    // are only emitted on gradient-bearing pixels of moving blocks.
    std::vector<float> grad(static_cast<std::size_t>(h) * w, 0.0f);
    for (int r = 1; r < h - 1; ++r)
        for (int c = 1; c < w - 1; ++c) {
            const double dx = (cur.at(r, c + 1) - cur.at(r, c - 1)) / 2.0;
            const double dy = (cur.at(r + 1, c) - cur.at(r - 1, c)) / 2.0;
            grad[static_cast<std::size_t>(r) * w + c] =
                static_cast<float>(std::sqrt(dx * dx + dy * dy));
        }

    const auto offsets = search_offsets(config.search_radius);
    std::vector<Coord> sites;
    std::vector<std::pair<float, float>> values;

    for (int br = 0; br < h; br += bs) {
        for (int bc = 0; bc < w; bc += bs) {
            const int bh = std::min(bs, h - br), bw = std::min(bs, w - bc);
            int textured = 0;
            float block_max = 0.0f;
            for (int r = 0; r < bh; ++r)
                for (int c = 0; c < bw; ++c) {
                    const float gp = grad[static_cast<std::size_t>(br + r) * w + (bc + c)];
                    block_max = std::max(block_max, gp);
                    if (gp >= config.pixel_gradient_floor) ++textured;
                }
            if (textured < config.min_textured_pixels) continue;
            const float site_floor = std::max(
                static_cast<float>(config.pixel_gradient_floor),
                static_cast<float>(config.relative_floor) * block_max);

            auto sad_at = [&](Coord o) {
                long sum = 0;
                for (int r = 0; r < bh; ++r)
                    for (int c = 0; c < bw; ++c)
                        sum += std::abs(static_cast<int>(cur.at(br + r, bc + c)) -
                                        static_cast<int>(prev.at_clamped(
                                            br + r + o.row, bc + c + o.col)));
                return sum;
            };

            const long sad0 = sad_at({0, 0});
            Coord best{0, 0};
            long best_sad = sad0;
            for (const Coord& o : offsets) {
                if (o.row == 0 && o.col == 0) continue;
                const long s = sad_at(o);
                if (s < best_sad) {
                    best_sad = s;
                    best = o;
                }
            }
            if (best.row == 0 && best.col == 0) continue;
            const double gain = static_cast<double>(sad0 - best_sad) / (bh * bw);
            if (gain < config.min_improvement) continue;

            // Block content at cur matched prev at cur+o, so it moved by -o.
            const double d_col = -best.col, d_row = -best.row;
            const float mvx = static_cast<float>(std::clamp(
                std::nearbyint(d_col * config.mv_scale), -128.0, 128.0));
            const float mvy = static_cast<float>(std::clamp(
                std::nearbyint(d_row * config.mv_scale), -128.0, 128.0));
            if (mvx == 0.0f && mvy == 0.0f) continue;
            for (int r = 0; r < bh; ++r)
                for (int c = 0; c < bw; ++c)
                    if (grad[static_cast<std::size_t>(br + r) * w + (bc + c)] >= site_floor) {
                        sites.push_back({br + r, bc + c});
                        values.emplace_back(mvx, mvy);
                    }
        }
    }

    SparseTensor2D<float>::ValueMatrix m(static_cast<Eigen::Index>(values.size()), 2);
    for (std::size_t i = 0; i < values.size(); ++i) {
        m(static_cast<Eigen::Index>(i), 0) = values[i].first;
        m(static_cast<Eigen::Index>(i), 1) = values[i].second;
    }
    return SparseTensor2D<float>::from_sites(h, w, 2, std::move(sites), std::move(m));
}

}  // namespace sparsepose
