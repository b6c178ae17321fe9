#pragma once

#include "sparsepose/sparse_tensor.hpp"
#include "sparsepose/pose.hpp"

#include <cmath>

namespace sparsepose {

inline constexpr int kNativeHeight = 480;
inline constexpr int kNativeWidth = 640;
inline constexpr int kModelHeight = 288;
inline constexpr int kModelWidth = 384;
inline constexpr int kFramesPerSecond = 30;

enum class Modality { Edge, Mv, Fusion };

const char* modality_name(Modality m);
Modality parse_modality(const std::string& name);  // throws config_error
int modality_channels(Modality m);                 // edge 1, mv 2, fusion 3

// One sensor time frame: an 8-bit edge channel plus two signed motion-vector
// channels, all integer-valued within the sensor ranges.
struct SparseFrame {
    int timestamp = 0;
    SparseTensor2D<float> edge;  // 1 channel, values in [0, 255]
    SparseTensor2D<float> mv;    // 2 channels (MV_X, MV_Y), values in [-128, 128]
};

// Validates channel counts, matching resolutions and integer value ranges.
SparseFrame make_sparse_frame(int timestamp, SparseTensor2D<float> edge,
                              SparseTensor2D<float> mv);

// Early fusion: active set is the union of the edge and MV active sets, with
// missing channels zero-filled. Channel order: edge, MV_X, MV_Y.
template <typename Scalar>
SparseTensor2D<Scalar> assemble_fusion_input(const SparseTensor2D<Scalar>& edge,
                                             const SparseTensor2D<Scalar>& mv) {
    if (edge.channels() != 1 || mv.channels() != 2)
        throw std::invalid_argument("assemble_fusion_input: expected 1+2 channels");
    if (edge.height() != mv.height() || edge.width() != mv.width())
        throw std::invalid_argument("assemble_fusion_input: spatial shape mismatch");
    std::vector<Coord> sites = edge.sites();
    for (const Coord& s : mv.sites())
        if (!edge.active(s)) sites.push_back(s);
    typename SparseTensor2D<Scalar>::ValueMatrix values =
        SparseTensor2D<Scalar>::ValueMatrix::Zero(static_cast<Eigen::Index>(sites.size()), 3);
    for (std::size_t i = 0; i < sites.size(); ++i) {
        if (auto e = edge.find(sites[i]); e >= 0) values(static_cast<Eigen::Index>(i), 0) = edge.values()(e, 0);
        if (auto m = mv.find(sites[i]); m >= 0) values.block(static_cast<Eigen::Index>(i), 1, 1, 2) = mv.values().row(m);
    }
    return SparseTensor2D<Scalar>::from_sites(edge.height(), edge.width(), 3,
                                              std::move(sites), std::move(values));
}

// Nearest-pixel downscale of a sparse tensor. When several source sites land
// on one target pixel, each channel keeps the value of largest magnitude
// (first in canonical order on ties).
template <typename Scalar>
SparseTensor2D<Scalar> resample_nearest(const SparseTensor2D<Scalar>& t, int out_h,
                                        int out_w) {
    if (out_h <= 0 || out_w <= 0 || out_h > t.height() || out_w > t.width())
        throw std::invalid_argument("resample_nearest: expected a downscale");
    std::vector<Coord> sites;
    std::vector<Eigen::Index> first;  // target ordinal per packed coordinate
    std::unordered_map<std::int64_t, Eigen::Index> seen;
    std::vector<std::array<Scalar, 8>> acc;  // up to 8 channels
    if (t.channels() > 8)
        throw std::invalid_argument("resample_nearest: too many channels");
    for (Eigen::Index i = 0; i < t.site_count(); ++i) {
        const Coord s = t.sites()[static_cast<std::size_t>(i)];
        const Coord d{static_cast<std::int32_t>((static_cast<std::int64_t>(s.row) * out_h) / t.height()),
                      static_cast<std::int32_t>((static_cast<std::int64_t>(s.col) * out_w) / t.width())};
        const std::int64_t key = static_cast<std::int64_t>(d.row) * out_w + d.col;
        auto [it, inserted] = seen.emplace(key, static_cast<Eigen::Index>(sites.size()));
        if (inserted) {
            sites.push_back(d);
            acc.push_back({});
            for (int c = 0; c < t.channels(); ++c) acc.back()[static_cast<std::size_t>(c)] = t.values()(i, c);
        } else {
            auto& a = acc[static_cast<std::size_t>(it->second)];
            for (int c = 0; c < t.channels(); ++c)
                if (std::abs(t.values()(i, c)) > std::abs(a[static_cast<std::size_t>(c)]))
                    a[static_cast<std::size_t>(c)] = t.values()(i, c);
        }
    }
    typename SparseTensor2D<Scalar>::ValueMatrix values(
        static_cast<Eigen::Index>(sites.size()), t.channels());
    for (std::size_t i = 0; i < sites.size(); ++i)
        for (int c = 0; c < t.channels(); ++c)
            values(static_cast<Eigen::Index>(i), c) = acc[i][static_cast<std::size_t>(c)];
    return SparseTensor2D<Scalar>::from_sites(out_h, out_w, t.channels(),
                                              std::move(sites), std::move(values));
}

SparseFrame resample_frame(const SparseFrame& f, int out_h, int out_w);

// Model input for one frame: resampled to the model resolution, channels
// scaled to O(1) (edge /255, MV /128).
SparseTensor2D<float> modality_input(const SparseFrame& frame, Modality m,
                                     int out_h = kModelHeight, int out_w = kModelWidth);

// A recorded clip: frames plus ground-truth annotations (one per frame).
struct Clip {
    std::vector<SparseFrame> frames;
    std::vector<PoseAnnotation> annotations;
    int fps = kFramesPerSecond;
    int native_height = kNativeHeight;
    int native_width = kNativeWidth;
};

}  // namespace sparsepose
