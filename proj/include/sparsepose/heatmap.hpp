#pragma once

#include "sparsepose/pose.hpp"

#include <cmath>
#include <optional>

namespace sparsepose {

inline constexpr double kHeatmapSigma = 4.0;

// Axis scaling between resolutions; multiply-then-divide keeps integer-valued
// results exact in double precision.
inline double scale_coord(double v, int from_dim, int to_dim) {
    return v * static_cast<double>(to_dim) / static_cast<double>(from_dim);
}

// Per-joint Gaussian target heatmaps. Each visible joint is scaled from
// native to heatmap coordinates, stamped as an impulse at the nearest pixel
// and blurred with a sigma=4 Gaussian truncated at 3*sigma, renormalized so
// the peak is exactly 1. Invisible joints give all-zero channels; joints
// scaling out of bounds are clamped and flagged.
template <typename Scalar>
DenseGrid<Scalar> make_target_heatmaps(const PoseAnnotation& ann, int native_h,
                                       int native_w, int out_h, int out_w,
                                       double sigma = kHeatmapSigma,
                                       std::array<bool, kNumJoints>* clamped = nullptr) {
    DenseGrid<Scalar> target(out_h, out_w, kNumJoints);
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    if (clamped) clamped->fill(false);
    for (int j = 0; j < kNumJoints; ++j) {
        if (!ann.joints[j].visible) continue;
        const double r = scale_coord(ann.joints[j].row, native_h, out_h);
        const double c = scale_coord(ann.joints[j].col, native_w, out_w);
        int pr = static_cast<int>(std::lround(r));
        int pc = static_cast<int>(std::lround(c));
        if (pr < 0 || pr >= out_h || pc < 0 || pc >= out_w) {
            pr = std::clamp(pr, 0, out_h - 1);
            pc = std::clamp(pc, 0, out_w - 1);
            if (clamped) (*clamped)[j] = true;
        }
        for (int dr = -radius; dr <= radius; ++dr) {
            const int rr = pr + dr;
            if (rr < 0 || rr >= out_h) continue;
            for (int dc = -radius; dc <= radius; ++dc) {
                const int cc = pc + dc;
                if (cc < 0 || cc >= out_w) continue;
                const double d2 = static_cast<double>(dr) * dr + static_cast<double>(dc) * dc;
                if (d2 > 9.0 * sigma * sigma) continue;
                target.at(rr, cc, j) =
                    static_cast<Scalar>(std::exp(-d2 / (2.0 * sigma * sigma)));
            }
        }
    }
    return target;
}

// Mean over all pixels and channels of the squared difference.
template <typename Scalar>
double mse_loss(const DenseGrid<Scalar>& pred, const DenseGrid<Scalar>& target) {
    if (pred.height != target.height || pred.width != target.width ||
        pred.channels != target.channels)
        throw std::invalid_argument("mse_loss: shape mismatch");
    const double count = static_cast<double>(pred.values.size());
    return (pred.values - target.values).template cast<double>().array().square().sum() /
           count;
}

// d(mse)/d(pred) = 2 (pred - target) / count.
template <typename Scalar>
DenseGrid<Scalar> mse_loss_gradient(const DenseGrid<Scalar>& pred,
                                    const DenseGrid<Scalar>& target) {
    if (pred.height != target.height || pred.width != target.width ||
        pred.channels != target.channels)
        throw std::invalid_argument("mse_loss_gradient: shape mismatch");
    DenseGrid<Scalar> g(pred.height, pred.width, pred.channels);
    g.values = (pred.values - target.values) *
               static_cast<Scalar>(2.0 / static_cast<double>(pred.values.size()));
    return g;
}

// Per-channel argmax decode; ties break to the smallest row, then column
// (i.e. the first hit in row-major order). Positions are reported in native
// coordinates.
template <typename Scalar>
PoseAnnotation decode_joints(const DenseGrid<Scalar>& heatmaps, int native_h,
                             int native_w) {
    if (heatmaps.channels != kNumJoints)
        throw std::invalid_argument("decode_joints: expected 13 channels");
    PoseAnnotation ann;
    for (int j = 0; j < kNumJoints; ++j) {
        Scalar best = heatmaps.values(0, j);
        int best_r = 0, best_c = 0;
        for (int r = 0; r < heatmaps.height; ++r)
            for (int c = 0; c < heatmaps.width; ++c) {
                const Scalar v = heatmaps.at(r, c, j);
                if (v > best) {
                    best = v;
                    best_r = r;
                    best_c = c;
                }
            }
        ann.joints[j].row = scale_coord(best_r, heatmaps.height, native_h);
        ann.joints[j].col = scale_coord(best_c, heatmaps.width, native_w);
        ann.joints[j].visible = true;
    }
    return ann;
}

// Mean Euclidean distance over joints visible in the ground truth, evaluated
// at `eval_h` x `eval_w` resolution (annotations are native 640x480).
// A frame with no visible joints has no defined error and returns nullopt.
inline std::optional<double> mpjpe(const PoseAnnotation& pred, const PoseAnnotation& truth,
                                   int eval_h, int eval_w, int native_h = 480,
                                   int native_w = 640) {
    double sum = 0;
    int n = 0;
    for (int j = 0; j < kNumJoints; ++j) {
        if (!truth.joints[j].visible || !pred.joints[j].visible) continue;
        const double dr = scale_coord(pred.joints[j].row, native_h, eval_h) -
                          scale_coord(truth.joints[j].row, native_h, eval_h);
        const double dc = scale_coord(pred.joints[j].col, native_w, eval_w) -
                          scale_coord(truth.joints[j].col, native_w, eval_w);
        sum += std::sqrt(dr * dr + dc * dc);
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

}  // namespace sparsepose
