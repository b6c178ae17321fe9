#pragma once

// Independent test oracles: plain scalar-loop reference implementations and
// generators. Nothing here may call into the engine's execution paths.

#include "sparsepose/sparse_tensor.hpp"
#include "sparsepose/layers.hpp"

#include <functional>
#include <random>
#include <set>

namespace oracle {

using sparsepose::Coord;
using sparsepose::DenseGrid;
using sparsepose::SparseTensor2D;

// Textbook cross-correlation, centered offsets, zero padding, stride 1.
template <typename S>
DenseGrid<S> naive_conv2d(const DenseGrid<S>& x, const sparsepose::ConvParams<S>& p) {
    const int ph = p.kernel_h / 2, pw = p.kernel_w / 2;
    DenseGrid<S> y(x.height, x.width, p.out_channels);
    for (int r = 0; r < x.height; ++r)
        for (int c = 0; c < x.width; ++c)
            for (int co = 0; co < p.out_channels; ++co) {
                S acc = p.bias(co);
                for (int dr = -ph; dr <= ph; ++dr)
                    for (int dc = -pw; dc <= pw; ++dc) {
                        const int rr = r + dr, cc = c + dc;
                        if (rr < 0 || rr >= x.height || cc < 0 || cc >= x.width) continue;
                        const auto& w = p.weight[(dr + ph) * p.kernel_w + (dc + pw)];
                        for (int ci = 0; ci < p.in_channels; ++ci)
                            acc += w(ci, co) * x.at(rr, cc, ci);
                    }
                y.at(r, c, co) = acc;
            }
    return y;
}

// Top-left anchored strided cross-correlation on a zero-filled grid.
template <typename S>
DenseGrid<S> naive_strided_conv2d(const DenseGrid<S>& x, const sparsepose::ConvParams<S>& p,
                                  int stride) {
    const int oh = (x.height + stride - 1) / stride;
    const int ow = (x.width + stride - 1) / stride;
    DenseGrid<S> y(oh, ow, p.out_channels);
    for (int qr = 0; qr < oh; ++qr)
        for (int qc = 0; qc < ow; ++qc)
            for (int co = 0; co < p.out_channels; ++co) {
                S acc = p.bias(co);
                for (int dr = 0; dr < p.kernel_h; ++dr)
                    for (int dc = 0; dc < p.kernel_w; ++dc) {
                        const int rr = qr * stride + dr, cc = qc * stride + dc;
                        if (rr >= x.height || cc >= x.width) continue;
                        const auto& w = p.weight[dr * p.kernel_w + dc];
                        for (int ci = 0; ci < p.in_channels; ++ci)
                            acc += w(ci, co) * x.at(rr, cc, ci);
                    }
                y.at(qr, qc, co) = acc;
            }
    return y;
}

// Brute-force coarse active set: q is active iff some in-window offset hits an
// active input site.
inline std::set<std::pair<int, int>> naive_strided_active_set(
    const std::set<std::pair<int, int>>& active, int h, int w, int kh, int kw,
    int stride) {
    const int oh = (h + stride - 1) / stride, ow = (w + stride - 1) / stride;
    std::set<std::pair<int, int>> out;
    for (int qr = 0; qr < oh; ++qr)
        for (int qc = 0; qc < ow; ++qc)
            for (int dr = 0; dr < kh && !out.count({qr, qc}); ++dr)
                for (int dc = 0; dc < kw; ++dc) {
                    const int rr = qr * stride + dr, cc = qc * stride + dc;
                    if (rr < h && cc < w && active.count({rr, cc})) {
                        out.insert({qr, qc});
                        break;
                    }
                }
    return out;
}

// Deterministic random sparse tensor: `density` fraction of sites active,
// values uniform in [-1, 1] nudged away from zero (keeps ReLU kinks and
// FD checks well-posed).
template <typename S>
SparseTensor2D<S> random_tensor(std::mt19937_64& rng, int h, int w, int c,
                                double density) {
    std::vector<Coord> sites;
    typename SparseTensor2D<S>::ValueMatrix values;
    auto unit = [&] { return (rng() >> 11) * 0x1.0p-53; };
    std::vector<S> vals;
    for (int r = 0; r < h; ++r)
        for (int cc = 0; cc < w; ++cc)
            if (unit() < density) {
                sites.push_back({r, cc});
                for (int ch = 0; ch < c; ++ch) {
                    double v = unit() * 2.0 - 1.0;
                    v += (v >= 0 ? 0.01 : -0.01);
                    vals.push_back(static_cast<S>(v));
                }
            }
    values.resize(static_cast<Eigen::Index>(sites.size()), c);
    for (Eigen::Index i = 0; i < values.rows(); ++i)
        for (int ch = 0; ch < c; ++ch)
            values(i, ch) = vals[static_cast<std::size_t>(i) * c + ch];
    return SparseTensor2D<S>::from_sites(h, w, c, std::move(sites), std::move(values));
}

template <typename S>
void randomize_conv(std::mt19937_64& rng, sparsepose::ConvParams<S>& p) {
    auto unit = [&] { return (rng() >> 11) * 0x1.0p-53; };
    for (auto& w : p.weight)
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j)
                w(i, j) = static_cast<S>(unit() * 2.0 - 1.0);
    for (Eigen::Index i = 0; i < p.bias.size(); ++i)
        p.bias(i) = static_cast<S>(unit() * 2.0 - 1.0);
}

// Central finite difference of a scalar objective with respect to one value.
inline double central_diff(const std::function<double()>& eval, double& slot,
                           double step = 1e-4) {
    const double saved = slot;
    slot = saved + step;
    const double up = eval();
    slot = saved - step;
    const double down = eval();
    slot = saved;
    return (up - down) / (2.0 * step);
}

// Richardson-extrapolated central difference, O(h^4) truncation; for deep
// compositions (stacked normalizations) where plain central differences at
// h=1e-4 leave visible truncation error.
inline double richardson_diff(const std::function<double()>& eval, double& slot,
                              double step = 1e-4) {
    const double d_h = central_diff(eval, slot, step);
    const double d_h2 = central_diff(eval, slot, step / 2);
    return (4.0 * d_h2 - d_h) / 3.0;
}

// Relative error with an absolute floor of 1: |a-b| / max(1, |a|, |b|).
inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace oracle
