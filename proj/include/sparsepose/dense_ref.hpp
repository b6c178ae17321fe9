#pragma once

#include "sparsepose/layers.hpp"

namespace sparsepose {

// Traditional dense convolution engine, the baseline the sparse engine is
// benchmarked against. Stride 1 is textbook cross-correlation with zero
// padding preserving the spatial size; stride >= 2 anchors the kernel window
// at the top-left of each stride cell and yields ceil(H/s) x ceil(W/s).
template <typename Scalar>
DenseGrid<Scalar> dense_conv_forward(const DenseGrid<Scalar>& x,
                                     const ConvParams<Scalar>& p, int stride = 1) {
    if (x.channels != p.in_channels)
        throw std::invalid_argument("dense_conv_forward: channel mismatch");
    const int kh = p.kernel_h, kw = p.kernel_w;

    if (stride == 1) {
        if (kh % 2 == 0 || kw % 2 == 0)
            throw std::invalid_argument("dense_conv_forward: stride-1 kernel must be odd");
        const int ph = kh / 2, pw = kw / 2;
        const int hp = x.height + 2 * ph, wp = x.width + 2 * pw;
        // Padded planes let every offset become one shifted GEMM.
        RowMajorMatrixX<Scalar> in_pad =
            RowMajorMatrixX<Scalar>::Zero(static_cast<Eigen::Index>(hp) * wp, x.channels);
        for (int r = 0; r < x.height; ++r)
            in_pad.middleRows(static_cast<Eigen::Index>(r + ph) * wp + pw, x.width) =
                x.values.middleRows(static_cast<Eigen::Index>(r) * x.width, x.width);

        RowMajorMatrixX<Scalar> out_pad = RowMajorMatrixX<Scalar>::Zero(
            static_cast<Eigen::Index>(hp) * wp, p.out_channels);
        const Eigen::Index total = out_pad.rows();
        for (int dr = -ph; dr <= ph; ++dr) {
            for (int dc = -pw; dc <= pw; ++dc) {
                const auto& w = p.weight[static_cast<std::size_t>(dr + ph) * kw + (dc + pw)];
                const Eigen::Index shift = static_cast<Eigen::Index>(dr) * wp + dc;
                const Eigen::Index begin = std::max<Eigen::Index>(0, -shift);
                const Eigen::Index end = total - std::max<Eigen::Index>(0, shift);
                out_pad.middleRows(begin, end - begin).noalias() +=
                    in_pad.middleRows(begin + shift, end - begin) * w;
            }
        }

        DenseGrid<Scalar> y(x.height, x.width, p.out_channels);
        for (int r = 0; r < x.height; ++r)
            y.values.middleRows(static_cast<Eigen::Index>(r) * x.width, x.width) =
                out_pad.middleRows(static_cast<Eigen::Index>(r + ph) * wp + pw, x.width);
        y.values.rowwise() += p.bias.transpose();
        return y;
    }

    const int oh = (x.height + stride - 1) / stride;
    const int ow = (x.width + stride - 1) / stride;
    DenseGrid<Scalar> y(oh, ow, p.out_channels);
    y.values.rowwise() = p.bias.transpose();
    for (int dr = 0; dr < kh; ++dr) {
        for (int dc = 0; dc < kw; ++dc) {
            const auto& w = p.weight[static_cast<std::size_t>(dr) * kw + dc];
            // Gather the strided input rows for this offset, then one GEMM.
            std::vector<std::int32_t> in_rows, out_rows;
            for (int qr = 0; qr < oh; ++qr) {
                const int r = qr * stride + dr;
                if (r >= x.height) continue;
                for (int qc = 0; qc < ow; ++qc) {
                    const int c = qc * stride + dc;
                    if (c >= x.width) continue;
                    in_rows.push_back(static_cast<std::int32_t>(x.pixel(r, c)));
                    out_rows.push_back(static_cast<std::int32_t>(y.pixel(qr, qc)));
                }
            }
            if (in_rows.empty()) continue;
            RowMajorMatrixX<Scalar> gathered = detail::gather_rows(x.values, in_rows);
            RowMajorMatrixX<Scalar> prod = gathered * w;
            detail::scatter_add_rows(y.values, out_rows, prod);
        }
    }
    return y;
}

// Dense counterpart of the unpooling convolution: y(s) += W[d] . x(q) for
// every coarse cell q and offset d with s = stride*q + d in bounds.
template <typename Scalar>
DenseGrid<Scalar> dense_transposed_conv_forward(const DenseGrid<Scalar>& x,
                                                const ConvParams<Scalar>& p, int stride,
                                                int out_height, int out_width) {
    if (x.channels != p.in_channels)
        throw std::invalid_argument("dense_transposed_conv_forward: channel mismatch");
    DenseGrid<Scalar> y(out_height, out_width, p.out_channels);
    y.values.rowwise() = p.bias.transpose();
    for (int dr = 0; dr < p.kernel_h; ++dr) {
        for (int dc = 0; dc < p.kernel_w; ++dc) {
            const auto& w = p.weight[static_cast<std::size_t>(dr) * p.kernel_w + dc];
            std::vector<std::int32_t> in_rows, out_rows;
            for (int qr = 0; qr < x.height; ++qr) {
                const int r = qr * stride + dr;
                if (r >= out_height) continue;
                for (int qc = 0; qc < x.width; ++qc) {
                    const int c = qc * stride + dc;
                    if (c >= out_width) continue;
                    in_rows.push_back(static_cast<std::int32_t>(x.pixel(qr, qc)));
                    out_rows.push_back(static_cast<std::int32_t>(y.pixel(r, c)));
                }
            }
            if (in_rows.empty()) continue;
            RowMajorMatrixX<Scalar> gathered = detail::gather_rows(x.values, in_rows);
            RowMajorMatrixX<Scalar> prod = gathered * w;
            detail::scatter_add_rows(y.values, out_rows, prod);
        }
    }
    return y;
}

template <typename Scalar>
DenseGrid<Scalar> dense_norm_eval(const DenseGrid<Scalar>& x, const NormParams<Scalar>& p) {
    DenseGrid<Scalar> y(x.height, x.width, x.channels);
    const VectorX<Scalar> inv_std = (p.running_var.array() + p.epsilon).rsqrt();
    const VectorX<Scalar> scale = p.gamma.cwiseProduct(inv_std);
    y.values = (x.values.rowwise() - p.running_mean.transpose()).array().rowwise() *
               scale.transpose().array();
    y.values.rowwise() += p.beta.transpose();
    return y;
}

template <typename Scalar>
DenseGrid<Scalar> dense_relu(const DenseGrid<Scalar>& x) {
    DenseGrid<Scalar> y(x.height, x.width, x.channels);
    y.values = x.values.cwiseMax(Scalar(0));
    return y;
}

template <typename Scalar>
DenseGrid<Scalar> dense_concat(const DenseGrid<Scalar>& a, const DenseGrid<Scalar>& b) {
    if (a.height != b.height || a.width != b.width)
        throw std::invalid_argument("dense_concat: shape mismatch");
    DenseGrid<Scalar> y(a.height, a.width, a.channels + b.channels);
    y.values.leftCols(a.channels) = a.values;
    y.values.rightCols(b.channels) = b.values;
    return y;
}

// Zeroes every pixel not in the active set. Masking after each dense layer
// makes the dense engine compute exactly the submanifold function.
template <typename Scalar>
void mask_inactive(DenseGrid<Scalar>& grid, const SiteSet& active) {
    std::vector<std::uint8_t> keep(static_cast<std::size_t>(grid.height) * grid.width, 0);
    for (const Coord& s : active.sites)
        keep[static_cast<std::size_t>(s.row) * grid.width + s.col] = 1;
    for (Eigen::Index i = 0; i < grid.values.rows(); ++i)
        if (!keep[static_cast<std::size_t>(i)]) grid.values.row(i).setZero();
}

}  // namespace sparsepose
