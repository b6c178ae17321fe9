#pragma once

#include "sparsepose/rulebook.hpp"

#include <span>

namespace sparsepose {

// Convolution weights, one Cin x Cout matrix per kernel offset (same offset
// order as the rulebook), plus bias and matching gradient buffers.
template <typename Scalar>
struct ConvParams {
    int kernel_h = 0, kernel_w = 0;
    int in_channels = 0, out_channels = 0;
    std::vector<MatrixX<Scalar>> weight;
    VectorX<Scalar> bias;
    std::vector<MatrixX<Scalar>> weight_grad;
    VectorX<Scalar> bias_grad;

    static ConvParams zeros(int kh, int kw, int cin, int cout) {
        ConvParams p;
        p.kernel_h = kh;
        p.kernel_w = kw;
        p.in_channels = cin;
        p.out_channels = cout;
        p.weight.assign(static_cast<std::size_t>(kh) * kw, MatrixX<Scalar>::Zero(cin, cout));
        p.weight_grad = p.weight;
        p.bias = VectorX<Scalar>::Zero(cout);
        p.bias_grad = p.bias;
        return p;
    }

    void zero_grad() {
        for (auto& g : weight_grad) g.setZero();
        bias_grad.setZero();
    }

    Eigen::Index parameter_count() const {
        return static_cast<Eigen::Index>(weight.size()) * in_channels * out_channels +
               out_channels;
    }
};

// Per-channel affine normalization with running statistics (epsilon 1e-5,
// momentum 0.1 unless overridden). Statistics are computed over active sites
// only; inactive sites are structurally zero and never enter them.
template <typename Scalar>
struct NormParams {
    VectorX<Scalar> gamma, beta;
    VectorX<Scalar> running_mean, running_var;
    Scalar epsilon = Scalar(1e-5);
    Scalar momentum = Scalar(0.1);
    VectorX<Scalar> gamma_grad, beta_grad;

    static NormParams identity(int channels) {
        NormParams p;
        p.gamma = VectorX<Scalar>::Ones(channels);
        p.beta = VectorX<Scalar>::Zero(channels);
        p.running_mean = VectorX<Scalar>::Zero(channels);
        p.running_var = VectorX<Scalar>::Ones(channels);
        p.gamma_grad = VectorX<Scalar>::Zero(channels);
        p.beta_grad = VectorX<Scalar>::Zero(channels);
        return p;
    }

    int channels() const { return static_cast<int>(gamma.size()); }
    void zero_grad() {
        gamma_grad.setZero();
        beta_grad.setZero();
    }
    Eigen::Index parameter_count() const { return 2 * gamma.size(); }
};

namespace detail {

template <typename Scalar>
RowMajorMatrixX<Scalar> gather_rows(const RowMajorMatrixX<Scalar>& src,
                                    std::span<const std::int32_t> rows) {
    RowMajorMatrixX<Scalar> out(static_cast<Eigen::Index>(rows.size()), src.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = src.row(rows[i]);
    return out;
}

template <typename Scalar>
void scatter_add_rows(RowMajorMatrixX<Scalar>& dst,
                      std::span<const std::int32_t> rows,
                      const RowMajorMatrixX<Scalar>& src) {
    for (std::size_t i = 0; i < rows.size(); ++i)
        dst.row(rows[i]) += src.row(static_cast<Eigen::Index>(i));
}

inline bool is_identity(const OffsetPairs& pr, Eigen::Index n) {
    if (static_cast<Eigen::Index>(pr.size()) != n) return false;
    for (std::size_t i = 0; i < pr.size(); ++i)
        if (pr.in[i] != static_cast<std::int32_t>(i) ||
            pr.out[i] != static_cast<std::int32_t>(i))
            return false;
    return true;
}

}  // namespace detail

// y[q] = bias + sum over offsets d with q+d active of W[d] . x[q+d].
// Output site set is exactly the input site set.
template <typename Scalar>
SparseTensor2D<Scalar> submanifold_conv_forward(const SparseTensor2D<Scalar>& x,
                                                const Rulebook& rb,
                                                const ConvParams<Scalar>& p) {
    if (x.channels() != p.in_channels)
        throw std::invalid_argument("submanifold_conv_forward: channel mismatch");
    if (rb.stride != 1)
        throw std::invalid_argument("submanifold_conv_forward: strided rulebook");
    auto y = SparseTensor2D<Scalar>::like_sites(x, p.out_channels);
    if (x.site_count() == 0) return y;
    y.values().rowwise() = p.bias.transpose();
    for (std::size_t k = 0; k < rb.pairs.size(); ++k) {
        const auto& pr = rb.pairs[k];
        if (pr.size() == 0) continue;
        if (detail::is_identity(pr, x.site_count())) {
            y.values().noalias() += x.values() * p.weight[k];
            continue;
        }
        RowMajorMatrixX<Scalar> gathered = detail::gather_rows(x.values(), pr.in);
        RowMajorMatrixX<Scalar> prod = gathered * p.weight[k];
        detail::scatter_add_rows(y.values(), pr.out, prod);
    }
    return y;
}

// Accumulates parameter gradients into p and returns the input gradient.
template <typename Scalar>
SparseTensor2D<Scalar> submanifold_conv_backward(const SparseTensor2D<Scalar>& x,
                                                 const Rulebook& rb,
                                                 ConvParams<Scalar>& p,
                                                 const SparseTensor2D<Scalar>& grad_out) {
    if (!x.same_sites(grad_out))
        throw std::invalid_argument("submanifold_conv_backward: site set mismatch");
    auto grad_in = SparseTensor2D<Scalar>::like_sites(x, p.in_channels);
    if (x.site_count() == 0) return grad_in;
    p.bias_grad += grad_out.values().colwise().sum().transpose();
    for (std::size_t k = 0; k < rb.pairs.size(); ++k) {
        const auto& pr = rb.pairs[k];
        if (pr.size() == 0) continue;
        if (detail::is_identity(pr, x.site_count())) {
            p.weight_grad[k].noalias() += x.values().transpose() * grad_out.values();
            grad_in.values().noalias() += grad_out.values() * p.weight[k].transpose();
            continue;
        }
        RowMajorMatrixX<Scalar> gx = detail::gather_rows(x.values(), pr.in);
        RowMajorMatrixX<Scalar> gy = detail::gather_rows(grad_out.values(), pr.out);
        p.weight_grad[k].noalias() += gx.transpose() * gy;
        RowMajorMatrixX<Scalar> gi = gy * p.weight[k].transpose();
        detail::scatter_add_rows(grad_in.values(), pr.in, gi);
    }
    return grad_in;
}

// Downsampling convolution onto the plan's coarse active set.
template <typename Scalar>
SparseTensor2D<Scalar> strided_conv_forward(const SparseTensor2D<Scalar>& x,
                                            const StridedPlan& plan,
                                            const ConvParams<Scalar>& p) {
    if (x.channels() != p.in_channels)
        throw std::invalid_argument("strided_conv_forward: channel mismatch");
    if (x.site_set() != plan.input_sites)
        throw std::invalid_argument("strided_conv_forward: input does not match plan");
    auto y = SparseTensor2D<Scalar>::from_site_set(plan.output_sites, p.out_channels);
    if (y.site_count() == 0) return y;
    y.values().rowwise() = p.bias.transpose();
    for (std::size_t k = 0; k < plan.rulebook.pairs.size(); ++k) {
        const auto& pr = plan.rulebook.pairs[k];
        if (pr.size() == 0) continue;
        RowMajorMatrixX<Scalar> gathered = detail::gather_rows(x.values(), pr.in);
        RowMajorMatrixX<Scalar> prod = gathered * p.weight[k];
        detail::scatter_add_rows(y.values(), pr.out, prod);
    }
    return y;
}

template <typename Scalar>
SparseTensor2D<Scalar> strided_conv_backward(const SparseTensor2D<Scalar>& x,
                                             const StridedPlan& plan,
                                             ConvParams<Scalar>& p,
                                             const SparseTensor2D<Scalar>& grad_out) {
    auto grad_in = SparseTensor2D<Scalar>::like_sites(x, p.in_channels);
    if (grad_out.site_count() > 0)
        p.bias_grad += grad_out.values().colwise().sum().transpose();
    for (std::size_t k = 0; k < plan.rulebook.pairs.size(); ++k) {
        const auto& pr = plan.rulebook.pairs[k];
        if (pr.size() == 0) continue;
        RowMajorMatrixX<Scalar> gx = detail::gather_rows(x.values(), pr.in);
        RowMajorMatrixX<Scalar> gy = detail::gather_rows(grad_out.values(), pr.out);
        p.weight_grad[k].noalias() += gx.transpose() * gy;
        RowMajorMatrixX<Scalar> gi = gy * p.weight[k].transpose();
        detail::scatter_add_rows(grad_in.values(), pr.in, gi);
    }
    return grad_in;
}

// Unpooling convolution back onto a recorded fine active set. `target` must be
// the plan's input (finer-level) site set; x must live on the plan's coarse
// set. Fine value at s accumulates W[d] . x[q] over coarse q with
// stride*q+d = s.
template <typename Scalar>
SparseTensor2D<Scalar> transposed_conv_forward(const SparseTensor2D<Scalar>& x,
                                               const StridedPlan& plan,
                                               const SiteSet& target,
                                               const ConvParams<Scalar>& p) {
    if (x.channels() != p.in_channels)
        throw std::invalid_argument("transposed_conv_forward: channel mismatch");
    if (x.site_set() != plan.output_sites)
        throw std::invalid_argument("transposed_conv_forward: input does not match plan");
    if (target != plan.input_sites)
        throw std::invalid_argument(
            "transposed_conv_forward: target sites inconsistent with rulebook geometry");
    auto y = SparseTensor2D<Scalar>::from_site_set(target, p.out_channels);
    if (y.site_count() == 0) return y;
    y.values().rowwise() = p.bias.transpose();
    for (std::size_t k = 0; k < plan.rulebook.pairs.size(); ++k) {
        const auto& pr = plan.rulebook.pairs[k];
        if (pr.size() == 0) continue;
        // Pairs store (fine in, coarse out); here the roles are reversed.
        RowMajorMatrixX<Scalar> gathered = detail::gather_rows(x.values(), pr.out);
        RowMajorMatrixX<Scalar> prod = gathered * p.weight[k];
        detail::scatter_add_rows(y.values(), pr.in, prod);
    }
    return y;
}

template <typename Scalar>
SparseTensor2D<Scalar> transposed_conv_backward(const SparseTensor2D<Scalar>& x,
                                                const StridedPlan& plan,
                                                ConvParams<Scalar>& p,
                                                const SparseTensor2D<Scalar>& grad_out) {
    auto grad_in = SparseTensor2D<Scalar>::like_sites(x, p.in_channels);
    if (grad_out.site_count() > 0)
        p.bias_grad += grad_out.values().colwise().sum().transpose();
    for (std::size_t k = 0; k < plan.rulebook.pairs.size(); ++k) {
        const auto& pr = plan.rulebook.pairs[k];
        if (pr.size() == 0) continue;
        RowMajorMatrixX<Scalar> gx = detail::gather_rows(x.values(), pr.out);
        RowMajorMatrixX<Scalar> gy = detail::gather_rows(grad_out.values(), pr.in);
        p.weight_grad[k].noalias() += gx.transpose() * gy;
        RowMajorMatrixX<Scalar> gi = gy * p.weight[k].transpose();
        detail::scatter_add_rows(grad_in.values(), pr.out, gi);
    }
    return grad_in;
}

// Saved normalization context for the backward pass.
template <typename Scalar>
struct NormContext {
    VectorX<Scalar> mean;
    VectorX<Scalar> inv_std;
    Eigen::Index count = 0;
    bool training = false;
};

// Batch normalization over all active sites of a mini-batch. Training mode
// normalizes with batch statistics (biased variance) and updates running
// statistics; eval mode uses the running statistics.
template <typename Scalar>
std::vector<SparseTensor2D<Scalar>> norm_forward_batch(
    const std::vector<SparseTensor2D<Scalar>>& xs, NormParams<Scalar>& p,
    bool training, NormContext<Scalar>* ctx = nullptr) {
    const int channels = p.channels();
    Eigen::Index count = 0;
    for (const auto& x : xs) {
        if (x.channels() != channels)
            throw std::invalid_argument("norm_forward: channel mismatch");
        count += x.site_count();
    }

    VectorX<Scalar> mean(channels), var(channels);
    if (training && count > 0) {
        VectorX<Scalar> sum = VectorX<Scalar>::Zero(channels);
        VectorX<Scalar> sum_sq = VectorX<Scalar>::Zero(channels);
        for (const auto& x : xs) {
            if (x.site_count() == 0) continue;
            sum += x.values().colwise().sum().transpose();
            sum_sq += x.values().array().square().matrix().colwise().sum().transpose();
        }
        mean = sum / Scalar(count);
        var = (sum_sq / Scalar(count) - mean.cwiseProduct(mean)).cwiseMax(Scalar(0));
        p.running_mean = (Scalar(1) - p.momentum) * p.running_mean + p.momentum * mean;
        p.running_var = (Scalar(1) - p.momentum) * p.running_var + p.momentum * var;
    } else {
        mean = p.running_mean;
        var = p.running_var;
    }
    VectorX<Scalar> inv_std = (var.array() + p.epsilon).rsqrt();

    std::vector<SparseTensor2D<Scalar>> ys;
    ys.reserve(xs.size());
    for (const auto& x : xs) {
        auto y = SparseTensor2D<Scalar>::like_sites(x, channels);
        if (x.site_count() > 0) {
            y.values() = (x.values().rowwise() - mean.transpose()).array().rowwise() *
                         (inv_std.cwiseProduct(p.gamma)).transpose().array();
            y.values().rowwise() += p.beta.transpose();
        }
        ys.push_back(std::move(y));
    }
    if (ctx) {
        ctx->mean = std::move(mean);
        ctx->inv_std = std::move(inv_std);
        ctx->count = count;
        ctx->training = training && count > 0;
    }
    return ys;
}

template <typename Scalar>
SparseTensor2D<Scalar> norm_forward(const SparseTensor2D<Scalar>& x, NormParams<Scalar>& p,
                                    bool training, NormContext<Scalar>* ctx = nullptr) {
    std::vector<SparseTensor2D<Scalar>> xs{x};
    return norm_forward_batch(xs, p, training, ctx)[0];
}

template <typename Scalar>
std::vector<SparseTensor2D<Scalar>> norm_backward_batch(
    const std::vector<SparseTensor2D<Scalar>>& xs, NormParams<Scalar>& p,
    const NormContext<Scalar>& ctx,
    const std::vector<SparseTensor2D<Scalar>>& grad_outs) {
    const int channels = p.channels();
    const Eigen::Index n = ctx.count;

    VectorX<Scalar> sum_dy = VectorX<Scalar>::Zero(channels);
    VectorX<Scalar> sum_dy_xhat = VectorX<Scalar>::Zero(channels);
    for (std::size_t b = 0; b < xs.size(); ++b) {
        if (xs[b].site_count() == 0) continue;
        const auto& dy = grad_outs[b].values();
        sum_dy += dy.colwise().sum().transpose();
        auto xhat = (xs[b].values().rowwise() - ctx.mean.transpose()).array().rowwise() *
                    ctx.inv_std.transpose().array();
        sum_dy_xhat += (dy.array() * xhat).matrix().colwise().sum().transpose();
    }
    p.gamma_grad += sum_dy_xhat;
    p.beta_grad += sum_dy;

    std::vector<SparseTensor2D<Scalar>> grads;
    grads.reserve(xs.size());
    const VectorX<Scalar> scale = p.gamma.cwiseProduct(ctx.inv_std);
    for (std::size_t b = 0; b < xs.size(); ++b) {
        auto g = SparseTensor2D<Scalar>::like_sites(xs[b], channels);
        if (xs[b].site_count() > 0) {
            const auto& dy = grad_outs[b].values();
            if (ctx.training) {
                auto xhat =
                    (xs[b].values().rowwise() - ctx.mean.transpose()).array().rowwise() *
                    ctx.inv_std.transpose().array();
                auto centered = dy.array().rowwise() -
                                (sum_dy / Scalar(n)).transpose().array() -
                                xhat.rowwise() *
                                    (sum_dy_xhat / Scalar(n)).transpose().array();
                g.values() = (centered.rowwise() * scale.transpose().array()).matrix();
            } else {
                g.values() = (dy.array().rowwise() * scale.transpose().array()).matrix();
            }
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

// ReLU keeps the site set and clamps negative values at active sites.
template <typename Scalar>
SparseTensor2D<Scalar> relu_forward(const SparseTensor2D<Scalar>& x) {
    auto y = SparseTensor2D<Scalar>::like_sites(x, x.channels());
    y.values() = x.values().cwiseMax(Scalar(0));
    return y;
}

template <typename Scalar>
SparseTensor2D<Scalar> relu_backward(const SparseTensor2D<Scalar>& x,
                                     const SparseTensor2D<Scalar>& grad_out) {
    auto g = SparseTensor2D<Scalar>::like_sites(x, x.channels());
    g.values() = (x.values().array() > Scalar(0))
                     .select(grad_out.values(), RowMajorMatrixX<Scalar>::Zero(
                                                     x.values().rows(), x.values().cols()));
    return g;
}

// Channel concatenation; both inputs must share the exact site set.
template <typename Scalar>
SparseTensor2D<Scalar> concat_channels(const SparseTensor2D<Scalar>& a,
                                       const SparseTensor2D<Scalar>& b) {
    if (!a.same_sites(b))
        throw std::invalid_argument("concat_channels: site sets or shapes differ");
    auto y = SparseTensor2D<Scalar>::like_sites(a, a.channels() + b.channels());
    y.values().leftCols(a.channels()) = a.values();
    y.values().rightCols(b.channels()) = b.values();
    return y;
}

template <typename Scalar>
std::pair<SparseTensor2D<Scalar>, SparseTensor2D<Scalar>> concat_backward(
    const SparseTensor2D<Scalar>& grad_out, int channels_a, int channels_b) {
    if (grad_out.channels() != channels_a + channels_b)
        throw std::invalid_argument("concat_backward: channel split mismatch");
    auto ga = SparseTensor2D<Scalar>::like_sites(grad_out, channels_a);
    auto gb = SparseTensor2D<Scalar>::like_sites(grad_out, channels_b);
    ga.values() = grad_out.values().leftCols(channels_a);
    gb.values() = grad_out.values().rightCols(channels_b);
    return {std::move(ga), std::move(gb)};
}

}  // namespace sparsepose
