#pragma once

#include "sparsepose/graph.hpp"

#include <string>
#include <vector>

namespace sparsepose {

// FLOPs convention: one multiply-accumulate counts as 2 FLOPs. Per conv
// layer, dense FLOPs = 2*kh*kw*Cin*Cout*Hout*Wout and sparse FLOPs =
// 2*pairs*Cin*Cout; normalization counts 2 and activation 1 FLOP per
// element (dense: every pixel; sparse: active sites only). Rulebook
// construction is pointer work, not arithmetic, and is never counted here —
// the timing report carries it separately.
struct LayerFlops {
    int index = 0;
    std::string kind;
    int kernel_h = 0, kernel_w = 0;
    int in_channels = 0, out_channels = 0;
    std::int64_t dense_flops = 0;
    std::int64_t sparse_flops = 0;
    std::int64_t pairs = 0;        // rulebook pairs (conv layers)
    std::int64_t active_out = 0;   // active sites after the layer (sparse)
};

struct FlopsReport {
    std::vector<LayerFlops> layers;
    std::int64_t dense_total = 0;
    std::int64_t sparse_total = 0;
    double input_sparsity_edge = 0;  // per input channel group
    double input_sparsity_mv = 0;

    double reduction() const {
        return dense_total > 0 ? 1.0 - static_cast<double>(sparse_total) / dense_total : 0.0;
    }
};

// Dense-side counts for an input of the given spatial size (input-independent
// beyond shape).
template <typename Scalar>
std::vector<std::int64_t> count_dense_flops(const ModelGraph<Scalar>& g, int height,
                                            int width) {
    std::vector<std::int64_t> out;
    out.reserve(g.nodes.size());
    std::int64_t h = height, w = width;
    std::vector<std::pair<std::int64_t, std::int64_t>> level_dims;
    for (const auto& node : g.nodes) {
        std::int64_t flops = 0;
        switch (node.kind) {
            case LayerKind::SubmConv:
                flops = 2LL * node.kernel_h * node.kernel_w * node.in_channels *
                        node.out_channels * h * w;
                break;
            case LayerKind::DownConv: {
                level_dims.emplace_back(h, w);
                const std::int64_t oh = (h + node.stride - 1) / node.stride;
                const std::int64_t ow = (w + node.stride - 1) / node.stride;
                flops = 2LL * node.kernel_h * node.kernel_w * node.in_channels *
                        node.out_channels * oh * ow;
                h = oh;
                w = ow;
                break;
            }
            case LayerKind::UpConv: {
                // Each coarse cell stamps the full kernel.
                flops = 2LL * node.kernel_h * node.kernel_w * node.in_channels *
                        node.out_channels * h * w;
                auto [fh, fw] = level_dims.back();
                level_dims.pop_back();
                h = fh;
                w = fw;
                break;
            }
            case LayerKind::Norm:
                flops = 2LL * h * w * node.out_channels;
                break;
            case LayerKind::Relu:
                flops = 1LL * h * w * node.out_channels;
                break;
            default:
                break;
        }
        out.push_back(flops);
    }
    return out;
}

struct SparseFlopsFragment {
    std::vector<std::int64_t> flops;
    std::vector<std::int64_t> pairs;
    std::vector<std::int64_t> active_out;
};

// Geometry-only pass: propagates active sets and counts rulebook pairs for
// the given input, without any value arithmetic.
template <typename Scalar>
SparseFlopsFragment count_sparse_flops(const ModelGraph<Scalar>& g,
                                       const SparseTensor2D<Scalar>& input) {
    SparseFlopsFragment frag;
    SiteSet sites = input.site_set();
    std::vector<SiteSet> levels;
    std::vector<SiteSet> skips;
    using Geom = SparseTensor2D<float>;

    std::map<std::pair<int, int>, std::int64_t> pair_cache;
    for (const auto& node : g.nodes) {
        std::int64_t flops = 0, pairs = 0;
        switch (node.kind) {
            case LayerKind::SubmConv: {
                const auto key = std::make_pair(node.kernel_h, node.kernel_w);
                auto it = pair_cache.find(key);
                if (it == pair_cache.end()) {
                    const auto geom = Geom::from_site_set(sites, 0);
                    const auto rb =
                        build_submanifold_rulebook(geom, node.kernel_h, node.kernel_w);
                    it = pair_cache.emplace(key, static_cast<std::int64_t>(rb.pair_count()))
                             .first;
                }
                pairs = it->second;
                flops = 2LL * pairs * node.in_channels * node.out_channels;
                break;
            }
            case LayerKind::DownConv: {
                const auto geom = Geom::from_site_set(sites, 0);
                auto plan = build_strided_rulebook(geom, node.kernel_h, node.kernel_w,
                                                   node.stride);
                pairs = static_cast<std::int64_t>(plan.rulebook.pair_count());
                flops = 2LL * pairs * node.in_channels * node.out_channels;
                levels.push_back(sites);
                sites = std::move(plan.output_sites);
                pair_cache.clear();
                break;
            }
            case LayerKind::UpConv: {
                SiteSet fine = std::move(levels.back());
                levels.pop_back();
                const auto geom = Geom::from_site_set(fine, 0);
                auto plan = build_strided_rulebook(geom, node.kernel_h, node.kernel_w,
                                                   node.stride);
                pairs = static_cast<std::int64_t>(plan.rulebook.pair_count());
                flops = 2LL * pairs * node.in_channels * node.out_channels;
                sites = std::move(fine);
                pair_cache.clear();
                break;
            }
            case LayerKind::Norm:
                flops = 2LL * static_cast<std::int64_t>(sites.sites.size()) *
                        node.out_channels;
                break;
            case LayerKind::Relu:
                flops = 1LL * static_cast<std::int64_t>(sites.sites.size()) *
                        node.out_channels;
                break;
            default:
                break;
        }
        frag.flops.push_back(flops);
        frag.pairs.push_back(pairs);
        frag.active_out.push_back(static_cast<std::int64_t>(sites.sites.size()));
    }
    return frag;
}

template <typename Scalar>
FlopsReport make_flops_report(const ModelGraph<Scalar>& g,
                              const SparseTensor2D<Scalar>& input,
                              double edge_sparsity, double mv_sparsity) {
    FlopsReport report;
    report.input_sparsity_edge = edge_sparsity;
    report.input_sparsity_mv = mv_sparsity;
    const auto dense = count_dense_flops(g, input.height(), input.width());
    const auto sparse = count_sparse_flops(g, input);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        LayerFlops lf;
        lf.index = static_cast<int>(i);
        lf.kind = layer_kind_name(g.nodes[i].kind);
        lf.kernel_h = g.nodes[i].kernel_h;
        lf.kernel_w = g.nodes[i].kernel_w;
        lf.in_channels = g.nodes[i].in_channels;
        lf.out_channels = g.nodes[i].out_channels;
        lf.dense_flops = dense[i];
        lf.sparse_flops = sparse.flops[i];
        lf.pairs = sparse.pairs[i];
        lf.active_out = sparse.active_out[i];
        report.dense_total += lf.dense_flops;
        report.sparse_total += lf.sparse_flops;
        report.layers.push_back(std::move(lf));
    }
    return report;
}

void write_flops_csv(const std::string& path, const std::string& backbone,
                     const FlopsReport& report, const std::string& config_echo);

}  // namespace sparsepose
