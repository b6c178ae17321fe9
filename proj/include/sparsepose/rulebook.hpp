#pragma once

#include "sparsepose/sparse_tensor.hpp"

#include <tuple>

namespace sparsepose {

// Index pairs for one kernel offset, structure-of-arrays for gather speed.
// in[i] indexes a site of the convolution input, out[i] a site of the output.
struct OffsetPairs {
    std::vector<std::int32_t> in;
    std::vector<std::int32_t> out;

    std::size_t size() const { return in.size(); }
};

// Per-kernel-offset (input site, output site) pairs driving sparse convolution
// as gather -> multiply -> scatter. Offsets are listed in row-major kernel
// order; for stride 1 they are centered (dr in [-(kh-1)/2, (kh-1)/2]), for
// stride >= 2 they are window-anchored (dr in [0, kh)).
struct Rulebook {
    int kernel_h = 0;
    int kernel_w = 0;
    int stride = 1;
    std::vector<Coord> offsets;
    std::vector<OffsetPairs> pairs;

    std::size_t pair_count() const {
        std::size_t n = 0;
        for (const auto& p : pairs) n += p.size();
        return n;
    }
    // Ordinal of the (0,0) offset for stride-1 rulebooks.
    int center_index() const { return (kernel_h / 2) * kernel_w + (kernel_w / 2); }
};

// Submanifold rule: output sites are exactly the input sites, and a pair
// exists at offset d for output p iff p+d is an active input site.
template <typename Scalar>
Rulebook build_submanifold_rulebook(const SparseTensor2D<Scalar>& t, int kh, int kw) {
    if (kh <= 0 || kw <= 0 || kh % 2 == 0 || kw % 2 == 0)
        throw std::invalid_argument("build_submanifold_rulebook: kernel dims must be odd");
    Rulebook rb;
    rb.kernel_h = kh;
    rb.kernel_w = kw;
    rb.stride = 1;
    const int ph = kh / 2, pw = kw / 2;
    for (int dr = -ph; dr <= ph; ++dr)
        for (int dc = -pw; dc <= pw; ++dc)
            rb.offsets.push_back({dr, dc});
    rb.pairs.resize(rb.offsets.size());

    const auto& sites = t.sites();
    for (std::size_t k = 0; k < rb.offsets.size(); ++k) {
        const Coord d = rb.offsets[k];
        auto& pr = rb.pairs[k];
        if (d.row == 0 && d.col == 0) {
            // Center offset pairs every site with itself.
            pr.in.resize(sites.size());
            pr.out.resize(sites.size());
            std::iota(pr.in.begin(), pr.in.end(), 0);
            std::iota(pr.out.begin(), pr.out.end(), 0);
            continue;
        }
        for (std::size_t o = 0; o < sites.size(); ++o) {
            const Coord q{sites[o].row + d.row, sites[o].col + d.col};
            if (q.row < 0 || q.row >= t.height() || q.col < 0 || q.col >= t.width())
                continue;
            const std::int32_t in = t.find(q);
            if (in >= 0) {
                pr.in.push_back(in);
                pr.out.push_back(static_cast<std::int32_t>(o));
            }
        }
    }
    return rb;
}

// Rulebook plus the geometry it was built from. `input_sites` is the fine
// level, `output_sites` the derived coarse level; pairs map fine ordinals to
// coarse ordinals.
struct StridedPlan {
    Rulebook rulebook;
    SiteSet input_sites;
    SiteSet output_sites;
};

// Downsampling rule: coarse site q is active iff some kernel-window offset d
// has stride*q+d active in the input. Output shape is ceil(H/s) x ceil(W/s).
template <typename Scalar>
StridedPlan build_strided_rulebook(const SparseTensor2D<Scalar>& t, int kh, int kw,
                                   int stride) {
    if (stride < 2)
        throw std::invalid_argument("build_strided_rulebook: stride must be >= 2");
    if (kh <= 0 || kw <= 0)
        throw std::invalid_argument("build_strided_rulebook: bad kernel dims");
    StridedPlan plan;
    Rulebook& rb = plan.rulebook;
    rb.kernel_h = kh;
    rb.kernel_w = kw;
    rb.stride = stride;
    for (int dr = 0; dr < kh; ++dr)
        for (int dc = 0; dc < kw; ++dc)
            rb.offsets.push_back({dr, dc});
    rb.pairs.resize(rb.offsets.size());

    const int coarse_h = (t.height() + stride - 1) / stride;
    const int coarse_w = (t.width() + stride - 1) / stride;

    // (coarse coord, offset ordinal, fine ordinal) triples, then ordinals.
    std::vector<std::tuple<Coord, std::int32_t, std::int32_t>> hits;
    const auto& sites = t.sites();
    for (std::size_t i = 0; i < sites.size(); ++i) {
        const Coord s = sites[i];
        for (std::size_t k = 0; k < rb.offsets.size(); ++k) {
            const Coord d = rb.offsets[k];
            const int rr = s.row - d.row, cc = s.col - d.col;
            if (rr < 0 || cc < 0 || rr % stride != 0 || cc % stride != 0) continue;
            const Coord q{rr / stride, cc / stride};
            if (q.row >= coarse_h || q.col >= coarse_w) continue;
            hits.emplace_back(q, static_cast<std::int32_t>(k),
                              static_cast<std::int32_t>(i));
        }
    }

    std::vector<Coord> coarse;
    coarse.reserve(hits.size());
    for (const auto& [q, k, i] : hits) coarse.push_back(q);
    std::sort(coarse.begin(), coarse.end());
    coarse.erase(std::unique(coarse.begin(), coarse.end()), coarse.end());

    auto coarse_ordinal = [&](Coord q) {
        return static_cast<std::int32_t>(
            std::lower_bound(coarse.begin(), coarse.end(), q) - coarse.begin());
    };

    std::sort(hits.begin(), hits.end(), [&](const auto& a, const auto& b) {
        return std::tuple(std::get<1>(a), std::get<0>(a), std::get<2>(a)) <
               std::tuple(std::get<1>(b), std::get<0>(b), std::get<2>(b));
    });
    for (const auto& [q, k, i] : hits) {
        rb.pairs[static_cast<std::size_t>(k)].in.push_back(i);
        rb.pairs[static_cast<std::size_t>(k)].out.push_back(coarse_ordinal(q));
    }

    plan.input_sites = t.site_set();
    plan.output_sites = SiteSet{coarse_h, coarse_w, std::move(coarse)};
    return plan;
}

}  // namespace sparsepose
