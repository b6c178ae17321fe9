#include <doctest.h>

#include "sparsepose/benchmark.hpp"
#include "sparsepose/evaluate.hpp"
#include "oracles.hpp"

#include <random>

using namespace sparsepose;

namespace {

// Minimal single-conv graph for formula checks.
ModelGraph<float> one_conv_graph(int kh, int kw, int cin, int cout) {
    ModelGraph<float> g;
    g.spec = BackboneSpec{"probe", {cout}, 0};
    g.input_channels = cin;
    g.num_joints = cout;
    LayerNode<float> conv{LayerKind::SubmConv, kh, kw, 1, cin, cout,
                          ConvParams<float>::zeros(kh, kw, cin, cout),
                          NormParams<float>()};
    g.nodes.push_back(std::move(conv));
    return g;
}

SparseTensor2D<float> random_sparse(std::mt19937_64& rng, int h, int w, int c,
                                    double density) {
    return oracle::random_tensor<float>(rng, h, w, c, density);
}

}  // namespace

TEST_CASE("dense flops: textbook formula values") {
    // 3x3 conv, 1 -> 8 channels, 288x384 output.
    auto g = one_conv_graph(3, 3, 1, 8);
    auto dense = count_dense_flops(g, 288, 384);
    CHECK(dense[0] == 15925248LL);  // 2*9*1*8*288*384

    auto tiny = one_conv_graph(1, 1, 1, 1);
    CHECK(count_dense_flops(tiny, 1, 1)[0] == 2LL);
}

TEST_CASE("dense flops: doubling widths multiplies conv flops by 4") {
    auto a = one_conv_graph(3, 3, 16, 16);
    auto b = one_conv_graph(3, 3, 32, 32);
    CHECK(count_dense_flops(b, 64, 64)[0] == 4 * count_dense_flops(a, 64, 64)[0]);
}

TEST_CASE("sparse flops: empty input costs nothing") {
    auto g = one_conv_graph(3, 3, 2, 4);
    SparseTensor2D<float> empty(32, 32, 2);
    auto frag = count_sparse_flops(g, empty);
    CHECK(frag.flops[0] == 0);
    CHECK(frag.pairs[0] == 0);
}

TEST_CASE("sparse flops: fully dense input stays at or under the dense count") {
    auto g = one_conv_graph(3, 3, 3, 5);
    DenseGrid<float> grid(24, 24, 3);
    grid.values.setOnes();
    auto x = from_dense(grid, 0.0f);
    auto frag = count_sparse_flops(g, x);
    auto dense = count_dense_flops(g, 24, 24);
    // Equal up to boundary-truncated pairs.
    CHECK(frag.flops[0] <= dense[0]);
    const std::int64_t interior_pairs = 9LL * 22 * 22;
    CHECK(frag.pairs[0] >= interior_pairs);
}

TEST_CASE("sparse flops are monotone in the number of active sites") {
    auto g = one_conv_graph(3, 3, 2, 2);
    std::mt19937_64 rng(4);
    std::int64_t prev = 0;
    for (double density : {0.0, 0.02, 0.1, 0.3, 0.7, 1.0}) {
        DenseGrid<float> grid(40, 40, 2);
        for (Eigen::Index i = 0; i < grid.values.rows(); ++i)
            if ((rng() >> 11) * 0x1.0p-53 < density) grid.values(i, 0) = 1.0f;
        auto x = from_dense(grid, 0.0f);
        auto frag = count_sparse_flops(g, x);
        CHECK(frag.flops[0] >= prev);
        prev = frag.flops[0];
    }
}

TEST_CASE("flops report totals equal the per-layer sums") {
    std::mt19937_64 rng(5);
    auto g = build_backbone<float>("dhp19_like", 3, 13);
    auto x = random_sparse(rng, 96, 128, 3, 0.03);
    auto report = make_flops_report(g, x, 0.97, 0.99);
    std::int64_t dense_sum = 0, sparse_sum = 0;
    for (const auto& l : report.layers) {
        dense_sum += l.dense_flops;
        sparse_sum += l.sparse_flops;
    }
    CHECK(report.dense_total == dense_sum);
    CHECK(report.sparse_total == sparse_sum);
    CHECK(report.layers.size() == g.nodes.size());
    CHECK(report.reduction() > 0.0);
    CHECK(report.reduction() <= 1.0);
}

TEST_CASE("sparse flops match the executed pair counts on a unet") {
    // The geometry pass must agree with the rulebooks the engine builds.
    std::mt19937_64 rng(6);
    auto g = build_backbone<float>("unet_small", 3, 13);
    g.init_weights(1);
    auto x = random_sparse(rng, 64, 64, 3, 0.04);
    auto frag = count_sparse_flops(g, x);

    ForwardTrace<float> trace;
    std::vector<SparseTensor2D<float>> in{x};
    (void)forward_batch(g, in, false, &trace);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const auto& node = g.nodes[i];
        if (node.kind == LayerKind::SubmConv) {
            CHECK(frag.pairs[i] ==
                  static_cast<std::int64_t>(trace.nodes[i].rulebooks[0]->pair_count()));
        } else if (node.kind == LayerKind::DownConv || node.kind == LayerKind::UpConv) {
            CHECK(frag.pairs[i] ==
                  static_cast<std::int64_t>(trace.nodes[i].plans[0]->rulebook.pair_count()));
        }
    }
}

TEST_CASE("timing report enforces the measurement floor") {
    CHECK_THROWS_AS(TimingReport("b", "sparse", 1, 29, 5, 1, 0, 0, "m"), config_error);
    CHECK_THROWS_AS(TimingReport("b", "sparse", 1, 30, 4, 1, 0, 0, "m"), config_error);
    TimingReport ok("b", "sparse", 1, 30, 5, 1, 0, 0, "m");
    CHECK(ok.repetitions == 30);
}

TEST_CASE("engines agree and dense runs are repeatable") {
    std::mt19937_64 rng(7);
    auto g = build_backbone<float>("dhp19_like", 3, 13);
    g.init_weights(2);
    std::vector<SparseTensor2D<float>> frames{random_sparse(rng, 64, 80, 3, 0.04)};
    CHECK(max_engine_disagreement(g, frames) < 1e-4);
    auto a = forward_dense(g, frames[0]);
    auto b = forward_dense(g, frames[0]);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0f);
}
