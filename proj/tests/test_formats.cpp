#include <doctest.h>

#include "sparsepose/annotation_io.hpp"
#include "sparsepose/spf_io.hpp"
#include "sparsepose/weights_io.hpp"
#include "sparsepose/scene.hpp"
#include "oracles.hpp"

#include <cstdio>
#include <filesystem>
#include <random>

using namespace sparsepose;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

// Random but valid sensor frames: integer edge values in [1,255], integer MV
// in [-128,127], on small grids.
std::vector<SparseFrame> random_frames(std::mt19937_64& rng, int count) {
    std::vector<SparseFrame> frames;
    const int h = 32 + static_cast<int>(rng() % 64);
    const int w = 32 + static_cast<int>(rng() % 64);
    for (int f = 0; f < count; ++f) {
        std::vector<Coord> es, ms;
        std::vector<float> ev;
        std::vector<std::pair<float, float>> mv;
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) {
                if (rng() % 100 < 3) {
                    es.push_back({r, c});
                    ev.push_back(static_cast<float>(1 + rng() % 255));
                }
                if (rng() % 100 < 2) {
                    ms.push_back({r, c});
                    const int mx = static_cast<int>(rng() % 256) - 128;
                    int my = static_cast<int>(rng() % 256) - 128;
                    if (mx == 0 && my == 0) my = 1;
                    mv.emplace_back(static_cast<float>(mx), static_cast<float>(my));
                }
            }
        SparseTensor2D<float>::ValueMatrix evm(static_cast<Eigen::Index>(ev.size()), 1);
        for (std::size_t i = 0; i < ev.size(); ++i) evm(static_cast<Eigen::Index>(i), 0) = ev[i];
        SparseTensor2D<float>::ValueMatrix mvm(static_cast<Eigen::Index>(mv.size()), 2);
        for (std::size_t i = 0; i < mv.size(); ++i) {
            mvm(static_cast<Eigen::Index>(i), 0) = mv[i].first;
            mvm(static_cast<Eigen::Index>(i), 1) = mv[i].second;
        }
        frames.push_back(make_sparse_frame(
            f, SparseTensor2D<float>::from_sites(h, w, 1, std::move(es), std::move(evm)),
            SparseTensor2D<float>::from_sites(h, w, 2, std::move(ms), std::move(mvm))));
    }
    return frames;
}

}  // namespace

TEST_CASE("spf: write-read-write is byte-identical on 50 random clips") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        auto frames = random_frames(rng, 1 + static_cast<int>(rng() % 4));
        auto bytes = encode_spf(frames, 30);
        auto decoded = decode_spf(bytes);
        CHECK(decoded.fps == 30);
        REQUIRE(decoded.frames.size() == frames.size());
        auto bytes2 = encode_spf(decoded.frames, decoded.fps);
        CHECK(bytes == bytes2);
    }
}

TEST_CASE("spf: serializing a tensor twice is byte-identical (canonical order)") {
    std::mt19937_64 rng(2);
    auto frames = random_frames(rng, 2);
    CHECK(encode_spf(frames, 30) == encode_spf(frames, 30));
}

TEST_CASE("spf: every single-byte corruption is detected") {
    std::mt19937_64 rng(3);
    auto frames = random_frames(rng, 2);
    auto bytes = encode_spf(frames, 30);
    int detected = 0, total = 0;
    // Exhaustive over a small file: flip one byte at a time.
    for (std::size_t pos = 0; pos < bytes.size(); ++pos) {
        auto corrupted = bytes;
        corrupted[pos] ^= 0x5A;
        ++total;
        try {
            (void)decode_spf(corrupted);
        } catch (const data_error&) {
            ++detected;
        }
    }
    CHECK(detected == total);
}

TEST_CASE("spf: truncation and garbage are rejected") {
    std::mt19937_64 rng(4);
    auto frames = random_frames(rng, 1);
    auto bytes = encode_spf(frames, 30);
    auto truncated = bytes;
    truncated.resize(truncated.size() / 2);
    CHECK_THROWS_AS((void)decode_spf(truncated), data_error);
    std::vector<std::uint8_t> garbage(100, 0x42);
    CHECK_THROWS_AS((void)decode_spf(garbage), data_error);
}

TEST_CASE("spf: +128 clamps to +127 at serialization, documented") {
    DenseGrid<float> m(8, 8, 2);
    m.at(2, 2, 0) = 128.0f;
    auto frame = make_sparse_frame(0, SparseTensor2D<float>(8, 8, 1), from_dense(m, 0.0f));
    auto decoded = decode_spf(encode_spf({frame}, 30));
    REQUIRE(decoded.frames[0].mv.site_count() == 1);
    CHECK(decoded.frames[0].mv.values()(0, 0) == 127.0f);
}

TEST_CASE("spf: file round trip") {
    std::mt19937_64 rng(5);
    auto frames = random_frames(rng, 3);
    const std::string path = temp_path("sparsepose_test.spf");
    write_spf(path, frames, 30);
    auto loaded = read_spf(path);
    CHECK(loaded.frames.size() == 3);
    CHECK(encode_spf(loaded.frames, loaded.fps) == encode_spf(frames, 30));
    std::remove(path.c_str());
}

TEST_CASE("annotations: round trip with visibility and comments") {
    std::vector<PoseAnnotation> anns;
    std::mt19937_64 rng(6);
    for (int f = 0; f < 20; ++f) {
        PoseAnnotation a;
        a.frame_id = f;
        a.camera_id = static_cast<int>(rng() % 4);
        a.action_id = 1 + static_cast<int>(rng() % 16);
        for (auto& j : a.joints) {
            j.row = static_cast<double>(rng() % 480000) / 1000.0;
            j.col = static_cast<double>(rng() % 640000) / 1000.0;
            j.visible = rng() % 10 != 0;
        }
        anns.push_back(a);
    }
    const std::string path = temp_path("sparsepose_test.ann");
    write_annotations(path, anns);
    auto loaded = read_annotations(path);
    REQUIRE(loaded.size() == anns.size());
    for (std::size_t i = 0; i < anns.size(); ++i) {
        CHECK(loaded[i].frame_id == anns[i].frame_id);
        CHECK(loaded[i].action_id == anns[i].action_id);
        for (int j = 0; j < kNumJoints; ++j) {
            CHECK(loaded[i].joints[j].row == doctest::Approx(anns[i].joints[j].row).epsilon(1e-3));
            CHECK(loaded[i].joints[j].visible == anns[i].joints[j].visible);
        }
    }
    std::remove(path.c_str());
}

TEST_CASE("weights: save/load round-trips bit-exactly and forward is identical") {
    auto g = build_backbone<float>("dhp19_like", 3, 13);
    g.init_weights(3);
    // Perturb running stats so buffers are exercised too.
    for_each_buffer(g, [&](float* v, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) v[i] += 0.25f * static_cast<float>(i % 5);
    });
    const std::string path = temp_path("sparsepose_test.spw");
    save_weights(g, path);

    auto fresh = build_backbone<float>("dhp19_like", 3, 13);
    load_weights(fresh, path);
    std::vector<float> a, b;
    for_each_param(g, [&](float* v, float*, std::size_t n) { a.insert(a.end(), v, v + n); });
    for_each_param(fresh, [&](float* v, float*, std::size_t n) { b.insert(b.end(), v, v + n); });
    CHECK(a == b);

    std::mt19937_64 rng(7);
    auto x = oracle::random_tensor<float>(rng, 48, 48, 3, 0.05);
    auto y1 = forward(g, x);
    auto y2 = forward(fresh, x);
    CHECK((y1.values - y2.values).cwiseAbs().maxCoeff() == 0.0f);

    auto reloaded = load_model(path);
    CHECK(reloaded.spec.name == "dhp19_like");
    auto y3 = forward(reloaded, x);
    CHECK((y1.values - y3.values).cwiseAbs().maxCoeff() == 0.0f);
    std::remove(path.c_str());
}

TEST_CASE("weights: corruption and backbone mismatch are distinct errors") {
    auto g = build_backbone<float>("dhp19_like", 3, 13);
    g.init_weights(4);
    const std::string path = temp_path("sparsepose_test2.spw");
    save_weights(g, path);

    auto other = build_backbone<float>("unet_small", 3, 13);
    CHECK_THROWS_AS(load_weights(other, path), config_error);
    auto edge_model = build_backbone<float>("dhp19_like", 1, 13);
    CHECK_THROWS_AS(load_weights(edge_model, path), config_error);

    // Flip some payload bytes: checksum must catch each.
    std::FILE* f = std::fopen(path.c_str(), "r+b");
    REQUIRE(f);
    std::fseek(f, 2000, SEEK_SET);
    const char x = 0x7F;
    std::fwrite(&x, 1, 1, f);
    std::fclose(f);
    auto same = build_backbone<float>("dhp19_like", 3, 13);
    CHECK_THROWS_AS(load_weights(same, path), data_error);
    std::remove(path.c_str());
}

TEST_CASE("pgm: stream and raw-sidecar round trips") {
    std::mt19937_64 rng(8);
    GraySequence seq;
    seq.fps = 30;
    for (int f = 0; f < 3; ++f) {
        GrayImage img(24, 32);
        for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng() % 256);
        seq.frames.push_back(std::move(img));
    }
    const std::string pgm = temp_path("sparsepose_test.pgms");
    write_pgm_stream(pgm, seq.frames);
    auto loaded = load_gray_video(pgm);
    CHECK(loaded.frames == seq.frames);

    const std::string raw = temp_path("sparsepose_test.raw");
    write_raw_video(raw, seq);
    auto loaded_raw = load_gray_video(raw);
    CHECK(loaded_raw.frames == seq.frames);
    CHECK(loaded_raw.fps == 30);
    std::remove(pgm.c_str());
    std::remove(raw.c_str());
    std::remove((raw + ".hdr").c_str());
}

TEST_CASE("spf: generated clip round trip keeps extractor output bit-exact") {
    SyntheticScene scene;
    scene.action_id = parse_action("arm_abduction");
    auto gen = generate_clip(scene, 17, 12);
    auto bytes = encode_spf(gen.clip.frames, gen.clip.fps);
    auto decoded = decode_spf(bytes);
    CHECK(encode_spf(decoded.frames, decoded.fps) == bytes);
}
