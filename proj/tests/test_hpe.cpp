#include <doctest.h>

#include "sparsepose/heatmap.hpp"
#include "sparsepose/sparse_frame.hpp"
#include "oracles.hpp"

#include <random>

using namespace sparsepose;

namespace {

PoseAnnotation single_joint(double row, double col) {
    PoseAnnotation ann;
    for (auto& j : ann.joints) j.visible = false;
    ann.joints[0] = {row, col, true};
    return ann;
}

}  // namespace

TEST_CASE("target heatmap: unit peak and closed-form falloff") {
    // Native (240, 320) scales to the grid center (144, 192).
    auto ann = single_joint(240, 320);
    auto t = make_target_heatmaps<double>(ann, 480, 640, 288, 384);
    CHECK(t.at(144, 192, 0) == doctest::Approx(1.0));
    // At distance 4 px (= sigma), the value is exp(-0.5) of the peak.
    CHECK(t.at(144, 196, 0) == doctest::Approx(std::exp(-0.5)));
    CHECK(t.at(148, 192, 0) == doctest::Approx(std::exp(-0.5)));
    // Truncated at 3*sigma.
    CHECK(t.at(144, 192 + 13, 0) == 0.0);
    // Channel max is exactly 1 and argmax is the stamped pixel.
    double best = -1;
    int br = -1, bc = -1;
    for (int r = 0; r < 288; ++r)
        for (int c = 0; c < 384; ++c)
            if (t.at(r, c, 0) > best) {
                best = t.at(r, c, 0);
                br = r;
                bc = c;
            }
    CHECK(best == 1.0);
    CHECK(br == 144);
    CHECK(bc == 192);
}

TEST_CASE("target heatmap: invisible joint is all zero") {
    auto ann = single_joint(240, 320);
    ann.joints[0].visible = false;
    auto t = make_target_heatmaps<double>(ann, 480, 640, 288, 384);
    CHECK(t.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("target heatmap: two joints give translated copies in the interior") {
    PoseAnnotation ann;
    for (auto& j : ann.joints) j.visible = false;
    ann.joints[0] = {200, 300, true};
    ann.joints[1] = {250, 400, true};
    auto t = make_target_heatmaps<double>(ann, 480, 640, 288, 384);
    const int r0 = static_cast<int>(std::lround(200 * 288.0 / 480));
    const int c0 = static_cast<int>(std::lround(300 * 384.0 / 640));
    const int r1 = static_cast<int>(std::lround(250 * 288.0 / 480));
    const int c1 = static_cast<int>(std::lround(400 * 384.0 / 640));
    for (int dr = -14; dr <= 14; ++dr)
        for (int dc = -14; dc <= 14; ++dc)
            CHECK(t.at(r0 + dr, c0 + dc, 0) == doctest::Approx(t.at(r1 + dr, c1 + dc, 1)));
}

TEST_CASE("target heatmap: out-of-bounds joints clamp and flag") {
    auto ann = single_joint(-50, 700);
    std::array<bool, kNumJoints> clamped{};
    auto t = make_target_heatmaps<double>(ann, 480, 640, 288, 384, kHeatmapSigma, &clamped);
    CHECK(clamped[0]);
    CHECK(t.at(0, 383, 0) == doctest::Approx(1.0));
}

TEST_CASE("mse loss: trivial values and finite-difference gradient") {
    DenseGrid<double> pred(4, 5, 2), target(4, 5, 2);
    std::mt19937_64 rng(2);
    for (Eigen::Index i = 0; i < target.values.rows(); ++i)
        for (int c = 0; c < 2; ++c)
            target.values(i, c) = ((rng() >> 11) * 0x1.0p-53);
    pred.values = target.values;
    CHECK(mse_loss(pred, target) == doctest::Approx(0.0));
    pred.values.array() += 0.1;
    CHECK(mse_loss(pred, target) == doctest::Approx(0.01));

    auto g = mse_loss_gradient(pred, target);
    auto eval = [&] { return mse_loss(pred, target); };
    for (Eigen::Index i = 0; i < pred.values.rows(); i += 3)
        for (int c = 0; c < 2; ++c) {
            const double fd = oracle::central_diff(eval, pred.values(i, c));
            CHECK(oracle::rel_err(g.values(i, c), fd) < 1e-6);
        }

    DenseGrid<double> bad(4, 4, 2);
    CHECK_THROWS_AS((void)mse_loss(pred, bad), std::invalid_argument);
}

TEST_CASE("mpjpe: 3-4-5 offset, perfect prediction, and skipped frames") {
    PoseAnnotation truth;
    std::mt19937_64 rng(3);
    for (auto& j : truth.joints)
        j = {100.0 + static_cast<double>(rng() % 200), 100.0 + static_cast<double>(rng() % 300), true};
    PoseAnnotation pred = truth;
    for (auto& j : pred.joints) {
        j.row += 3;
        j.col += 4;
    }
    CHECK(mpjpe(pred, truth, 480, 640).value() == doctest::Approx(5.0));
    CHECK(mpjpe(truth, truth, 480, 640).value() == doctest::Approx(0.0));
    // Scaled to 288x384 the offset shrinks by exactly 0.6.
    CHECK(mpjpe(pred, truth, 288, 384).value() == doctest::Approx(3.0));

    PoseAnnotation none = truth;
    for (auto& j : none.joints) j.visible = false;
    CHECK(!mpjpe(pred, none, 480, 640).has_value());
}

TEST_CASE("mpjpe triangle inequality over a shared visible set") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        PoseAnnotation a, b, c;
        for (int j = 0; j < kNumJoints; ++j) {
            auto rnd = [&] { return static_cast<double>(rng() % 4000) / 10.0; };
            a.joints[j] = {rnd(), rnd(), true};
            b.joints[j] = {rnd(), rnd(), true};
            c.joints[j] = {rnd(), rnd(), true};
        }
        const double ab = mpjpe(a, b, 480, 640).value();
        const double bc = mpjpe(b, c, 480, 640).value();
        const double ac = mpjpe(a, c, 480, 640).value();
        CHECK(ac <= ab + bc + 1e-9);
    }
}

TEST_CASE("decode: argmax with deterministic tie-breaking") {
    DenseGrid<float> hm(10, 12, 13);
    hm.at(3, 4, 0) = 2.0f;
    hm.at(3, 5, 0) = 2.0f;  // tie: first in row-major order wins
    hm.at(7, 2, 0) = 1.0f;
    auto ann = decode_joints(hm, 10, 12);
    CHECK(ann.joints[0].row == doctest::Approx(3.0));
    CHECK(ann.joints[0].col == doctest::Approx(4.0));
}

TEST_CASE("decode: positive scaling leaves decoded joints unchanged") {
    std::mt19937_64 rng(5);
    DenseGrid<float> hm(16, 16, 13);
    for (int j = 0; j < kNumJoints; ++j)
        hm.at(static_cast<int>(rng() % 16), static_cast<int>(rng() % 16), j) =
            1.0f + static_cast<float>(rng() % 5);
    auto a = decode_joints(hm, 480, 640);
    hm.values *= 37.5f;
    auto b = decode_joints(hm, 480, 640);
    for (int j = 0; j < kNumJoints; ++j) {
        CHECK(a.joints[j].row == b.joints[j].row);
        CHECK(a.joints[j].col == b.joints[j].col);
    }
}

TEST_CASE("encode-decode round trip is exact for lattice-aligned annotations") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 100; ++trial) {
        PoseAnnotation ann;
        for (int j = 0; j < kNumJoints; ++j) {
            // Native multiples of 5 scale to integer heatmap pixels (x0.6),
            // kept 3*sigma inside the border.
            ann.joints[j] = {5.0 * (5 + static_cast<double>(rng() % 85)),
                             5.0 * (5 + static_cast<double>(rng() % 115)), true};
        }
        auto t = make_target_heatmaps<float>(ann, 480, 640, 288, 384);
        auto back = decode_joints(t, 480, 640);
        for (int j = 0; j < kNumJoints; ++j) {
            CHECK(back.joints[j].row == ann.joints[j].row);
            CHECK(back.joints[j].col == ann.joints[j].col);
        }
    }
}

TEST_CASE("speed classification: paper thresholds") {
    CHECK(classify_speed(3.9) == SpeedClass::Slow);
    CHECK(classify_speed(5.0) == SpeedClass::Medium);
    CHECK(classify_speed(6.1) == SpeedClass::Fast);
    CHECK(classify_speed(0.0) == SpeedClass::Slow);
    CHECK(classify_speed(4.0) == SpeedClass::Medium);
    CHECK(classify_speed(6.0) == SpeedClass::Medium);
}

TEST_CASE("speed classification: per-joint displacements and visibility") {
    PoseAnnotation prev, cur;
    for (int j = 0; j < kNumJoints; ++j) {
        prev.joints[j] = {100, 100, true};
        cur.joints[j] = {100, 100, true};
    }
    cur.joints[1].col = 103.9;
    cur.joints[2].col = 105.0;
    cur.joints[3].row = 106.1 - 6.1 + 100 + 6.1;  // 106.1
    prev.joints[4].visible = false;
    auto cls = classify_speed(prev, cur);
    CHECK(cls[0] == SpeedClass::Slow);
    CHECK(cls[1] == SpeedClass::Slow);
    CHECK(cls[2] == SpeedClass::Medium);
    CHECK(cls[3] == SpeedClass::Fast);
    CHECK(!cls[4].has_value());
}

TEST_CASE("speed classification is scale-consistent across resolutions") {
    // A displacement measured at 288x384 must be rescaled to native before
    // thresholding: 3 px at 288x384 is 5 px at 640x480 (medium, not slow).
    const double d288 = 3.0;
    const double native = d288 * 480.0 / 288.0;
    CHECK(classify_speed(native) == SpeedClass::Medium);
    CHECK(classify_speed(d288) == SpeedClass::Slow);  // misclassified if unscaled
}

TEST_CASE("action classes partition the 16 actions") {
    for (int a = 1; a <= 4; ++a) CHECK(action_class(a) == 1);
    for (int a = 5; a <= 7; ++a) CHECK(action_class(a) == 2);
    for (int a = 8; a <= 11; ++a) CHECK(action_class(a) == 3);
    for (int a = 12; a <= 16; ++a) CHECK(action_class(a) == 4);
    CHECK_THROWS_AS((void)action_class(0), config_error);
    CHECK(parse_action("jog_in_place") == 16);
    CHECK(parse_action("13") == 13);
    CHECK_THROWS_AS((void)parse_action("moonwalk"), config_error);
}
