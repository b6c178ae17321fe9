#pragma once

#include "sparsepose/edge_detect.hpp"
#include "sparsepose/motion.hpp"
#include "sparsepose/sparse_frame.hpp"

namespace sparsepose {

// Articulated stick-figure scene standing in for a recorded subject. The
// generator's joint positions double as ground-truth annotations, so no
// manual labeling step exists.
struct SyntheticScene {
    int action_id = 9;            // 1..16
    int camera_angle_deg = 0;     // 0, 15, 30 or 45
    int width = kNativeWidth;
    int height = kNativeHeight;
    int fps = kFramesPerSecond;
    double figure_scale = 1.0;    // 1.0 is a ~300 px tall figure
    double limb_width = 9.0;
    std::uint8_t background = 36;
    std::uint8_t body = 220;
    // Motion blur averages sub-exposures across the frame interval; fast
    // limbs then lose hysteresis edges the way real sensors smear them.
    // Enough subframes to keep the smear ramp under the hysteresis floor.
    bool motion_blur = false;
    int blur_subframes = 16;
};

struct GeneratedClip {
    std::vector<GrayImage> gray;
    Clip clip;
};

// 13 joint positions (row, col) at time `t_seconds`, deterministic in
// (scene, seed).
std::array<JointPoint, kNumJoints> skeleton_pose(const SyntheticScene& scene,
                                                 double t_seconds, std::uint64_t seed);

GrayImage render_frame(const SyntheticScene& scene, double t_seconds, std::uint64_t seed);

// 300 frames per 10 s clip at 30 fps unless overridden. Byte-identical for
// equal (scene, seed, frame_count).
GeneratedClip generate_clip(const SyntheticScene& scene, std::uint64_t seed,
                            int frame_count = 300,
                            const EdgeDetectConfig& edge_config = {},
                            const MotionConfig& motion_config = {});

int camera_index(int camera_angle_deg);  // 0/15/30/45 -> 0..3

}  // namespace sparsepose
