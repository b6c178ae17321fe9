#pragma once

#include "sparsepose/types.hpp"

#include <array>
#include <optional>

namespace sparsepose {

inline constexpr int kNumJoints = 13;

// Joint order is fixed across annotations, heatmap channels and reports.
enum Joint : int {
    kNose = 0,
    kLeftShoulder, kRightShoulder,
    kLeftElbow, kRightElbow,
    kLeftHand, kRightHand,
    kLeftHip, kRightHip,
    kLeftKnee, kRightKnee,
    kLeftFoot, kRightFoot,
};

const char* joint_name(int joint);

struct JointPoint {
    double row = 0;
    double col = 0;
    bool visible = true;
};

// 13 subpixel joint positions in native 640x480 sensor coordinates.
struct PoseAnnotation {
    int frame_id = 0;
    int camera_id = 0;
    int action_id = 0;  // 1..16
    std::array<JointPoint, kNumJoints> joints{};
};

enum class SpeedClass { Slow, Medium, Fast };

const char* speed_class_name(SpeedClass s);

// Joint speed taxonomy at 640x480: under 4 px/frame is slow, 4-6 medium,
// over 6 fast.
SpeedClass classify_speed(double displacement_px);

// Per-joint displacement classes between consecutive frames, measured in
// native coordinates; joints invisible in either frame yield nullopt.
std::array<std::optional<SpeedClass>, kNumJoints> classify_speed(
    const PoseAnnotation& prev, const PoseAnnotation& cur);

// Action taxonomy of the 16 recorded exercises.
int action_class(int action_id);         // 1..16 -> 1..4 (C1..C4)
const char* action_name(int action_id);  // "walk_in_place", ...
int parse_action(const std::string& name_or_id);  // throws config_error

}  // namespace sparsepose
