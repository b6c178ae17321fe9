#include "sparsepose/pose.hpp"

#include <cmath>
#include <cstdlib>

namespace sparsepose {

namespace {

constexpr const char* kJointNames[kNumJoints] = {
    "nose",
    "l_shoulder", "r_shoulder",
    "l_elbow", "r_elbow",
    "l_hand", "r_hand",
    "l_hip", "r_hip",
    "l_knee", "r_knee",
    "l_foot", "r_foot",
};

constexpr const char* kActionNames[16] = {
    "arm_abduction", "arm_bicep_curl", "wave_hello", "punch_up_forward",
    "leg_knee_lift", "leg_abduction", "leg_pulling",
    "squat", "walk_in_place", "standing_side_bend", "roll_wrists_ankles",
    "elbow_to_knee", "jump_in_place", "jumping_jack", "hop_on_one_foot",
    "jog_in_place",
};

}  // namespace

const char* joint_name(int joint) {
    if (joint < 0 || joint >= kNumJoints) return "?";
    return kJointNames[joint];
}

const char* speed_class_name(SpeedClass s) {
    switch (s) {
        case SpeedClass::Slow: return "slow";
        case SpeedClass::Medium: return "medium";
        case SpeedClass::Fast: return "fast";
    }
    return "?";
}

SpeedClass classify_speed(double displacement_px) {
    if (displacement_px < 4.0) return SpeedClass::Slow;
    if (displacement_px <= 6.0) return SpeedClass::Medium;
    return SpeedClass::Fast;
}

std::array<std::optional<SpeedClass>, kNumJoints> classify_speed(
    const PoseAnnotation& prev, const PoseAnnotation& cur) {
    std::array<std::optional<SpeedClass>, kNumJoints> out{};
    for (int j = 0; j < kNumJoints; ++j) {
        if (!prev.joints[j].visible || !cur.joints[j].visible) continue;
        const double dr = cur.joints[j].row - prev.joints[j].row;
        const double dc = cur.joints[j].col - prev.joints[j].col;
        out[j] = classify_speed(std::sqrt(dr * dr + dc * dc));
    }
    return out;
}

int action_class(int action_id) {
    if (action_id >= 1 && action_id <= 4) return 1;
    if (action_id >= 5 && action_id <= 7) return 2;
    if (action_id >= 8 && action_id <= 11) return 3;
    if (action_id >= 12 && action_id <= 16) return 4;
    throw config_error("action_class: action id out of range 1..16");
}

const char* action_name(int action_id) {
    if (action_id < 1 || action_id > 16) return "?";
    return kActionNames[action_id - 1];
}

int parse_action(const std::string& name_or_id) {
    char* end = nullptr;
    const long v = std::strtol(name_or_id.c_str(), &end, 10);
    if (end && *end == '\0') {
        if (v < 1 || v > 16) throw config_error("action id out of range 1..16");
        return static_cast<int>(v);
    }
    for (int i = 0; i < 16; ++i)
        if (name_or_id == kActionNames[i]) return i + 1;
    throw config_error("unknown action '" + name_or_id + "'");
}

}  // namespace sparsepose
