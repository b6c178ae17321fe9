#include "sparsepose/scene.hpp"

#include <cmath>
#include <random>

namespace sparsepose {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Vec3 {
    double x = 0, y = 0, z = 0;  // x lateral (+image right), y up, z toward camera
    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
};

// Unit direction of a limb hanging straight down, abducted laterally by
// `abd` (side +-1) and raised forward by `fwd`.
Vec3 limb_dir(double abd, double fwd, double side) {
    return {side * std::sin(abd) * std::cos(fwd), -std::cos(abd) * std::cos(fwd),
            std::sin(fwd)};
}

// Per-frame joint angles; limbs use absolute segment directions.
struct BodyPose {
    double arm_abd[2] = {0.06, 0.06}, arm_fwd[2] = {0, 0};
    double fore_abd[2] = {0.06, 0.06}, fore_fwd[2] = {0, 0};
    double leg_abd[2] = {0.04, 0.04}, leg_fwd[2] = {0, 0};
    double shin_abd[2] = {0.04, 0.04}, shin_fwd[2] = {0, 0};
    double body_dy = 0, body_dx = 0;
    double torso_tilt = 0;
};

// Deterministic per-clip variation: base placement, phase and amplitude.
struct ClipJitter {
    double base_row, base_col;
    double phase;
    double amp;
    double freq;
};

ClipJitter make_jitter(const SyntheticScene& scene, std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x5350485055ull);
    auto unit = [&rng] { return (rng() >> 11) * 0x1.0p-53; };
    ClipJitter j;
    j.base_row = scene.height * 0.56 + (unit() * 2 - 1) * 10.0;
    j.base_col = scene.width * 0.5 + (unit() * 2 - 1) * 14.0;
    j.phase = unit() * 2 * kPi;
    j.amp = 0.92 + unit() * 0.16;
    j.freq = 0.95 + unit() * 0.10;
    return j;
}

BodyPose action_pose(int action_id, double t, const ClipJitter& j) {
    BodyPose p;
    const double ph = j.phase;
    auto osc = [&](double freq_hz, double phase = 0) {
        return std::sin(2 * kPi * freq_hz * j.freq * t + ph + phase);
    };
    auto raised = [&](double freq_hz, double phase = 0) {  // 0..1
        return 0.5 - 0.5 * std::cos(2 * kPi * freq_hz * j.freq * t + ph + phase);
    };
    const double A = j.amp;

    switch (action_id) {
        case 1: {  // arm abduction, both arms sweep out to ~100 deg
            const double a = A * 1.75 * raised(0.5);
            for (int s : {0, 1}) p.arm_abd[s] = p.fore_abd[s] = 0.06 + a;
            break;
        }
        case 2: {  // bicep curl, forearms swing up and forward
            const double curl = A * 2.2 * raised(0.8);
            for (int s : {0, 1}) {
                p.arm_abd[s] = p.fore_abd[s] = 0.1;
                p.fore_fwd[s] = curl;
            }
            break;
        }
        case 3: {  // wave hello: right arm raised, forearm swings; rest frozen
            p.arm_abd[1] = 2.45;
            p.fore_abd[1] = 2.45 + A * 0.62 * osc(1.2);
            p.leg_abd[0] = p.leg_abd[1] = p.shin_abd[0] = p.shin_abd[1] = 0.04;
            break;
        }
        case 4: {  // punch up forward, alternating
            const double l = A * 1.9 * raised(0.9);
            const double r = A * 1.9 * raised(0.9, kPi);
            p.arm_fwd[0] = p.fore_fwd[0] = 0.2 + l * 0.7;
            p.arm_abd[0] = p.fore_abd[0] = 0.15 + l * 0.35;
            p.arm_fwd[1] = p.fore_fwd[1] = 0.2 + r * 0.7;
            p.arm_abd[1] = p.fore_abd[1] = 0.15 + r * 0.35;
            break;
        }
        case 5: {  // leg knee lift, alternating thigh raises
            p.leg_fwd[0] = A * 1.3 * raised(0.7);
            p.leg_fwd[1] = A * 1.3 * raised(0.7, kPi);
            break;
        }
        case 6: {  // leg abduction, straight leg out to the side
            p.leg_abd[0] = p.shin_abd[0] = 0.04 + A * 0.75 * raised(0.6);
            p.leg_abd[1] = p.shin_abd[1] = 0.04 + A * 0.75 * raised(0.6, kPi);
            break;
        }
        case 7: {  // leg pulling, heel drawn up behind
            p.shin_fwd[0] = -A * 1.5 * raised(0.7);
            p.shin_fwd[1] = -A * 1.5 * raised(0.7, kPi);
            break;
        }
        case 8: {  // squat
            const double s = A * raised(0.45);
            p.body_dy = -52 * s;
            for (int k : {0, 1}) {
                p.leg_fwd[k] = 0.9 * s;
                p.shin_fwd[k] = -0.9 * s;
                p.arm_fwd[k] = p.fore_fwd[k] = 0.7 * s;
            }
            break;
        }
        case 9: {  // walk in place
            const double f = 1.0;
            p.leg_fwd[0] = std::max(0.0, A * 0.5 * osc(f));
            p.leg_fwd[1] = std::max(0.0, A * 0.5 * osc(f, kPi));
            p.arm_fwd[0] = A * 0.35 * osc(f, kPi);
            p.arm_fwd[1] = A * 0.35 * osc(f);
            p.fore_fwd[0] = p.arm_fwd[0];
            p.fore_fwd[1] = p.arm_fwd[1];
            p.body_dy = 3.0 * osc(2 * f);
            break;
        }
        case 10: {  // standing side bend
            p.torso_tilt = A * 0.42 * osc(0.4);
            for (int s : {0, 1}) p.arm_abd[s] = p.fore_abd[s] = 0.5;
            break;
        }
        case 11: {  // roll wrists and ankles, small slow circles
            for (int s : {0, 1}) {
                p.arm_fwd[s] = 0.9;
                p.fore_fwd[s] = 0.9 + 0.10 * osc(0.8, s * kPi);
                p.fore_abd[s] = 0.06 + 0.10 * osc(0.8, s * kPi + kPi / 2);
                p.shin_fwd[s] = 0.06 * osc(0.8, s * kPi);
            }
            break;
        }
        case 12: {  // elbow to knee, vigorous alternating crunch
            const double l = A * raised(1.1);
            const double r = A * raised(1.1, kPi);
            p.arm_abd[0] = 2.0 - 1.1 * l;
            p.fore_abd[0] = 2.2 - 1.3 * l;
            p.leg_fwd[1] = 1.25 * l;
            p.arm_abd[1] = 2.0 - 1.1 * r;
            p.fore_abd[1] = 2.2 - 1.3 * r;
            p.leg_fwd[0] = 1.25 * r;
            p.torso_tilt = 0.25 * (l - r);
            p.body_dy = -8 * std::max(l, r);
            break;
        }
        case 13: {  // jump in place
            const double c = std::sin(2 * kPi * 1.25 * j.freq * t + ph);
            p.body_dy = 34 * A * std::max(0.0, c);
            const double crouch = 0.5 * std::max(0.0, -c);
            for (int s : {0, 1}) {
                p.leg_fwd[s] = crouch;
                p.shin_fwd[s] = -crouch;
                p.arm_abd[s] = p.fore_abd[s] = 0.3 + 0.3 * std::max(0.0, c);
            }
            break;
        }
        case 14: {  // jumping jack
            const double u = raised(0.9);
            p.body_dy = 14 * A * std::max(0.0, osc(0.9, kPi / 2));
            for (int s : {0, 1}) {
                p.arm_abd[s] = p.fore_abd[s] = 0.1 + 2.6 * u;
                p.leg_abd[s] = p.shin_abd[s] = 0.04 + 0.5 * u;
            }
            break;
        }
        case 15: {  // hop on one foot
            const double c = std::sin(2 * kPi * 1.3 * j.freq * t + ph);
            p.body_dy = 24 * A * std::max(0.0, c);
            p.leg_fwd[0] = 1.1;   // lifted leg
            p.shin_fwd[0] = -1.0;
            p.shin_fwd[1] = -0.3 * std::max(0.0, -c);
            for (int s : {0, 1}) p.arm_abd[s] = p.fore_abd[s] = 0.45;
            break;
        }
        case 16: {  // jog in place
            const double f = 2.1;
            p.leg_fwd[0] = std::max(0.0, A * 0.9 * osc(f));
            p.leg_fwd[1] = std::max(0.0, A * 0.9 * osc(f, kPi));
            p.shin_fwd[0] = -0.5 * p.leg_fwd[0];
            p.shin_fwd[1] = -0.5 * p.leg_fwd[1];
            p.arm_fwd[0] = 0.4 + A * 0.55 * osc(f, kPi);
            p.arm_fwd[1] = 0.4 + A * 0.55 * osc(f);
            p.fore_fwd[0] = p.arm_fwd[0] + 0.5;
            p.fore_fwd[1] = p.arm_fwd[1] + 0.5;
            p.body_dy = 6.0 * osc(2 * f);
            break;
        }
        default:
            throw config_error("action id out of range 1..16");
    }
    return p;
}

struct Figure {
    std::array<Vec3, kNumJoints> joints;  // body frame, pelvis origin
};

Figure figure_from_pose(const BodyPose& p, double s) {
    const double hip_x = 24 * s, sho_x = 36 * s, torso = 128 * s, head = 44 * s;
    const double upper = 52 * s, fore = 48 * s, thigh = 74 * s, shin = 74 * s;
    const double ct = std::cos(p.torso_tilt), st = std::sin(p.torso_tilt);
    auto tilt = [&](const Vec3& v) { return Vec3{v.x * ct - v.y * st, v.x * st + v.y * ct, v.z}; };

    Figure f;
    const Vec3 pelvis{p.body_dx, p.body_dy, 0};
    const Vec3 chest = pelvis + tilt({0, torso, 0});
    f.joints[kNose] = chest + tilt({0, head, 0});
    const double side[2] = {-1.0, +1.0};  // 0 = left (image left), 1 = right
    for (int i : {0, 1}) {
        const Vec3 shoulder = chest + tilt({side[i] * sho_x, 0, 0});
        const Vec3 hip = pelvis + Vec3{side[i] * hip_x, 0, 0};
        const Vec3 elbow = shoulder + limb_dir(p.arm_abd[i], p.arm_fwd[i], side[i]) * upper;
        const Vec3 hand = elbow + limb_dir(p.fore_abd[i], p.fore_fwd[i], side[i]) * fore;
        const Vec3 knee = hip + limb_dir(p.leg_abd[i], p.leg_fwd[i], side[i]) * thigh;
        const Vec3 foot = knee + limb_dir(p.shin_abd[i], p.shin_fwd[i], side[i]) * shin;
        f.joints[kLeftShoulder + i] = shoulder;
        f.joints[kLeftElbow + i] = elbow;
        f.joints[kLeftHand + i] = hand;
        f.joints[kLeftHip + i] = hip;
        f.joints[kLeftKnee + i] = knee;
        f.joints[kLeftFoot + i] = foot;
    }
    return f;
}

struct Projected {
    std::array<JointPoint, kNumJoints> joints;
};

Projected project(const Figure& f, const SyntheticScene& scene, const ClipJitter& j) {
    const double yaw = scene.camera_angle_deg * kPi / 180.0;
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    Projected out;
    for (int i = 0; i < kNumJoints; ++i) {
        const Vec3& v = f.joints[i];
        const double x = v.x * cy + v.z * sy;
        out.joints[i] = {j.base_row - v.y, j.base_col + x, true};
    }
    return out;
}

double point_segment_dist(double pr, double pc, const JointPoint& a, const JointPoint& b) {
    const double vr = b.row - a.row, vc = b.col - a.col;
    const double wr = pr - a.row, wc = pc - a.col;
    const double len2 = vr * vr + vc * vc;
    double t = len2 > 0 ? (wr * vr + wc * vc) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dr = wr - t * vr, dc = wc - t * vc;
    return std::sqrt(dr * dr + dc * dc);
}

struct Capsule {
    int a, b;       // joint indices
    double width;   // full width in px
};

void render_into(const SyntheticScene& scene, const Projected& pose,
                 std::vector<double>& accum) {
    const double s = scene.figure_scale;
    const double lw = scene.limb_width * s;
    const std::array<Capsule, 10> capsules{{
        {kLeftShoulder, kRightShoulder, lw * 1.4},
        {kLeftHip, kRightHip, lw * 1.6},
        {kLeftShoulder, kLeftElbow, lw * 1.1},
        {kRightShoulder, kRightElbow, lw * 1.1},
        {kLeftElbow, kLeftHand, lw},
        {kRightElbow, kRightHand, lw},
        {kLeftHip, kLeftKnee, lw * 1.4},
        {kRightHip, kRightKnee, lw * 1.4},
        {kLeftKnee, kLeftFoot, lw * 1.2},
        {kRightKnee, kRightFoot, lw * 1.2},
    }};

    auto splat = [&](const JointPoint& a, const JointPoint& b, double width) {
        const double half = width / 2;
        const int r0 = std::max(0, static_cast<int>(std::floor(std::min(a.row, b.row) - half - 1)));
        const int r1 = std::min(scene.height - 1, static_cast<int>(std::ceil(std::max(a.row, b.row) + half + 1)));
        const int c0 = std::max(0, static_cast<int>(std::floor(std::min(a.col, b.col) - half - 1)));
        const int c1 = std::min(scene.width - 1, static_cast<int>(std::ceil(std::max(a.col, b.col) + half + 1)));
        for (int r = r0; r <= r1; ++r)
            for (int c = c0; c <= c1; ++c) {
                const double d = point_segment_dist(r, c, a, b);
                const double cov = std::clamp(0.5 + (half - d), 0.0, 1.0);
                if (cov <= 0) continue;
                double& px = accum[static_cast<std::size_t>(r) * scene.width + c];
                px = std::max(px, cov);
            }
    };

    // Torso as a thick capsule between shoulder-center and hip-center.
    const JointPoint chest{(pose.joints[kLeftShoulder].row + pose.joints[kRightShoulder].row) / 2,
                           (pose.joints[kLeftShoulder].col + pose.joints[kRightShoulder].col) / 2,
                           true};
    const JointPoint waist{(pose.joints[kLeftHip].row + pose.joints[kRightHip].row) / 2,
                           (pose.joints[kLeftHip].col + pose.joints[kRightHip].col) / 2, true};
    splat(chest, waist, 52 * s);
    // Head disc at the nose.
    splat(pose.joints[kNose], pose.joints[kNose], 34 * s);
    for (const auto& cap : capsules)
        splat(pose.joints[cap.a], pose.joints[cap.b], cap.width);
}

Projected pose_at(const SyntheticScene& scene, double t, const ClipJitter& j) {
    BodyPose p = action_pose(scene.action_id, t, j);
    Figure fig = figure_from_pose(p, scene.figure_scale);
    return project(fig, scene, j);
}

}  // namespace

int camera_index(int camera_angle_deg) {
    switch (camera_angle_deg) {
        case 0: return 0;
        case 15: return 1;
        case 30: return 2;
        case 45: return 3;
    }
    throw config_error("camera angle must be one of 0, 15, 30, 45");
}

std::array<JointPoint, kNumJoints> skeleton_pose(const SyntheticScene& scene,
                                                 double t_seconds, std::uint64_t seed) {
    return pose_at(scene, t_seconds, make_jitter(scene, seed)).joints;
}

GrayImage render_frame(const SyntheticScene& scene, double t_seconds, std::uint64_t seed) {
    const ClipJitter jitter = make_jitter(scene, seed);
    const std::size_t n = static_cast<std::size_t>(scene.height) * scene.width;
    std::vector<double> accum(n, 0.0);
    if (scene.motion_blur) {
        const int k = std::max(1, scene.blur_subframes);
        std::vector<double> sub(n);
        std::vector<double> sum(n, 0.0);
        for (int i = 0; i < k; ++i) {
            std::fill(sub.begin(), sub.end(), 0.0);
            const double t = t_seconds - (static_cast<double>(i) / k) / scene.fps;
            render_into(scene, pose_at(scene, std::max(0.0, t), jitter), sub);
            for (std::size_t p = 0; p < n; ++p) sum[p] += sub[p];
        }
        for (std::size_t p = 0; p < n; ++p) accum[p] = sum[p] / k;
    } else {
        render_into(scene, pose_at(scene, t_seconds, jitter), accum);
    }
    GrayImage img(scene.height, scene.width);
    const double bg = scene.background, body = scene.body;
    for (std::size_t p = 0; p < n; ++p)
        img.pixels[p] = static_cast<std::uint8_t>(
            std::clamp(std::nearbyint(bg + (body - bg) * accum[p]), 0.0, 255.0));
    return img;
}

GeneratedClip generate_clip(const SyntheticScene& scene, std::uint64_t seed,
                            int frame_count, const EdgeDetectConfig& edge_config,
                            const MotionConfig& motion_config) {
    if (frame_count <= 0) throw config_error("generate_clip: frame count must be positive");
    (void)camera_index(scene.camera_angle_deg);  // validates the angle
    if (scene.action_id < 1 || scene.action_id > 16)
        throw config_error("generate_clip: action id out of range 1..16");

    GeneratedClip out;
    out.clip.fps = scene.fps;
    out.clip.native_height = scene.height;
    out.clip.native_width = scene.width;
    const ClipJitter jitter = make_jitter(scene, seed);

    for (int i = 0; i < frame_count; ++i) {
        const double t = static_cast<double>(i) / scene.fps;
        out.gray.push_back(render_frame(scene, t, seed));

        auto edge = extract_edge(out.gray.back(), edge_config);
        SparseTensor2D<float> mv(scene.height, scene.width, 2);
        if (i > 0) mv = extract_motion(out.gray[i - 1], out.gray[i], motion_config);
        out.clip.frames.push_back(make_sparse_frame(i, std::move(edge), std::move(mv)));

        PoseAnnotation ann;
        ann.frame_id = i;
        ann.camera_id = camera_index(scene.camera_angle_deg);
        ann.action_id = scene.action_id;
        ann.joints = pose_at(scene, t, jitter).joints;
        out.clip.annotations.push_back(ann);
    }
    return out;
}

}  // namespace sparsepose
