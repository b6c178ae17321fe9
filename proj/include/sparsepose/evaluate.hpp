#pragma once

#include "sparsepose/benchmark.hpp"
#include "sparsepose/heatmap.hpp"
#include "sparsepose/sparse_frame.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sparsepose {

// One aggregation bucket of the evaluation report. class_label is "all" or
// C1..C4; speed_label is "all", "slow", "medium" or "fast". mpjpe is in
// pixels at the model resolution (288x384); mpjpe_native rescales to
// 640x480. n_joints counts the (frame, joint) samples in the bucket.
struct EvalRow {
    std::string class_label;
    std::string speed_label;
    double mpjpe = 0;
    double mpjpe_native = 0;
    std::int64_t n_joints = 0;
};

struct EvalReport {
    std::string backbone;
    std::string modality;
    std::string conv_mode;
    std::vector<EvalRow> rows;
    double overall_mpjpe = 0;         // at model resolution
    double overall_mpjpe_native = 0;  // at 640x480
    int frames_evaluated = 0;
    int frames_skipped = 0;  // frames with no visible joints

    const EvalRow* find(const std::string& cls, const std::string& speed) const;
};

// Runs the model over a clip and buckets per-joint position errors by action
// class and by ground-truth joint speed. Joints without a previous frame are
// excluded from speed buckets only. `frame_filter` restricts to the listed
// frame ids (an explicit split); null means every frame.
EvalReport evaluate(ModelGraph<float>& graph, const Clip& clip, Modality modality,
                    EngineMode mode, const std::vector<int>* frame_filter = nullptr);

void write_eval_csv(const std::string& path, const EvalReport& report,
                    const std::string& config_echo);

}  // namespace sparsepose
