#include "sparsepose/evaluate.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace sparsepose {

const EvalRow* EvalReport::find(const std::string& cls, const std::string& speed) const {
    for (const auto& r : rows)
        if (r.class_label == cls && r.speed_label == speed) return &r;
    return nullptr;
}

EvalReport evaluate(ModelGraph<float>& graph, const Clip& clip, Modality modality,
                    EngineMode mode, const std::vector<int>* frame_filter) {
    if (clip.frames.size() != clip.annotations.size())
        throw data_error("evaluate: clip needs one annotation per frame");
    if (modality_channels(modality) != graph.input_channels)
        throw config_error("evaluate: modality channel count does not match the model");

    std::set<int> wanted;
    if (frame_filter) wanted.insert(frame_filter->begin(), frame_filter->end());

    struct Bucket {
        double sum = 0;          // at model resolution
        double sum_native = 0;   // at 640x480
        std::int64_t count = 0;
        void add(double d, double dn) {
            sum += d;
            sum_native += dn;
            ++count;
        }
    };
    std::map<std::pair<std::string, std::string>, Bucket> buckets;

    EvalReport report;
    report.backbone = graph.spec.name;
    report.modality = modality_name(modality);
    report.conv_mode = engine_mode_name(mode);

    for (std::size_t i = 0; i < clip.frames.size(); ++i) {
        const auto& truth = clip.annotations[i];
        if (frame_filter && !wanted.count(truth.frame_id)) continue;

        const auto input = modality_input(clip.frames[i], modality);
        const auto heatmaps =
            mode == EngineMode::Sparse ? forward(graph, input) : forward_dense(graph, input);
        const auto pred =
            decode_joints(heatmaps, clip.native_height, clip.native_width);

        bool any_visible = false;
        const std::string cls = "C" + std::to_string(action_class(truth.action_id));
        std::array<std::optional<SpeedClass>, kNumJoints> speeds{};
        if (i > 0 && !frame_filter)
            speeds = classify_speed(clip.annotations[i - 1], truth);
        else if (i > 0 && frame_filter && wanted.count(clip.annotations[i - 1].frame_id))
            speeds = classify_speed(clip.annotations[i - 1], truth);

        for (int j = 0; j < kNumJoints; ++j) {
            if (!truth.joints[j].visible) continue;
            any_visible = true;
            const double dr = (pred.joints[j].row - truth.joints[j].row);
            const double dc = (pred.joints[j].col - truth.joints[j].col);
            const double native = std::sqrt(dr * dr + dc * dc);
            const double model_px = native * static_cast<double>(kModelHeight) /
                                    clip.native_height;
            buckets[{"all", "all"}].add(model_px, native);
            buckets[{cls, "all"}].add(model_px, native);
            if (speeds[j])
                buckets[{"all", speed_class_name(*speeds[j])}].add(model_px, native);
        }
        if (any_visible)
            ++report.frames_evaluated;
        else
            ++report.frames_skipped;
    }

    for (const auto& [key, b] : buckets) {
        EvalRow row;
        row.class_label = key.first;
        row.speed_label = key.second;
        row.mpjpe = b.count ? b.sum / static_cast<double>(b.count) : 0.0;
        row.mpjpe_native = b.count ? b.sum_native / static_cast<double>(b.count) : 0.0;
        row.n_joints = b.count;
        report.rows.push_back(std::move(row));
    }
    if (const auto* all = report.find("all", "all")) {
        report.overall_mpjpe = all->mpjpe;
        report.overall_mpjpe_native = all->mpjpe_native;
    }
    return report;
}

void write_eval_csv(const std::string& path, const EvalReport& report,
                    const std::string& config_echo) {
    std::ofstream os(path);
    if (!os) throw data_error("eval csv: cannot open '" + path + "'");
    os << "# config: " << config_echo << "\n";
    os << "backbone,input_modality,conv_mode,class,speed,mpjpe,mpjpe_native,n_joints\n";
    for (const auto& r : report.rows)
        os << report.backbone << "," << report.modality << "," << report.conv_mode << ","
           << r.class_label << "," << r.speed_label << "," << r.mpjpe << ","
           << r.mpjpe_native << "," << r.n_joints << "\n";
}

}  // namespace sparsepose
