#include "sparsepose/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <thread>

namespace sparsepose {

const char* engine_mode_name(EngineMode m) {
    return m == EngineMode::Dense ? "dense" : "sparse";
}

EngineMode parse_engine_mode(const std::string& name) {
    if (name == "dense") return EngineMode::Dense;
    if (name == "sparse") return EngineMode::Sparse;
    throw config_error("unknown conv mode '" + name + "' (expected dense or sparse)");
}

TimingReport::TimingReport(std::string backbone_, std::string mode_, int frames_,
                           int repetitions_, int warmup_, double median_fps_,
                           double iqr_fps_, double rulebook_seconds_per_frame_,
                           std::string machine_)
    : backbone(std::move(backbone_)), mode(std::move(mode_)), frames(frames_),
      repetitions(repetitions_), warmup(warmup_), median_fps(median_fps_),
      iqr_fps(iqr_fps_), rulebook_seconds_per_frame(rulebook_seconds_per_frame_),
      machine(std::move(machine_)) {
    if (repetitions < 30) throw config_error("timing: need at least 30 repetitions");
    if (warmup < 5) throw config_error("timing: need at least 5 warmup runs");
    if (frames <= 0) throw config_error("timing: empty frame set");
}

namespace {

double run_once(ModelGraph<float>& graph, const std::vector<SparseTensor2D<float>>& frames,
                EngineMode mode, double* rb_seconds) {
    const auto start = std::chrono::steady_clock::now();
    for (const auto& f : frames) {
        DenseGrid<float> out;
        if (mode == EngineMode::Sparse) {
            ForwardStats stats;
            out = forward(graph, f, &stats);
            if (rb_seconds) *rb_seconds += stats.rulebook_seconds;
        } else {
            out = forward_dense(graph, f);
        }
        if (!out.values.allFinite())
            throw numeric_error("benchmark: non-finite heatmap output");
    }
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

TimingReport benchmark_fps(ModelGraph<float>& graph,
                           const std::vector<SparseTensor2D<float>>& frames,
                           EngineMode mode, int repetitions, int warmup) {
    if (frames.empty()) throw config_error("benchmark: empty frame set");
    if (repetitions < 30 || warmup < 5)
        throw config_error("benchmark: repetitions >= 30 and warmup >= 5 required");
    for (int i = 0; i < warmup; ++i) (void)run_once(graph, frames, mode, nullptr);

    std::vector<double> fps;
    double rb_seconds = 0;
    for (int i = 0; i < repetitions; ++i) {
        const double secs = run_once(graph, frames, mode, &rb_seconds);
        fps.push_back(static_cast<double>(frames.size()) / secs);
    }
    std::sort(fps.begin(), fps.end());
    const auto at = [&](double q) {
        return fps[std::min(fps.size() - 1,
                            static_cast<std::size_t>(q * static_cast<double>(fps.size())))];
    };
    const double median = at(0.5);
    const double iqr = at(0.75) - at(0.25);
    const double rb_per_frame =
        rb_seconds / (static_cast<double>(repetitions) * static_cast<double>(frames.size()));
    return TimingReport(graph.spec.name, engine_mode_name(mode),
                        static_cast<int>(frames.size()), repetitions, warmup, median, iqr,
                        rb_per_frame, machine_descriptor());
}

double max_engine_disagreement(ModelGraph<float>& graph,
                               const std::vector<SparseTensor2D<float>>& frames) {
    double worst = 0;
    for (const auto& f : frames) {
        const auto sparse = forward(graph, f);
        const auto dense = forward_dense(graph, f);
        worst = std::max(
            worst,
            static_cast<double>((sparse.values - dense.values).cwiseAbs().maxCoeff()));
    }
    return worst;
}

std::string machine_descriptor() {
    std::string model = "unknown-cpu";
    std::ifstream is("/proc/cpuinfo");
    std::string line;
    while (std::getline(is, line)) {
        if (line.rfind("model name", 0) == 0) {
            const auto colon = line.find(':');
            if (colon != std::string::npos) {
                model = line.substr(colon + 1);
                while (!model.empty() && model.front() == ' ') model.erase(model.begin());
            }
            break;
        }
    }
    return model + " x" + std::to_string(std::thread::hardware_concurrency());
}

void write_timing_csv(const std::string& path, const std::vector<TimingReport>& reports,
                      const std::string& config_echo) {
    std::ofstream os(path);
    if (!os) throw data_error("timing csv: cannot open '" + path + "'");
    os << "# config: " << config_echo << "\n";
    os << "backbone,mode,frames,repetitions,warmup,median_fps,iqr_fps,"
          "rulebook_seconds_per_frame,machine\n";
    for (const auto& r : reports)
        os << r.backbone << "," << r.mode << "," << r.frames << "," << r.repetitions << ","
           << r.warmup << "," << r.median_fps << "," << r.iqr_fps << ","
           << r.rulebook_seconds_per_frame << ",\"" << r.machine << "\"\n";
}

}  // namespace sparsepose
