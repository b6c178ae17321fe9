#pragma once

#include "sparsepose/flops.hpp"

#include <string>
#include <vector>

namespace sparsepose {

enum class EngineMode { Dense, Sparse };

const char* engine_mode_name(EngineMode m);
EngineMode parse_engine_mode(const std::string& name);  // throws config_error

// Wall-clock result of repeatedly running one engine over a fixed frame set.
// Construction enforces the measurement floor: at least 5 warmup runs and 30
// timed repetitions; the reported value is the median.
struct TimingReport {
    std::string backbone;
    std::string mode;
    int frames = 0;
    int repetitions = 0;
    int warmup = 0;
    double median_fps = 0;
    double iqr_fps = 0;
    double rulebook_seconds_per_frame = 0;  // included in FPS, reported apart
    std::string machine;

    TimingReport(std::string backbone, std::string mode, int frames, int repetitions,
                 int warmup, double median_fps, double iqr_fps,
                 double rulebook_seconds_per_frame, std::string machine);
};

// Single-threaded by construction (no threading anywhere in the engines).
// Throws numeric_error if any output is non-finite.
TimingReport benchmark_fps(ModelGraph<float>& graph,
                           const std::vector<SparseTensor2D<float>>& frames,
                           EngineMode mode, int repetitions = 30, int warmup = 5);

// Largest absolute heatmap difference between the two engines over the
// frames; benchmarks are only comparable when this stays within 1e-4.
double max_engine_disagreement(ModelGraph<float>& graph,
                               const std::vector<SparseTensor2D<float>>& frames);

std::string machine_descriptor();

void write_timing_csv(const std::string& path, const std::vector<TimingReport>& reports,
                      const std::string& config_echo);

}  // namespace sparsepose
