#pragma once

#include "sparsepose/graph.hpp"
#include "sparsepose/heatmap.hpp"
#include "sparsepose/sparse_frame.hpp"

#include <ostream>
#include <random>

namespace sparsepose {

struct OptimizerConfig {
    double learning_rate = 30.0;  // MSE over a full grid is tiny; see train()
    double momentum = 0.9;
    double lr_decay = 1.0;    // multiplicative factor
    int lr_decay_every = 0;   // steps; 0 disables
};

struct TrainConfig {
    int steps = 600;
    int batch_size = 2;
    std::uint64_t seed = 1;
    Modality modality = Modality::Fusion;
    OptimizerConfig optimizer;
    int log_every = 10;
};

struct TrainResult {
    std::vector<std::pair<int, double>> loss_curve;  // (step, batch loss)
    double initial_loss = 0;
    double final_loss = 0;
};

// Plain SGD with momentum over flat parameter spans.
template <typename Scalar>
class SgdOptimizer {
public:
    explicit SgdOptimizer(ModelGraph<Scalar>& graph) {
        for_each_param(graph, [&](Scalar*, Scalar*, std::size_t n) {
            velocity_.emplace_back(n, Scalar(0));
        });
    }

    void step(ModelGraph<Scalar>& graph, double lr, double momentum) {
        std::size_t slot = 0;
        for_each_param(graph, [&](Scalar* value, Scalar* grad, std::size_t n) {
            auto& v = velocity_[slot++];
            for (std::size_t i = 0; i < n; ++i) {
                v[i] = static_cast<Scalar>(momentum) * v[i] -
                       static_cast<Scalar>(lr) * grad[i];
                value[i] += v[i];
            }
        });
    }

private:
    std::vector<std::vector<Scalar>> velocity_;
};

// Trains on a clip with the sparse engine. Inputs are resampled to the model
// resolution once; target heatmaps are regenerated per step (a clip of dense
// targets would not fit in memory). Deterministic under a fixed seed.
// Throws numeric_error on divergence (non-finite loss).
TrainResult train(ModelGraph<float>& graph, const Clip& clip, const TrainConfig& config,
                  std::ostream* log = nullptr);

}  // namespace sparsepose
