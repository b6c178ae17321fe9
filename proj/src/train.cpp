#include "sparsepose/train.hpp"

#include <cmath>

namespace sparsepose {

TrainResult train(ModelGraph<float>& graph, const Clip& clip, const TrainConfig& config,
                  std::ostream* log) {
    if (clip.frames.empty() || clip.frames.size() != clip.annotations.size())
        throw data_error("train: clip needs one annotation per frame");
    if (modality_channels(config.modality) != graph.input_channels)
        throw config_error("train: modality channel count does not match the model");
    if (config.batch_size <= 0 || config.steps <= 0)
        throw config_error("train: steps and batch size must be positive");

    const int n = static_cast<int>(clip.frames.size());
    std::vector<SparseTensor2D<float>> inputs;
    inputs.reserve(clip.frames.size());
    for (const auto& f : clip.frames)
        inputs.push_back(modality_input(f, config.modality));

    std::mt19937_64 rng(config.seed);
    std::vector<int> order(clip.frames.size());
    std::iota(order.begin(), order.end(), 0);
    std::size_t cursor = order.size();  // triggers a shuffle on first use
    auto next_index = [&] {
        if (cursor >= order.size()) {
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[rng() % i]);
            cursor = 0;
        }
        return order[cursor++];
    };

    SgdOptimizer<float> sgd(graph);
    TrainResult result;
    double lr = config.optimizer.learning_rate;

    for (int step = 0; step < config.steps; ++step) {
        std::vector<SparseTensor2D<float>> batch;
        std::vector<int> ids;
        for (int b = 0; b < config.batch_size && b < n; ++b) {
            const int id = next_index();
            ids.push_back(id);
            batch.push_back(inputs[static_cast<std::size_t>(id)]);
        }

        ForwardTrace<float> trace;
        auto preds = forward_batch(graph, batch, /*training=*/true, &trace);

        double loss = 0;
        std::vector<DenseGrid<float>> grads;
        grads.reserve(preds.size());
        const float inv_batch = 1.0f / static_cast<float>(preds.size());
        for (std::size_t b = 0; b < preds.size(); ++b) {
            const auto target = make_target_heatmaps<float>(
                clip.annotations[static_cast<std::size_t>(ids[b])], clip.native_height,
                clip.native_width, preds[b].height, preds[b].width);
            loss += mse_loss(preds[b], target) * inv_batch;
            auto g = mse_loss_gradient(preds[b], target);
            g.values *= inv_batch;
            grads.push_back(std::move(g));
        }
        if (!std::isfinite(loss))
            throw numeric_error("train: loss diverged to non-finite at step " +
                                std::to_string(step));

        graph.zero_grad();
        backward_batch(graph, trace, grads);
        sgd.step(graph, lr, config.optimizer.momentum);

        if (step == 0) result.initial_loss = loss;
        result.final_loss = loss;
        if (config.log_every > 0 &&
            (step % config.log_every == 0 || step + 1 == config.steps)) {
            result.loss_curve.emplace_back(step, loss);
            if (log) *log << step << "," << lr << "," << loss << "\n";
        }
        if (config.optimizer.lr_decay_every > 0 &&
            (step + 1) % config.optimizer.lr_decay_every == 0)
            lr *= config.optimizer.lr_decay;
    }
    return result;
}

}  // namespace sparsepose
