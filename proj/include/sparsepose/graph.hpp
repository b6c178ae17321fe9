#pragma once

#include "sparsepose/dense_ref.hpp"
#include "sparsepose/layers.hpp"

#include <chrono>
#include <map>
#include <memory>
#include <random>

namespace sparsepose {

enum class LayerKind : std::uint8_t {
    SubmConv,    // submanifold conv, site set preserved
    DownConv,    // strided conv, 2x2 stride 2
    UpConv,      // transposed conv back to the recorded finer level
    Norm,
    Relu,
    PushSkip,    // save current tensor for a later skip concat
    ConcatSkip,  // concat current tensor with the most recent saved skip
    ToDense,     // scatter active-site logits into a zero grid (final head)
};

const char* layer_kind_name(LayerKind kind);

template <typename Scalar>
struct LayerNode {
    LayerKind kind;
    int kernel_h = 0, kernel_w = 0, stride = 1;
    int in_channels = 0, out_channels = 0;
    ConvParams<Scalar> conv;
    NormParams<Scalar> norm;

    bool has_conv() const {
        return kind == LayerKind::SubmConv || kind == LayerKind::DownConv ||
               kind == LayerKind::UpConv;
    }
};

struct BackboneSpec {
    std::string name;
    std::vector<int> encoder_widths;  // per level, shallow to deep
    int down_levels = 0;

    // dhp19_like | unet_small | unet_large
    static BackboneSpec named(const std::string& name);
};

template <typename Scalar>
struct ModelGraph {
    BackboneSpec spec;
    int input_channels = 0;
    int num_joints = 0;
    std::vector<LayerNode<Scalar>> nodes;

    Eigen::Index parameter_count() const {
        Eigen::Index n = 0;
        for (const auto& node : nodes) {
            if (node.has_conv()) n += node.conv.parameter_count();
            if (node.kind == LayerKind::Norm) n += node.norm.parameter_count();
        }
        return n;
    }

    void zero_grad() {
        for (auto& node : nodes) {
            if (node.has_conv()) node.conv.zero_grad();
            if (node.kind == LayerKind::Norm) node.norm.zero_grad();
        }
    }

    // Seed-deterministic fan-in-scaled uniform init; biases start at zero.
    void init_weights(std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        auto unit = [&rng] { return (rng() >> 11) * 0x1.0p-53; };
        for (auto& node : nodes) {
            if (node.has_conv()) {
                const double fan_in = static_cast<double>(node.kernel_h) *
                                      node.kernel_w * node.in_channels;
                const double bound = 1.0 / std::sqrt(fan_in);
                for (auto& w : node.conv.weight)
                    for (Eigen::Index i = 0; i < w.rows(); ++i)
                        for (Eigen::Index j = 0; j < w.cols(); ++j)
                            w(i, j) = static_cast<Scalar>((unit() * 2.0 - 1.0) * bound);
                node.conv.bias.setZero();
            } else if (node.kind == LayerKind::Norm) {
                node.norm.gamma.setOnes();
                node.norm.beta.setZero();
                node.norm.running_mean.setZero();
                node.norm.running_var.setOnes();
            }
        }
    }
};

// Visits every trainable parameter span in a stable order (node order; conv
// weights per offset, then bias; norm gamma then beta).
template <typename Scalar, typename Fn>
void for_each_param(ModelGraph<Scalar>& g, Fn&& fn) {
    for (auto& node : g.nodes) {
        if (node.has_conv()) {
            for (std::size_t k = 0; k < node.conv.weight.size(); ++k)
                fn(node.conv.weight[k].data(), node.conv.weight_grad[k].data(),
                   static_cast<std::size_t>(node.conv.weight[k].size()));
            fn(node.conv.bias.data(), node.conv.bias_grad.data(),
               static_cast<std::size_t>(node.conv.bias.size()));
        } else if (node.kind == LayerKind::Norm) {
            fn(node.norm.gamma.data(), node.norm.gamma_grad.data(),
               static_cast<std::size_t>(node.norm.gamma.size()));
            fn(node.norm.beta.data(), node.norm.beta_grad.data(),
               static_cast<std::size_t>(node.norm.beta.size()));
        }
    }
}

// Non-trainable state (normalization running statistics).
template <typename Scalar, typename Fn>
void for_each_buffer(ModelGraph<Scalar>& g, Fn&& fn) {
    for (auto& node : g.nodes)
        if (node.kind == LayerKind::Norm) {
            fn(node.norm.running_mean.data(),
               static_cast<std::size_t>(node.norm.running_mean.size()));
            fn(node.norm.running_var.data(),
               static_cast<std::size_t>(node.norm.running_var.size()));
        }
}

namespace detail {

template <typename Scalar>
void add_conv3(ModelGraph<Scalar>& g, int cin, int cout) {
    LayerNode<Scalar> conv{LayerKind::SubmConv, 3, 3, 1, cin, cout,
                           ConvParams<Scalar>::zeros(3, 3, cin, cout),
                           NormParams<Scalar>::identity(0)};
    g.nodes.push_back(std::move(conv));
    LayerNode<Scalar> norm{LayerKind::Norm, 0, 0, 1, cout, cout,
                           ConvParams<Scalar>(), NormParams<Scalar>::identity(cout)};
    g.nodes.push_back(std::move(norm));
    g.nodes.push_back(LayerNode<Scalar>{LayerKind::Relu, 0, 0, 1, cout, cout,
                                        ConvParams<Scalar>(), NormParams<Scalar>()});
}

template <typename Scalar>
void add_resample(ModelGraph<Scalar>& g, LayerKind kind, int cin, int cout) {
    LayerNode<Scalar> conv{kind, 2, 2, 2, cin, cout,
                           ConvParams<Scalar>::zeros(2, 2, cin, cout),
                           NormParams<Scalar>()};
    g.nodes.push_back(std::move(conv));
    LayerNode<Scalar> norm{LayerKind::Norm, 0, 0, 1, cout, cout,
                           ConvParams<Scalar>(), NormParams<Scalar>::identity(cout)};
    g.nodes.push_back(std::move(norm));
    g.nodes.push_back(LayerNode<Scalar>{LayerKind::Relu, 0, 0, 1, cout, cout,
                                        ConvParams<Scalar>(), NormParams<Scalar>()});
}

}  // namespace detail

// Assembles one of the three backbone reconstructions. Every backbone takes a
// sparse input at any resolution and emits heatmaps at that resolution with
// `num_joints` channels.
template <typename Scalar>
ModelGraph<Scalar> build_backbone(const BackboneSpec& spec, int input_channels,
                                  int num_joints) {
    if (input_channels < 1 || input_channels > 3)
        throw config_error("build_backbone: input channels must be 1, 2 or 3");
    ModelGraph<Scalar> g;
    g.spec = spec;
    g.input_channels = input_channels;
    g.num_joints = num_joints;

    auto push = [&](int ch) {
        g.nodes.push_back(LayerNode<Scalar>{LayerKind::PushSkip, 0, 0, 1, ch, ch,
                                            ConvParams<Scalar>(), NormParams<Scalar>()});
    };
    auto concat = [&](int main_ch, int skip_ch) {
        g.nodes.push_back(LayerNode<Scalar>{LayerKind::ConcatSkip, 0, 0, 1, main_ch,
                                            main_ch + skip_ch, ConvParams<Scalar>(),
                                            NormParams<Scalar>()});
    };
    auto head = [&](int cin) {
        LayerNode<Scalar> conv{LayerKind::SubmConv, 1, 1, 1, cin, num_joints,
                               ConvParams<Scalar>::zeros(1, 1, cin, num_joints),
                               NormParams<Scalar>()};
        g.nodes.push_back(std::move(conv));
        g.nodes.push_back(LayerNode<Scalar>{LayerKind::ToDense, 0, 0, 1, num_joints,
                                            num_joints, ConvParams<Scalar>(),
                                            NormParams<Scalar>()});
    };

    if (spec.name == "unet_small" || spec.name == "unet_large") {
        const auto& w = spec.encoder_widths;  // (w0, w1, w2, w3)
        detail::add_conv3(g, input_channels, w[0]);
        detail::add_conv3(g, w[0], w[0]);
        push(w[0]);
        detail::add_resample(g, LayerKind::DownConv, w[0], w[0]);
        detail::add_conv3(g, w[0], w[1]);
        detail::add_conv3(g, w[1], w[1]);
        push(w[1]);
        detail::add_resample(g, LayerKind::DownConv, w[1], w[1]);
        detail::add_conv3(g, w[1], w[2]);
        detail::add_conv3(g, w[2], w[2]);
        push(w[2]);
        detail::add_resample(g, LayerKind::DownConv, w[2], w[2]);
        detail::add_conv3(g, w[2], w[3]);
        detail::add_conv3(g, w[3], w[3]);
        detail::add_resample(g, LayerKind::UpConv, w[3], w[2]);
        concat(w[2], w[2]);
        detail::add_conv3(g, 2 * w[2], w[2]);
        detail::add_conv3(g, w[2], w[2]);
        detail::add_resample(g, LayerKind::UpConv, w[2], w[1]);
        concat(w[1], w[1]);
        detail::add_conv3(g, 2 * w[1], w[1]);
        detail::add_conv3(g, w[1], w[1]);
        detail::add_resample(g, LayerKind::UpConv, w[1], w[0]);
        concat(w[0], w[0]);
        detail::add_conv3(g, 2 * w[0], w[0]);
        detail::add_conv3(g, w[0], w[0]);
        head(w[0]);
    } else if (spec.name == "dhp19_like") {
        // Hourglass-style stack without skips, two pooled levels; sized to
        // land near the published 218K parameter count.
        const auto& w = spec.encoder_widths;  // (16, 32, 64)
        detail::add_conv3(g, input_channels, w[0]);
        detail::add_conv3(g, w[0], w[0]);
        detail::add_resample(g, LayerKind::DownConv, w[0], w[0]);
        detail::add_conv3(g, w[0], w[1]);
        detail::add_conv3(g, w[1], w[1]);
        detail::add_resample(g, LayerKind::DownConv, w[1], w[1]);
        detail::add_conv3(g, w[1], w[2]);
        for (int i = 0; i < 4; ++i) detail::add_conv3(g, w[2], w[2]);
        detail::add_resample(g, LayerKind::UpConv, w[2], w[1]);
        detail::add_conv3(g, w[1], w[1]);
        detail::add_conv3(g, w[1], w[1]);
        detail::add_resample(g, LayerKind::UpConv, w[1], w[0]);
        detail::add_conv3(g, w[0], w[0]);
        head(w[0]);
    } else {
        throw config_error("build_backbone: unknown backbone '" + spec.name + "'");
    }

    // Static channel-flow check over the node list.
    int ch = input_channels;
    std::vector<int> skip_ch;
    for (const auto& node : g.nodes) {
        if (node.in_channels != ch && node.kind != LayerKind::ConcatSkip)
            throw config_error("build_backbone: channel flow mismatch");
        switch (node.kind) {
            case LayerKind::PushSkip: skip_ch.push_back(ch); break;
            case LayerKind::ConcatSkip:
                if (skip_ch.empty() || node.in_channels != ch ||
                    node.out_channels != ch + skip_ch.back())
                    throw config_error("build_backbone: skip wiring mismatch");
                skip_ch.pop_back();
                break;
            default: break;
        }
        ch = node.out_channels;
    }
    if (!skip_ch.empty()) throw config_error("build_backbone: unconsumed skip");
    return g;
}

template <typename Scalar>
ModelGraph<Scalar> build_backbone(const std::string& name, int input_channels,
                                  int num_joints) {
    return build_backbone<Scalar>(BackboneSpec::named(name), input_channels, num_joints);
}

struct ForwardStats {
    double rulebook_seconds = 0;
};

template <typename Scalar>
struct NodeTrace {
    std::vector<SparseTensor2D<Scalar>> inputs;  // per batch element
    std::vector<std::shared_ptr<const Rulebook>> rulebooks;
    std::vector<std::shared_ptr<const StridedPlan>> plans;
    NormContext<Scalar> norm_ctx;
};

template <typename Scalar>
struct ForwardTrace {
    std::vector<NodeTrace<Scalar>> nodes;
};

namespace detail {

using RulebookCache = std::map<std::pair<int, int>, std::shared_ptr<const Rulebook>>;

template <typename Scalar>
struct ElemState {
    SparseTensor2D<Scalar> cur;
    std::vector<SparseTensor2D<Scalar>> skips;
    struct Level {
        std::shared_ptr<const StridedPlan> plan;
        RulebookCache fine_cache;
    };
    std::vector<Level> levels;
    RulebookCache cache;  // rulebooks for the current geometry
};

class StopwatchAdd {
public:
    explicit StopwatchAdd(double* sink)
        : sink_(sink), start_(std::chrono::steady_clock::now()) {}
    ~StopwatchAdd() {
        if (sink_)
            *sink_ += std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                    start_)
                          .count();
    }

private:
    double* sink_;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

// Sparse-engine forward over a mini-batch. In training mode normalization
// pools statistics over the whole batch and updates running stats; pass a
// trace to enable backward_batch afterwards.
template <typename Scalar>
std::vector<DenseGrid<Scalar>> forward_batch(ModelGraph<Scalar>& g,
                                             const std::vector<SparseTensor2D<Scalar>>& inputs,
                                             bool training,
                                             ForwardTrace<Scalar>* trace = nullptr,
                                             ForwardStats* stats = nullptr) {
    for (const auto& x : inputs)
        if (x.channels() != g.input_channels)
            throw std::invalid_argument("forward: input channel mismatch");

    const std::size_t batch = inputs.size();
    std::vector<detail::ElemState<Scalar>> st(batch);
    for (std::size_t b = 0; b < batch; ++b) st[b].cur = inputs[b];
    if (trace) {
        trace->nodes.clear();
        trace->nodes.resize(g.nodes.size());
    }
    double* rb_sink = stats ? &stats->rulebook_seconds : nullptr;

    std::vector<DenseGrid<Scalar>> outputs(batch);
    for (std::size_t ni = 0; ni < g.nodes.size(); ++ni) {
        auto& node = g.nodes[ni];
        NodeTrace<Scalar>* nt = trace ? &trace->nodes[ni] : nullptr;
        switch (node.kind) {
            case LayerKind::SubmConv:
                for (std::size_t b = 0; b < batch; ++b) {
                    auto key = std::make_pair(node.kernel_h, node.kernel_w);
                    auto it = st[b].cache.find(key);
                    if (it == st[b].cache.end()) {
                        detail::StopwatchAdd timer(rb_sink);
                        it = st[b].cache
                                 .emplace(key, std::make_shared<Rulebook>(
                                                   build_submanifold_rulebook(
                                                       st[b].cur, node.kernel_h,
                                                       node.kernel_w)))
                                 .first;
                    }
                    auto y = submanifold_conv_forward(st[b].cur, *it->second, node.conv);
                    if (nt) {
                        nt->inputs.push_back(std::move(st[b].cur));
                        nt->rulebooks.push_back(it->second);
                    }
                    st[b].cur = std::move(y);
                }
                break;
            case LayerKind::DownConv:
                for (std::size_t b = 0; b < batch; ++b) {
                    std::shared_ptr<const StridedPlan> plan;
                    {
                        detail::StopwatchAdd timer(rb_sink);
                        plan = std::make_shared<StridedPlan>(build_strided_rulebook(
                            st[b].cur, node.kernel_h, node.kernel_w, node.stride));
                    }
                    auto y = strided_conv_forward(st[b].cur, *plan, node.conv);
                    if (nt) {
                        nt->inputs.push_back(st[b].cur);
                        nt->plans.push_back(plan);
                    }
                    st[b].levels.push_back({plan, std::move(st[b].cache)});
                    st[b].cache = {};
                    st[b].cur = std::move(y);
                }
                break;
            case LayerKind::UpConv:
                for (std::size_t b = 0; b < batch; ++b) {
                    if (st[b].levels.empty())
                        throw std::logic_error("forward: UpConv without matching DownConv");
                    auto level = std::move(st[b].levels.back());
                    st[b].levels.pop_back();
                    auto y = transposed_conv_forward(st[b].cur, *level.plan,
                                                     level.plan->input_sites, node.conv);
                    if (nt) {
                        nt->inputs.push_back(std::move(st[b].cur));
                        nt->plans.push_back(level.plan);
                    }
                    st[b].cache = std::move(level.fine_cache);
                    st[b].cur = std::move(y);
                }
                break;
            case LayerKind::Norm: {
                std::vector<SparseTensor2D<Scalar>> xs;
                xs.reserve(batch);
                for (auto& s : st) xs.push_back(std::move(s.cur));
                NormContext<Scalar> ctx;
                auto ys = norm_forward_batch(xs, node.norm, training, &ctx);
                for (std::size_t b = 0; b < batch; ++b) st[b].cur = std::move(ys[b]);
                if (nt) {
                    nt->inputs = std::move(xs);
                    nt->norm_ctx = std::move(ctx);
                }
                break;
            }
            case LayerKind::Relu:
                for (std::size_t b = 0; b < batch; ++b) {
                    auto y = relu_forward(st[b].cur);
                    if (nt) nt->inputs.push_back(std::move(st[b].cur));
                    st[b].cur = std::move(y);
                }
                break;
            case LayerKind::PushSkip:
                for (std::size_t b = 0; b < batch; ++b) st[b].skips.push_back(st[b].cur);
                break;
            case LayerKind::ConcatSkip:
                for (std::size_t b = 0; b < batch; ++b) {
                    if (st[b].skips.empty())
                        throw std::logic_error("forward: ConcatSkip without PushSkip");
                    auto skip = std::move(st[b].skips.back());
                    st[b].skips.pop_back();
                    auto y = concat_channels(st[b].cur, skip);
                    if (nt) nt->inputs.push_back(std::move(st[b].cur));
                    st[b].cur = std::move(y);
                }
                break;
            case LayerKind::ToDense:
                for (std::size_t b = 0; b < batch; ++b) {
                    outputs[b] = to_dense(st[b].cur);
                    if (nt) nt->inputs.push_back(std::move(st[b].cur));
                }
                break;
        }
    }
    return outputs;
}

// Eval-mode inference on a single frame.
template <typename Scalar>
DenseGrid<Scalar> forward(ModelGraph<Scalar>& g, const SparseTensor2D<Scalar>& x,
                          ForwardStats* stats = nullptr) {
    std::vector<SparseTensor2D<Scalar>> inputs{x};
    return std::move(forward_batch(
        g, inputs, /*training=*/false,
        static_cast<ForwardTrace<Scalar>*>(nullptr), stats)[0]);
}

// Backpropagates dL/d(heatmaps) through the trace; accumulates parameter
// gradients into the graph and discards the input gradient.
template <typename Scalar>
void backward_batch(ModelGraph<Scalar>& g, const ForwardTrace<Scalar>& trace,
                    const std::vector<DenseGrid<Scalar>>& grad_outputs) {
    if (trace.nodes.size() != g.nodes.size())
        throw std::logic_error("backward: trace does not match graph");
    const std::size_t batch = grad_outputs.size();
    std::vector<SparseTensor2D<Scalar>> grad(batch);
    std::vector<std::vector<SparseTensor2D<Scalar>>> pending_skip(batch);

    for (std::size_t ri = g.nodes.size(); ri-- > 0;) {
        auto& node = g.nodes[ri];
        const auto& nt = trace.nodes[ri];
        switch (node.kind) {
            case LayerKind::ToDense:
                for (std::size_t b = 0; b < batch; ++b) {
                    const auto& x = nt.inputs[b];
                    auto gin = SparseTensor2D<Scalar>::like_sites(x, x.channels());
                    const auto& go = grad_outputs[b];
                    for (Eigen::Index i = 0; i < x.site_count(); ++i) {
                        const Coord s = x.sites()[static_cast<std::size_t>(i)];
                        gin.values().row(i) = go.values.row(go.pixel(s.row, s.col));
                    }
                    grad[b] = std::move(gin);
                }
                break;
            case LayerKind::SubmConv:
                for (std::size_t b = 0; b < batch; ++b)
                    grad[b] = submanifold_conv_backward(nt.inputs[b], *nt.rulebooks[b],
                                                        node.conv, grad[b]);
                break;
            case LayerKind::DownConv:
                for (std::size_t b = 0; b < batch; ++b)
                    grad[b] = strided_conv_backward(nt.inputs[b], *nt.plans[b], node.conv,
                                                    grad[b]);
                break;
            case LayerKind::UpConv:
                for (std::size_t b = 0; b < batch; ++b)
                    grad[b] = transposed_conv_backward(nt.inputs[b], *nt.plans[b],
                                                       node.conv, grad[b]);
                break;
            case LayerKind::Norm: {
                auto gs = norm_backward_batch(nt.inputs, node.norm, nt.norm_ctx, grad);
                for (std::size_t b = 0; b < batch; ++b) grad[b] = std::move(gs[b]);
                break;
            }
            case LayerKind::Relu:
                for (std::size_t b = 0; b < batch; ++b)
                    grad[b] = relu_backward(nt.inputs[b], grad[b]);
                break;
            case LayerKind::ConcatSkip:
                for (std::size_t b = 0; b < batch; ++b) {
                    auto [gmain, gskip] = concat_backward(
                        grad[b], node.in_channels, node.out_channels - node.in_channels);
                    grad[b] = std::move(gmain);
                    pending_skip[b].push_back(std::move(gskip));
                }
                break;
            case LayerKind::PushSkip:
                for (std::size_t b = 0; b < batch; ++b) {
                    if (pending_skip[b].empty())
                        throw std::logic_error("backward: unmatched PushSkip");
                    grad[b].values() += pending_skip[b].back().values();
                    pending_skip[b].pop_back();
                }
                break;
        }
    }
}

// Dense-engine inference: every layer runs on zero-filled dense grids and the
// result is masked back to the propagated active set, which reproduces the
// submanifold function with traditional-convolution arithmetic.
template <typename Scalar>
DenseGrid<Scalar> forward_dense(ModelGraph<Scalar>& g, const SparseTensor2D<Scalar>& x) {
    if (x.channels() != g.input_channels)
        throw std::invalid_argument("forward_dense: input channel mismatch");
    struct Level {
        SiteSet fine;
    };
    DenseGrid<Scalar> cur = to_dense(x);
    SiteSet sites = x.site_set();
    std::vector<Level> levels;
    std::vector<std::pair<DenseGrid<Scalar>, SiteSet>> skips;

    for (auto& node : g.nodes) {
        switch (node.kind) {
            case LayerKind::SubmConv:
                cur = dense_conv_forward(cur, node.conv, 1);
                mask_inactive(cur, sites);
                break;
            case LayerKind::DownConv: {
                auto geom = SparseTensor2D<Scalar>::from_site_set(sites, 0);
                auto plan = build_strided_rulebook(geom, node.kernel_h, node.kernel_w,
                                                   node.stride);
                cur = dense_conv_forward(cur, node.conv, node.stride);
                levels.push_back({std::move(plan.input_sites)});
                sites = std::move(plan.output_sites);
                mask_inactive(cur, sites);
                break;
            }
            case LayerKind::UpConv: {
                if (levels.empty())
                    throw std::logic_error("forward_dense: UpConv without DownConv");
                SiteSet fine = std::move(levels.back().fine);
                levels.pop_back();
                cur = dense_transposed_conv_forward(cur, node.conv, node.stride,
                                                    fine.height, fine.width);
                sites = std::move(fine);
                mask_inactive(cur, sites);
                break;
            }
            case LayerKind::Norm:
                cur = dense_norm_eval(cur, node.norm);
                mask_inactive(cur, sites);
                break;
            case LayerKind::Relu:
                cur = dense_relu(cur);
                break;
            case LayerKind::PushSkip:
                skips.emplace_back(cur, sites);
                break;
            case LayerKind::ConcatSkip: {
                if (skips.empty())
                    throw std::logic_error("forward_dense: ConcatSkip without PushSkip");
                cur = dense_concat(cur, skips.back().first);
                skips.pop_back();
                break;
            }
            case LayerKind::ToDense:
                break;  // already dense and masked
        }
    }
    return cur;
}

}  // namespace sparsepose
