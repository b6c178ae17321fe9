#include "sparsepose/graph.hpp"

namespace sparsepose {

const char* layer_kind_name(LayerKind kind) {
    switch (kind) {
        case LayerKind::SubmConv: return "subm_conv";
        case LayerKind::DownConv: return "down_conv";
        case LayerKind::UpConv: return "up_conv";
        case LayerKind::Norm: return "norm";
        case LayerKind::Relu: return "relu";
        case LayerKind::PushSkip: return "push_skip";
        case LayerKind::ConcatSkip: return "concat_skip";
        case LayerKind::ToDense: return "to_dense";
    }
    return "?";
}

BackboneSpec BackboneSpec::named(const std::string& name) {
    if (name == "dhp19_like") return {name, {16, 32, 64}, 2};
    if (name == "unet_small") return {name, {32, 64, 128, 256}, 3};
    if (name == "unet_large") return {name, {64, 128, 256, 512}, 3};
    throw config_error("unknown backbone '" + name + "' (expected dhp19_like, unet_small or unet_large)");
}

}  // namespace sparsepose
