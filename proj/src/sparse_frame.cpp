#include "sparsepose/sparse_frame.hpp"

namespace sparsepose {

const char* modality_name(Modality m) {
    switch (m) {
        case Modality::Edge: return "edge";
        case Modality::Mv: return "mv";
        case Modality::Fusion: return "fusion";
    }
    return "?";
}

Modality parse_modality(const std::string& name) {
    if (name == "edge") return Modality::Edge;
    if (name == "mv") return Modality::Mv;
    if (name == "fusion") return Modality::Fusion;
    throw config_error("unknown modality '" + name + "' (expected edge, mv or fusion)");
}

int modality_channels(Modality m) {
    switch (m) {
        case Modality::Edge: return 1;
        case Modality::Mv: return 2;
        case Modality::Fusion: return 3;
    }
    return 0;
}

namespace {

void check_integer_range(const SparseTensor2D<float>& t, float lo, float hi,
                         const char* what) {
    for (Eigen::Index i = 0; i < t.values().rows(); ++i)
        for (Eigen::Index c = 0; c < t.values().cols(); ++c) {
            const float v = t.values()(i, c);
            if (!(v >= lo && v <= hi))
                throw data_error(std::string(what) + " value out of range");
            if (v != std::nearbyint(v))
                throw data_error(std::string(what) + " value not an integer");
        }
}

}  // namespace

SparseFrame make_sparse_frame(int timestamp, SparseTensor2D<float> edge,
                              SparseTensor2D<float> mv) {
    if (edge.channels() != 1) throw data_error("sparse frame: edge must have 1 channel");
    if (mv.channels() != 2) throw data_error("sparse frame: mv must have 2 channels");
    if (edge.height() != mv.height() || edge.width() != mv.width())
        throw data_error("sparse frame: edge/mv resolution mismatch");
    check_integer_range(edge, 0.0f, 255.0f, "edge");
    check_integer_range(mv, -128.0f, 128.0f, "mv");
    return SparseFrame{timestamp, std::move(edge), std::move(mv)};
}

SparseFrame resample_frame(const SparseFrame& f, int out_h, int out_w) {
    SparseFrame out;
    out.timestamp = f.timestamp;
    out.edge = resample_nearest(f.edge, out_h, out_w);
    out.mv = resample_nearest(f.mv, out_h, out_w);
    return out;
}

SparseTensor2D<float> modality_input(const SparseFrame& frame, Modality m, int out_h,
                                     int out_w) {
    const SparseFrame small = resample_frame(frame, out_h, out_w);
    switch (m) {
        case Modality::Edge: {
            auto t = small.edge;
            t.values() /= 255.0f;
            return t;
        }
        case Modality::Mv: {
            auto t = small.mv;
            t.values() /= 128.0f;
            return t;
        }
        case Modality::Fusion: {
            auto t = assemble_fusion_input(small.edge, small.mv);
            t.values().col(0) /= 255.0f;
            t.values().col(1) /= 128.0f;
            t.values().col(2) /= 128.0f;
            return t;
        }
    }
    throw config_error("modality_input: bad modality");
}

}  // namespace sparsepose
