#pragma once

#include "sparsepose/graph.hpp"

#include <string>

namespace sparsepose {

// Weight file: magic "SPW1", u32 format version, backbone spec (name,
// encoder widths, down levels, input channels, joint count), then every
// trainable parameter span and every running-statistics buffer as raw
// little-endian IEEE-754 float32 arrays in graph order, and a trailing
// CRC-32. Round-trips bit-exactly.
void save_weights(const ModelGraph<float>& graph, const std::string& path);

// Loads into a pre-built graph; the file's backbone spec must match.
void load_weights(ModelGraph<float>& graph, const std::string& path);

// Builds the graph from the spec embedded in the file.
ModelGraph<float> load_model(const std::string& path);

}  // namespace sparsepose
