#pragma once

#include "sparsepose/pose.hpp"

#include <string>
#include <vector>

namespace sparsepose {

// Plain-text annotation table, one record per frame:
//   frame_id camera_id action_id  then 13 x (row col visible)
// in the fixed joint order (nose, l/r shoulder, l/r elbow, l/r hand, l/r hip,
// l/r knee, l/r foot). Positions are native 640x480 subpixels printed with
// three decimals; lines starting with '#' are comments.
void write_annotations(const std::string& path, const std::vector<PoseAnnotation>& anns);
std::vector<PoseAnnotation> read_annotations(const std::string& path);  // throws data_error

// Optional frame-id filter ("split") file: one frame id per line.
std::vector<int> read_split_file(const std::string& path);  // throws data_error

}  // namespace sparsepose
