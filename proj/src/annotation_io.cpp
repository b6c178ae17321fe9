#include "sparsepose/annotation_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace sparsepose {

void write_annotations(const std::string& path, const std::vector<PoseAnnotation>& anns) {
    std::ofstream os(path);
    if (!os) throw data_error("annotations: cannot open '" + path + "' for writing");
    os << "# frame_id camera_id action_id";
    for (int j = 0; j < kNumJoints; ++j)
        os << " " << joint_name(j) << "_row " << joint_name(j) << "_col "
           << joint_name(j) << "_vis";
    os << "\n";
    char buf[64];
    for (const auto& a : anns) {
        os << a.frame_id << " " << a.camera_id << " " << a.action_id;
        for (const auto& j : a.joints) {
            std::snprintf(buf, sizeof buf, " %.3f %.3f %d", j.row, j.col,
                          j.visible ? 1 : 0);
            os << buf;
        }
        os << "\n";
    }
}

std::vector<PoseAnnotation> read_annotations(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw data_error("annotations: cannot open '" + path + "'");
    std::vector<PoseAnnotation> out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        PoseAnnotation a;
        if (!(ss >> a.frame_id >> a.camera_id >> a.action_id))
            throw data_error("annotations: bad record at line " + std::to_string(lineno));
        for (auto& j : a.joints) {
            int vis = 0;
            if (!(ss >> j.row >> j.col >> vis))
                throw data_error("annotations: truncated record at line " +
                                 std::to_string(lineno));
            j.visible = vis != 0;
        }
        if (a.action_id < 1 || a.action_id > 16)
            throw data_error("annotations: action id out of range at line " +
                             std::to_string(lineno));
        out.push_back(a);
    }
    if (out.empty()) throw data_error("annotations: no records in '" + path + "'");
    return out;
}

std::vector<int> read_split_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw data_error("split: cannot open '" + path + "'");
    std::vector<int> ids;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        ids.push_back(std::stoi(line));
    }
    if (ids.empty()) throw data_error("split: no frame ids in '" + path + "'");
    return ids;
}

}  // namespace sparsepose
