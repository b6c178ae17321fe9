#include "sparsepose/weights_io.hpp"

#include "sparsepose/crc32.hpp"

#include <cstring>
#include <fstream>

namespace sparsepose {

namespace {

constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_string(std::vector<std::uint8_t>& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

void put_floats(std::vector<std::uint8_t>& out, const float* data, std::size_t n) {
    const std::size_t offset = out.size();
    out.resize(offset + n * 4);
    std::memcpy(out.data() + offset, data, n * 4);  // little-endian IEEE-754
}

struct Reader {
    const std::uint8_t* p;
    std::size_t left;

    std::uint32_t u32() {
        if (left < 4) throw data_error("weights: truncated file");
        std::uint32_t v = static_cast<std::uint32_t>(p[0]) |
                          (static_cast<std::uint32_t>(p[1]) << 8) |
                          (static_cast<std::uint32_t>(p[2]) << 16) |
                          (static_cast<std::uint32_t>(p[3]) << 24);
        p += 4;
        left -= 4;
        return v;
    }
    std::string string() {
        const std::uint32_t n = u32();
        if (n > left || n > 4096) throw data_error("weights: bad string length");
        std::string s(reinterpret_cast<const char*>(p), n);
        p += n;
        left -= n;
        return s;
    }
    void floats(float* data, std::size_t n) {
        if (n * 4 > left) throw data_error("weights: truncated parameter data");
        std::memcpy(data, p, n * 4);
        p += n * 4;
        left -= n * 4;
    }
};

}  // namespace

void save_weights(const ModelGraph<float>& graph, const std::string& path) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), {'S', 'P', 'W', '1'});
    put_u32(out, kVersion);
    put_string(out, graph.spec.name);
    put_u32(out, static_cast<std::uint32_t>(graph.spec.encoder_widths.size()));
    for (int w : graph.spec.encoder_widths) put_u32(out, static_cast<std::uint32_t>(w));
    put_u32(out, static_cast<std::uint32_t>(graph.spec.down_levels));
    put_u32(out, static_cast<std::uint32_t>(graph.input_channels));
    put_u32(out, static_cast<std::uint32_t>(graph.num_joints));

    auto& g = const_cast<ModelGraph<float>&>(graph);  // visitation only reads
    for_each_param(g, [&](float* v, float*, std::size_t n) { put_floats(out, v, n); });
    for_each_buffer(g, [&](float* v, std::size_t n) { put_floats(out, v, n); });

    put_u32(out, crc32(out.data(), out.size()));
    std::ofstream os(path, std::ios::binary);
    if (!os) throw data_error("weights: cannot open '" + path + "' for writing");
    os.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
    if (!os) throw data_error("weights: write failed for '" + path + "'");
}

namespace {

std::vector<std::uint8_t> read_checked(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("weights: cannot open '" + path + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                    std::istreambuf_iterator<char>());
    if (bytes.size() < 8) throw data_error("weights: file too small");
    const std::size_t body = bytes.size() - 4;
    std::uint32_t stored = 0;
    std::memcpy(&stored, bytes.data() + body, 4);
    if (crc32(bytes.data(), body) != stored)
        throw data_error("weights: checksum mismatch");
    return bytes;
}

BackboneSpec read_spec(Reader& rd, int& input_channels, int& num_joints) {
    if (rd.u32() != 0x31575053u)  // "SPW1"
        throw data_error("weights: bad magic");
    if (rd.u32() != kVersion) throw data_error("weights: unsupported format version");
    BackboneSpec spec;
    spec.name = rd.string();
    const std::uint32_t nw = rd.u32();
    if (nw > 16) throw data_error("weights: bad width count");
    for (std::uint32_t i = 0; i < nw; ++i)
        spec.encoder_widths.push_back(static_cast<int>(rd.u32()));
    spec.down_levels = static_cast<int>(rd.u32());
    input_channels = static_cast<int>(rd.u32());
    num_joints = static_cast<int>(rd.u32());
    return spec;
}

void load_into(ModelGraph<float>& graph, Reader& rd) {
    for_each_param(graph, [&](float* v, float*, std::size_t n) { rd.floats(v, n); });
    for_each_buffer(graph, [&](float* v, std::size_t n) { rd.floats(v, n); });
    if (rd.left != 0) throw data_error("weights: trailing bytes after parameters");
}

}  // namespace

void load_weights(ModelGraph<float>& graph, const std::string& path) {
    const auto bytes = read_checked(path);
    Reader rd{bytes.data(), bytes.size() - 4};
    int in_ch = 0, joints = 0;
    const BackboneSpec spec = read_spec(rd, in_ch, joints);
    if (spec.name != graph.spec.name || spec.encoder_widths != graph.spec.encoder_widths ||
        in_ch != graph.input_channels || joints != graph.num_joints)
        throw config_error("weights: file was trained for backbone '" + spec.name +
                           "' with " + std::to_string(in_ch) +
                           " input channels; graph does not match");
    load_into(graph, rd);
}

ModelGraph<float> load_model(const std::string& path) {
    const auto bytes = read_checked(path);
    Reader rd{bytes.data(), bytes.size() - 4};
    int in_ch = 0, joints = 0;
    const BackboneSpec spec = read_spec(rd, in_ch, joints);
    ModelGraph<float> graph = build_backbone<float>(spec, in_ch, joints);
    load_into(graph, rd);
    return graph;
}

}  // namespace sparsepose
