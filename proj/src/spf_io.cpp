#include "sparsepose/spf_io.hpp"

#include "sparsepose/crc32.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace sparsepose {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

struct Reader {
    const std::uint8_t* p;
    std::size_t left;

    std::uint8_t u8() {
        if (left < 1) throw data_error("spf: truncated file");
        --left;
        return *p++;
    }
    std::uint16_t u16() {
        if (left < 2) throw data_error("spf: truncated file");
        std::uint16_t v = static_cast<std::uint16_t>(p[0] | (p[1] << 8));
        p += 2;
        left -= 2;
        return v;
    }
    std::uint32_t u32() {
        if (left < 4) throw data_error("spf: truncated file");
        std::uint32_t v = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                          (static_cast<std::uint32_t>(p[2]) << 16) |
                          (static_cast<std::uint32_t>(p[3]) << 24);
        p += 4;
        left -= 4;
        return v;
    }
};

std::uint8_t mv_byte(float v) {
    const int q = std::min(127, std::max(-128, static_cast<int>(std::nearbyint(v))));
    return static_cast<std::uint8_t>(q + 128);
}

}  // namespace

std::vector<std::uint8_t> encode_spf(const std::vector<SparseFrame>& frames, int fps) {
    if (frames.empty()) throw data_error("spf: refusing to write an empty clip");
    const int w = frames[0].edge.width(), h = frames[0].edge.height();
    if (w > 0xFFFF || h > 0xFFFF || fps <= 0 || fps > 0xFFFF)
        throw data_error("spf: header field out of range");

    std::vector<std::uint8_t> out;
    out.insert(out.end(), {'S', 'P', 'F', '1'});
    put_u16(out, static_cast<std::uint16_t>(w));
    put_u16(out, static_cast<std::uint16_t>(h));
    put_u16(out, static_cast<std::uint16_t>(fps));
    put_u32(out, static_cast<std::uint32_t>(frames.size()));
    out.push_back(0b111);

    for (const auto& f : frames) {
        if (f.edge.width() != w || f.edge.height() != h)
            throw data_error("spf: inconsistent frame resolution");
        // Union of edge and MV active sites, canonical order.
        std::vector<Coord> sites = f.edge.sites();
        for (const Coord& s : f.mv.sites())
            if (!f.edge.active(s)) sites.push_back(s);
        std::sort(sites.begin(), sites.end());

        put_u32(out, static_cast<std::uint32_t>(sites.size()));
        for (const Coord& s : sites) {
            put_u16(out, static_cast<std::uint16_t>(s.row));
            put_u16(out, static_cast<std::uint16_t>(s.col));
            const auto e = f.edge.find(s);
            const auto m = f.mv.find(s);
            out.push_back(e >= 0 ? static_cast<std::uint8_t>(f.edge.values()(e, 0)) : 0);
            out.push_back(m >= 0 ? mv_byte(f.mv.values()(m, 0)) : 128);
            out.push_back(m >= 0 ? mv_byte(f.mv.values()(m, 1)) : 128);
        }
    }
    put_u32(out, crc32(out.data(), out.size()));
    return out;
}

void write_spf(const std::string& path, const std::vector<SparseFrame>& frames, int fps) {
    const auto bytes = encode_spf(frames, fps);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw data_error("spf: cannot open '" + path + "' for writing");
    os.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
    if (!os) throw data_error("spf: write failed for '" + path + "'");
}

SpfContents decode_spf(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4 + 11 + 4) throw data_error("spf: file too small");
    const std::uint32_t stored =
        static_cast<std::uint32_t>(bytes[bytes.size() - 4]) |
        (static_cast<std::uint32_t>(bytes[bytes.size() - 3]) << 8) |
        (static_cast<std::uint32_t>(bytes[bytes.size() - 2]) << 16) |
        (static_cast<std::uint32_t>(bytes[bytes.size() - 1]) << 24);
    if (crc32(bytes.data(), bytes.size() - 4) != stored)
        throw data_error("spf: checksum mismatch");

    Reader rd{bytes.data(), bytes.size() - 4};
    if (rd.u8() != 'S' || rd.u8() != 'P' || rd.u8() != 'F' || rd.u8() != '1')
        throw data_error("spf: bad magic");
    SpfContents out;
    out.width = rd.u16();
    out.height = rd.u16();
    out.fps = rd.u16();
    const std::uint32_t frame_count = rd.u32();
    if (rd.u8() != 0b111) throw data_error("spf: unsupported channel mask");
    if (out.width == 0 || out.height == 0 || out.fps == 0)
        throw data_error("spf: zero header field");
    if (static_cast<std::size_t>(frame_count) * 4 > rd.left)
        throw data_error("spf: frame count exceeds file size");

    for (std::uint32_t fi = 0; fi < frame_count; ++fi) {
        const std::uint32_t count = rd.u32();
        if (static_cast<std::size_t>(count) * 7 > rd.left)
            throw data_error("spf: record count exceeds file size");
        std::vector<Coord> edge_sites, mv_sites;
        std::vector<float> edge_vals;
        std::vector<std::pair<float, float>> mv_vals;
        Coord last{-1, -1};
        for (std::uint32_t i = 0; i < count; ++i) {
            const Coord s{rd.u16(), rd.u16()};
            if (s.row >= out.height || s.col >= out.width)
                throw data_error("spf: site out of bounds");
            if (!(last < s)) throw data_error("spf: records out of canonical order");
            last = s;
            const std::uint8_t e = rd.u8();
            const int mx = static_cast<int>(rd.u8()) - 128;
            const int my = static_cast<int>(rd.u8()) - 128;
            if (e == 0 && mx == 0 && my == 0)
                throw data_error("spf: all-zero record");
            if (e > 0) {
                edge_sites.push_back(s);
                edge_vals.push_back(static_cast<float>(e));
            }
            if (mx != 0 || my != 0) {
                mv_sites.push_back(s);
                mv_vals.emplace_back(static_cast<float>(mx), static_cast<float>(my));
            }
        }
        SparseTensor2D<float>::ValueMatrix ev(static_cast<Eigen::Index>(edge_vals.size()), 1);
        for (std::size_t i = 0; i < edge_vals.size(); ++i)
            ev(static_cast<Eigen::Index>(i), 0) = edge_vals[i];
        SparseTensor2D<float>::ValueMatrix mv(static_cast<Eigen::Index>(mv_vals.size()), 2);
        for (std::size_t i = 0; i < mv_vals.size(); ++i) {
            mv(static_cast<Eigen::Index>(i), 0) = mv_vals[i].first;
            mv(static_cast<Eigen::Index>(i), 1) = mv_vals[i].second;
        }
        out.frames.push_back(make_sparse_frame(
            static_cast<int>(fi),
            SparseTensor2D<float>::from_sites(out.height, out.width, 1,
                                              std::move(edge_sites), std::move(ev)),
            SparseTensor2D<float>::from_sites(out.height, out.width, 2,
                                              std::move(mv_sites), std::move(mv))));
    }
    if (rd.left != 0) throw data_error("spf: trailing bytes after last frame");
    return out;
}

SpfContents read_spf(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("spf: cannot open '" + path + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                    std::istreambuf_iterator<char>());
    return decode_spf(bytes);
}

}  // namespace sparsepose
