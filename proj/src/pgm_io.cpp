#include "sparsepose/pgm_io.hpp"

#include <fstream>
#include <sstream>

namespace sparsepose {

namespace {

// Reads one whitespace/comment-delimited PGM header token.
std::string next_token(std::istream& is) {
    std::string tok;
    int ch;
    while ((ch = is.get()) != EOF) {
        if (ch == '#') {
            while ((ch = is.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(ch));
    }
    return tok;
}

}  // namespace

void write_pgm(std::ostream& os, const GrayImage& img) {
    os << "P5\n" << img.width << " " << img.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(img.pixels.data()),
             static_cast<std::streamsize>(img.pixels.size()));
}

GrayImage read_pgm(std::istream& is) {
    const std::string magic = next_token(is);
    if (magic != "P5") throw data_error("pgm: expected P5 magic, got '" + magic + "'");
    const std::string w = next_token(is), h = next_token(is), maxval = next_token(is);
    if (w.empty() || h.empty() || maxval.empty()) throw data_error("pgm: truncated header");
    const int width = std::stoi(w), height = std::stoi(h);
    if (width <= 0 || height <= 0 || width > 1 << 15 || height > 1 << 15)
        throw data_error("pgm: bad dimensions");
    if (std::stoi(maxval) != 255) throw data_error("pgm: only 8-bit maxval 255 supported");
    GrayImage img(height, width);
    is.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (is.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw data_error("pgm: truncated pixel data");
    return img;
}

void write_pgm_stream(const std::string& path, const std::vector<GrayImage>& frames) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw data_error("pgm: cannot open '" + path + "' for writing");
    for (const auto& f : frames) write_pgm(os, f);
}

std::vector<GrayImage> read_pgm_stream(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("pgm: cannot open '" + path + "'");
    std::vector<GrayImage> frames;
    while (true) {
        is.peek();
        if (is.eof()) break;
        frames.push_back(read_pgm(is));
    }
    if (frames.empty()) throw data_error("pgm: no frames in '" + path + "'");
    return frames;
}

void write_raw_video(const std::string& path, const GraySequence& seq) {
    if (seq.frames.empty()) throw data_error("raw video: no frames");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw data_error("raw video: cannot open '" + path + "'");
    for (const auto& f : seq.frames)
        os.write(reinterpret_cast<const char*>(f.pixels.data()),
                 static_cast<std::streamsize>(f.pixels.size()));
    std::ofstream hdr(path + ".hdr");
    hdr << "width=" << seq.frames[0].width << " height=" << seq.frames[0].height
        << " fps=" << seq.fps << " frames=" << seq.frames.size() << "\n";
}

GraySequence read_raw_video(const std::string& path) {
    std::ifstream hdr(path + ".hdr");
    if (!hdr) throw data_error("raw video: missing sidecar '" + path + ".hdr'");
    int width = 0, height = 0, fps = 0, count = 0;
    std::string tok;
    while (hdr >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq);
        const int value = std::stoi(tok.substr(eq + 1));
        if (key == "width") width = value;
        else if (key == "height") height = value;
        else if (key == "fps") fps = value;
        else if (key == "frames") count = value;
    }
    if (width <= 0 || height <= 0 || fps <= 0 || count <= 0)
        throw data_error("raw video: incomplete sidecar header");
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("raw video: cannot open '" + path + "'");
    GraySequence seq;
    seq.fps = fps;
    for (int i = 0; i < count; ++i) {
        GrayImage img(height, width);
        is.read(reinterpret_cast<char*>(img.pixels.data()),
                static_cast<std::streamsize>(img.pixels.size()));
        if (is.gcount() != static_cast<std::streamsize>(img.pixels.size()))
            throw data_error("raw video: truncated frame data");
        seq.frames.push_back(std::move(img));
    }
    return seq;
}

GraySequence load_gray_video(const std::string& path, int default_fps) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("cannot open gray video '" + path + "'");
    char magic[2] = {0, 0};
    is.read(magic, 2);
    is.close();
    if (magic[0] == 'P' && magic[1] == '5') {
        GraySequence seq;
        seq.frames = read_pgm_stream(path);
        seq.fps = default_fps;
        return seq;
    }
    return read_raw_video(path);
}

}  // namespace sparsepose
