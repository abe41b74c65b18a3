#include "chartfc/image.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "chartfc/errors.hpp"

namespace chartfc {

Image::Image(int width, int height, Rgb fill)
    : width_(width), height_(height), pixels_(static_cast<size_t>(width) * height, fill) {
    if (width <= 0 || height <= 0) throw RuntimeError("image dimensions must be positive");
}

void Image::fill_rect(int x, int y, int w, int h, Rgb c) {
    int x0 = std::max(0, x);
    int y0 = std::max(0, y);
    int x1 = std::min(width_, x + w);
    int y1 = std::min(height_, y + h);
    for (int yy = y0; yy < y1; ++yy)
        for (int xx = x0; xx < x1; ++xx) pixels_[static_cast<size_t>(yy) * width_ + xx] = c;
}

std::vector<uint8_t> Image::encode_ppm() const {
    char header[64];
    int n = std::snprintf(header, sizeof(header), "P6\n%d %d\n255\n", width_, height_);
    std::vector<uint8_t> out;
    out.reserve(static_cast<size_t>(n) + pixels_.size() * 3);
    out.insert(out.end(), header, header + n);
    for (const Rgb& p : pixels_) {
        out.push_back(p.r);
        out.push_back(p.g);
        out.push_back(p.b);
    }
    return out;
}

namespace {

// Reads one whitespace-delimited PPM header token, skipping '#' comments.
std::string next_token(const std::vector<uint8_t>& bytes, size_t& pos) {
    while (pos < bytes.size()) {
        char c = static_cast<char>(bytes[pos]);
        if (c == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            ++pos;
        } else {
            break;
        }
    }
    std::string tok;
    while (pos < bytes.size()) {
        char c = static_cast<char>(bytes[pos]);
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '#') break;
        tok.push_back(c);
        ++pos;
    }
    return tok;
}

}  // namespace

Image Image::decode_ppm(const std::vector<uint8_t>& bytes) {
    size_t pos = 0;
    if (next_token(bytes, pos) != "P6") throw DecodeFailure("not a P6 ppm");
    int w = 0, h = 0, maxval = 0;
    try {
        w = std::stoi(next_token(bytes, pos));
        h = std::stoi(next_token(bytes, pos));
        maxval = std::stoi(next_token(bytes, pos));
    } catch (const std::exception&) {
        throw DecodeFailure("bad ppm header");
    }
    if (w <= 0 || h <= 0 || maxval != 255) throw DecodeFailure("unsupported ppm header");
    ++pos;  // single whitespace after maxval
    size_t need = static_cast<size_t>(w) * h * 3;
    if (bytes.size() - pos < need) throw DecodeFailure("truncated ppm payload");
    Image img(w, h, Rgb{});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            img.set(x, y, Rgb{bytes[pos], bytes[pos + 1], bytes[pos + 2]});
            pos += 3;
        }
    return img;
}

std::vector<double> Image::grayscale_downsample(int out_w, int out_h) const {
    std::vector<double> out(static_cast<size_t>(out_w) * out_h, 0.0);
    for (int oy = 0; oy < out_h; ++oy) {
        int y0 = oy * height_ / out_h;
        int y1 = std::max(y0 + 1, (oy + 1) * height_ / out_h);
        for (int ox = 0; ox < out_w; ++ox) {
            int x0 = ox * width_ / out_w;
            int x1 = std::max(x0 + 1, (ox + 1) * width_ / out_w);
            double acc = 0.0;
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) {
                    Rgb p = get(x, y);
                    acc += 0.299 * p.r + 0.587 * p.g + 0.114 * p.b;
                }
            out[static_cast<size_t>(oy) * out_w + ox] =
                acc / (255.0 * (y1 - y0) * (x1 - x0));
        }
    }
    return out;
}

std::vector<uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open for read: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return bytes;
}

void write_file_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoFailure("cannot open for write: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoFailure("write failed: " + path);
}

std::string read_file_text(const std::string& path) {
    auto bytes = read_file_bytes(path);
    return std::string(bytes.begin(), bytes.end());
}

void write_file_text(const std::string& path, const std::string& text) {
    write_file_bytes(path, std::vector<uint8_t>(text.begin(), text.end()));
}

}  // namespace chartfc
