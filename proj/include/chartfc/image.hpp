#pragma once
// Minimal RGB8 raster with PPM (P6) encode/decode. PPM is the lossless
// raster format used for chart images: trivially byte-deterministic and
// decodable without external libraries.

#include <cstdint>
#include <string>
#include <vector>

namespace chartfc {

struct Rgb {
    uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

class Image {
public:
    Image() = default;
    Image(int width, int height, Rgb fill);

    int width() const { return width_; }
    int height() const { return height_; }

    Rgb get(int x, int y) const { return pixels_[static_cast<size_t>(y) * width_ + x]; }
    void set(int x, int y, Rgb c) {
        if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
        pixels_[static_cast<size_t>(y) * width_ + x] = c;
    }

    void fill_rect(int x, int y, int w, int h, Rgb c);

    // P6 binary encoding, maxval 255.
    std::vector<uint8_t> encode_ppm() const;
    static Image decode_ppm(const std::vector<uint8_t>& bytes);

    // Box-filter downsample to out_w x out_h, luminance only, values in [0,1].
    std::vector<double> grayscale_downsample(int out_w, int out_h) const;

    bool operator==(const Image&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<Rgb> pixels_;
};

std::vector<uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<uint8_t>& bytes);
std::string read_file_text(const std::string& path);
void write_file_text(const std::string& path, const std::string& text);

}  // namespace chartfc
