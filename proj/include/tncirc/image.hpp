#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace tncirc {

// Grayscale raster with row-major pixels in [0, 1] (0 = black).
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    GrayImage() = default;
    GrayImage(int width, int height, double fill = 0.0);

    double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
    std::size_t size() const { return pixels.size(); }

    void clamp();  // force every pixel into [0, 1]
};

// Reads a P2 (ASCII) or P5 (binary) PGM with maxval <= 65535, scaling to
// [0, 1]. Throws std::runtime_error on malformed headers or truncated data.
GrayImage load_pgm(const std::string& path);

// Writes an 8-bit PGM; `binary` selects P5 over P2. Values are quantized to
// round(p * 255), so save-then-load is lossless for already-quantized data.
void save_pgm(const GrayImage& img, const std::string& path, bool binary = true);

// Largest centered square crop, then bilinear resize to side x side.
// Bilinear interpolation maps pixel centers so that constant images stay
// constant. Requires a source of at least 2x2 and side >= 1.
GrayImage center_crop_resize(const GrayImage& img, int side);

struct WindowView {
    int x = 0;  // offset of the window's top-left corner in the source
    int y = 0;
    GrayImage view;
};

// All window x window sub-images at offsets that are multiples of `stride`
// and fit entirely inside the image; row-major order (left-to-right, then
// top-to-bottom). Throws when the window exceeds either dimension.
std::vector<WindowView> sliding_windows(const GrayImage& img, int window,
                                        int stride);

// RGB raster used for highlight rendering; 8-bit channels.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::array<std::uint8_t, 3>> pixels;

    RgbImage() = default;
    RgbImage(int width, int height);

    std::array<std::uint8_t, 3>& at(int x, int y) {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
};

// Binary P6 PPM output.
void save_ppm(const RgbImage& img, const std::string& path);

}  // namespace tncirc
