#include "tncirc/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

namespace tncirc {

GrayImage::GrayImage(int width_in, int height_in, double fill)
    : width(width_in), height(height_in) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("image dimensions must be >= 1");
    pixels.assign(static_cast<std::size_t>(width) * height, fill);
}

void GrayImage::clamp() {
    for (double& p : pixels) p = std::min(1.0, std::max(0.0, p));
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

int header_int(std::istream& in, const char* what) {
    const std::string tok = next_token(in);
    if (tok.empty())
        throw std::runtime_error(fmt::format("missing {} in image header", what));
    try {
        std::size_t used = 0;
        const long v = std::stol(tok, &used);
        if (used != tok.size() || v < 0) throw std::invalid_argument(tok);
        return static_cast<int>(v);
    } catch (const std::exception&) {
        throw std::runtime_error(
            fmt::format("'{}' is not a valid {} in image header", tok, what));
    }
}

}  // namespace

GrayImage load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path));

    const std::string magic = next_token(in);
    if (magic != "P2" && magic != "P5")
        throw std::runtime_error(
            fmt::format("'{}' is not a P2/P5 PGM (magic '{}')", path, magic));
    const int width = header_int(in, "width");
    const int height = header_int(in, "height");
    const int maxval = header_int(in, "maxval");
    if (width < 1 || height < 1)
        throw std::runtime_error(fmt::format("'{}' has empty dimensions", path));
    if (maxval < 1 || maxval > 65535)
        throw std::runtime_error(
            fmt::format("'{}' has unsupported maxval {}", path, maxval));

    GrayImage img(width, height);
    const std::size_t count = img.size();

    if (magic == "P2") {
        for (std::size_t i = 0; i < count; ++i) {
            const std::string tok = next_token(in);
            if (tok.empty())
                throw std::runtime_error(fmt::format("'{}' is truncated", path));
            long v = 0;
            try {
                std::size_t used = 0;
                v = std::stol(tok, &used);
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw std::runtime_error(
                    fmt::format("'{}' has a non-numeric pixel '{}'", path, tok));
            }
            if (v < 0 || v > maxval)
                throw std::runtime_error(
                    fmt::format("'{}' has pixel {} above maxval {}", path, v, maxval));
            img.pixels[i] = static_cast<double>(v) / maxval;
        }
    } else {
        // P5: header ends with exactly one whitespace byte before the raster,
        // already consumed by tokenization
        const int bytes = maxval > 255 ? 2 : 1;
        std::vector<unsigned char> raw(count * bytes);
        in.read(reinterpret_cast<char*>(raw.data()),
                static_cast<std::streamsize>(raw.size()));
        if (static_cast<std::size_t>(in.gcount()) != raw.size())
            throw std::runtime_error(fmt::format("'{}' is truncated", path));
        for (std::size_t i = 0; i < count; ++i) {
            const int v = bytes == 1 ? raw[i] : (raw[2 * i] << 8) | raw[2 * i + 1];
            if (v > maxval)
                throw std::runtime_error(
                    fmt::format("'{}' has pixel {} above maxval {}", path, v, maxval));
            img.pixels[i] = static_cast<double>(v) / maxval;
        }
    }
    return img;
}

void save_pgm(const GrayImage& img, const std::string& path, bool binary) {
    if (img.width < 1 || img.height < 1)
        throw std::invalid_argument("cannot save an empty image");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path));

    out << (binary ? "P5" : "P2") << "\n"
        << img.width << " " << img.height << "\n255\n";
    if (binary) {
        std::vector<unsigned char> raw(img.size());
        for (std::size_t i = 0; i < img.size(); ++i)
            raw[i] = static_cast<unsigned char>(std::lround(
                std::min(1.0, std::max(0.0, img.pixels[i])) * 255.0));
        out.write(reinterpret_cast<const char*>(raw.data()),
                  static_cast<std::streamsize>(raw.size()));
    } else {
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x) {
                out << std::lround(std::min(1.0, std::max(0.0, img.at(x, y))) * 255.0);
                out << (x + 1 == img.width ? '\n' : ' ');
            }
        }
    }
    if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path));
}

GrayImage center_crop_resize(const GrayImage& img, int side) {
    if (img.width < 2 || img.height < 2)
        throw std::invalid_argument("source image must be at least 2x2");
    if (side < 1) throw std::invalid_argument("target side must be >= 1");

    const int crop = std::min(img.width, img.height);
    const int x0 = (img.width - crop) / 2;
    const int y0 = (img.height - crop) / 2;

    GrayImage out(side, side);
    const double scale = static_cast<double>(crop) / side;
    for (int y = 0; y < side; ++y) {
        // sample at pixel centers: dst center (y+0.5) maps to src coordinate
        const double sy = (y + 0.5) * scale - 0.5;
        const double cy = std::min(std::max(sy, 0.0), crop - 1.0);
        const int y1 = static_cast<int>(cy);
        const int y2 = std::min(y1 + 1, crop - 1);
        const double fy = cy - y1;
        for (int x = 0; x < side; ++x) {
            const double sx = (x + 0.5) * scale - 0.5;
            const double cx = std::min(std::max(sx, 0.0), crop - 1.0);
            const int x1 = static_cast<int>(cx);
            const int x2 = std::min(x1 + 1, crop - 1);
            const double fx = cx - x1;
            const double top = img.at(x0 + x1, y0 + y1) * (1 - fx) +
                               img.at(x0 + x2, y0 + y1) * fx;
            const double bottom = img.at(x0 + x1, y0 + y2) * (1 - fx) +
                                  img.at(x0 + x2, y0 + y2) * fx;
            out.at(x, y) = top * (1 - fy) + bottom * fy;
        }
    }
    return out;
}

std::vector<WindowView> sliding_windows(const GrayImage& img, int window,
                                        int stride) {
    if (window < 1 || stride < 1)
        throw std::invalid_argument("window and stride must be >= 1");
    if (window > img.width || window > img.height)
        throw std::invalid_argument(
            fmt::format("{}x{} window does not fit a {}x{} image", window, window,
                        img.width, img.height));
    std::vector<WindowView> out;
    for (int y = 0; y + window <= img.height; y += stride) {
        for (int x = 0; x + window <= img.width; x += stride) {
            WindowView w;
            w.x = x;
            w.y = y;
            w.view = GrayImage(window, window);
            for (int dy = 0; dy < window; ++dy)
                for (int dx = 0; dx < window; ++dx)
                    w.view.at(dx, dy) = img.at(x + dx, y + dy);
            out.push_back(std::move(w));
        }
    }
    return out;
}

RgbImage::RgbImage(int width_in, int height_in) : width(width_in), height(height_in) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("image dimensions must be >= 1");
    pixels.assign(static_cast<std::size_t>(width) * height, {0, 0, 0});
}

void save_ppm(const RgbImage& img, const std::string& path) {
    if (img.width < 1 || img.height < 1)
        throw std::invalid_argument("cannot save an empty image");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path));
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    for (const auto& px : img.pixels)
        out.write(reinterpret_cast<const char*>(px.data()), 3);
    if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path));
}

}  // namespace tncirc
