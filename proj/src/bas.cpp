#include "tncirc/bas.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "tncirc/rng.hpp"

namespace tncirc {

namespace {

// A pattern is one bit per column (bars) or row (stripes); bit k = 1 paints
// column/row k white (pixel value 1).
using Pattern = std::vector<std::uint8_t>;

std::vector<double> bars_pixels(int side, const Pattern& pattern) {
    std::vector<double> px(static_cast<std::size_t>(side) * side);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x)
            px[static_cast<std::size_t>(y) * side + x] = pattern[x] ? 1.0 : 0.0;
    return px;
}

std::vector<double> stripes_pixels(int side, const Pattern& pattern) {
    std::vector<double> px(static_cast<std::size_t>(side) * side);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x)
            px[static_cast<std::size_t>(y) * side + x] = pattern[y] ? 1.0 : 0.0;
    return px;
}

LabeledDataset assemble(int side, const std::vector<Pattern>& bar_patterns,
                        const std::vector<Pattern>& stripe_patterns,
                        std::uint64_t seed) {
    LabeledDataset ds;
    for (const Pattern& p : bar_patterns) ds.items.push_back({bars_pixels(side, p), 0});
    for (const Pattern& p : stripe_patterns)
        ds.items.push_back({stripes_pixels(side, p), 1});
    stratified_split(ds, seed);
    return ds;
}

bool uniform_pattern(const Pattern& p) {
    return std::all_of(p.begin(), p.end(), [](std::uint8_t b) { return b == 0; }) ||
           std::all_of(p.begin(), p.end(), [](std::uint8_t b) { return b == 1; });
}

}  // namespace

LabeledDataset generate_bas(int side, std::uint64_t seed) {
    if (side < 2) throw std::invalid_argument("side length must be >= 2");
    if (side > 20)
        throw std::invalid_argument(
            "full enumeration beyond side 20 is impractical; use sample_bas");
    const std::uint64_t full = (std::uint64_t{1} << side) - 1;
    std::vector<Pattern> patterns;
    for (std::uint64_t bits = 1; bits < full; ++bits) {
        Pattern p(side);
        for (int k = 0; k < side; ++k) p[k] = (bits >> k) & 1ull;
        patterns.push_back(std::move(p));
    }
    return assemble(side, patterns, patterns, seed);
}

LabeledDataset sample_bas(int side, int count, std::uint64_t seed) {
    if (side < 2) throw std::invalid_argument("side must be >= 2");
    if (count < 4 || count % 2 != 0)
        throw std::invalid_argument("count must be even and >= 4");
    if (side <= 20) {
        // 2^side - 2 usable patterns; guard exhaustion for small sides.
        const std::uint64_t available = (std::uint64_t{1} << side) - 2;
        if (static_cast<std::uint64_t>(count / 2) > available)
            throw std::invalid_argument(
                fmt::format("cannot draw {} distinct patterns per class from {}",
                            count / 2, available));
    }

    Rng rng(seed);
    auto draw = [&]() {
        std::set<Pattern> chosen;
        while (static_cast<int>(chosen.size()) < count / 2) {
            Pattern p(side);
            for (auto& bit : p) bit = rng.uniform_int(2) ? 1 : 0;
            if (!uniform_pattern(p)) chosen.insert(std::move(p));
        }
        return std::vector<Pattern>(chosen.begin(), chosen.end());
    };
    const auto bars = draw();
    const auto stripes = draw();
    return assemble(side, bars, stripes, rng.raw());
}

GrayImage bas_image(const LabeledItem& item, int side) {
    if (static_cast<int>(item.pixels.size()) != side * side)
        throw std::invalid_argument("pixel count does not match the side length");
    GrayImage img(side, side);
    img.pixels = item.pixels;
    return img;
}

}  // namespace tncirc
