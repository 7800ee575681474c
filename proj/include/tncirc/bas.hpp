#pragma once

#include <cstdint>

#include "tncirc/image.hpp"
#include "tncirc/mlpipe.hpp"

namespace tncirc {

// All n x n bars-and-stripes images: column patterns with constant columns
// (label 0) and row patterns with constant rows (label 1), excluding the
// two uniform images shared by both classes. 2^{n+1} - 4 images total,
// split into stratified, seed-shuffled equal train/test halves.
// Requires n >= 2.
LabeledDataset generate_bas(int side, std::uint64_t seed);

// Random subset variant for sides where full enumeration is impractical
// (2^{n+1} - 4 images at n = 16): draws `count` distinct images, half bars
// and half stripes, with the same stratified split. Requires count even,
// >= 4, and at most the number of available images per class.
LabeledDataset sample_bas(int side, int count, std::uint64_t seed);

// The pixel rows of one item reshaped to side x side (helper for export).
GrayImage bas_image(const LabeledItem& item, int side);

}  // namespace tncirc
