#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "edgeal/maps.hpp"

namespace edgeal {

struct SuperpixelMap {
  Grid<std::uint32_t> labels;
  std::size_t region_count = 0;
};

struct SeedsParams {
  std::size_t target_count = 64;
  std::size_t iterations = 10;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kHistogramBins = 16;

// SEEDS-style oversegmentation with pixel-level boundary moves.
//
// Starts from a grid of ceil(sqrt(n)) columns and ceil(n / columns) rows, the
// last row holding the remaining cells, so exactly n rectangular regions are
// produced (fewer only when the image is too small to give every cell a
// pixel). Each sweep then visits pixels in a seed-keyed random order and
// moves a boundary pixel to the 4-neighbouring region that yields the largest
// strict increase of Σ_bins (count/size)² summed over the two regions. A
// move is rejected if it would empty or disconnect the source region.
SuperpixelMap seeds_partition(const Image& img, const SeedsParams& params);

// The initial grid only (zero refinement sweeps).
SuperpixelMap grid_partition(std::size_t height, std::size_t width, std::size_t target_count);

using PixelCoord = std::pair<std::size_t, std::size_t>;

// Pixels of region r in row-major order.
std::vector<PixelCoord> region_pixels(const SuperpixelMap& sp, std::size_t region);

// Pixel indices of every region, row-major within each region.
std::vector<std::vector<std::size_t>> region_index(const SuperpixelMap& sp);

// Throws if the map violates the partition invariants (id range, non-empty
// regions, 4-connectivity).
void validate_superpixels(const SuperpixelMap& sp);

// Maps with up to 256 regions are stored as one rank-2 u8 EALT file. Larger
// maps (up to 65536 regions) add a sibling "<stem>.hi.ealt" holding the high
// byte of each id.
void write_superpixel_map(const std::filesystem::path& path, const SuperpixelMap& sp);
SuperpixelMap read_superpixel_map(const std::filesystem::path& path);
std::filesystem::path high_byte_path(const std::filesystem::path& path);

}  // namespace edgeal
