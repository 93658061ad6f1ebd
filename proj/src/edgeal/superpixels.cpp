#include "edgeal/superpixels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "edgeal/error.hpp"
#include "edgeal/rng.hpp"

namespace edgeal {

namespace {

constexpr double kMinGain = 1e-12;

// Relabel so ids are 0..k-1 in order of first appearance, dropping unused ids.
std::size_t compact_labels(Grid<std::uint32_t>& labels) {
  std::vector<std::uint32_t> remap;
  constexpr std::uint32_t unset = ~std::uint32_t{0};
  std::uint32_t next = 0;
  for (auto& v : labels.values()) {
    if (v >= remap.size()) remap.resize(v + 1, unset);
    if (remap[v] == unset) remap[v] = next++;
    v = remap[v];
  }
  return next;
}

std::vector<std::uint8_t> quantize(const Image& img) {
  std::vector<std::uint8_t> bins(img.size(), 0);
  if (img.empty()) return bins;
  const auto [lo, hi] = std::minmax_element(img.values().begin(), img.values().end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return bins;
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double v = (img[i] - *lo) / range;
    bins[i] = static_cast<std::uint8_t>(std::min<double>(kHistogramBins - 1, std::floor(v * kHistogramBins)));
  }
  return bins;
}

struct RegionStats {
  std::vector<std::array<std::int64_t, kHistogramBins>> hist;
  std::vector<std::int64_t> size;
  std::vector<std::int64_t> sumsq;

  double energy(std::size_t r) const {
    const double n = static_cast<double>(size[r]);
    return static_cast<double>(sumsq[r]) / (n * n);
  }
};

// Removing the pixel keeps its region 4-connected when all same-region
// 4-neighbours lie on one run of same-region pixels around the 8-ring.
bool removal_keeps_connected(const Grid<std::uint32_t>& labels, std::size_t m, std::size_t n) {
  static constexpr std::array<std::array<int, 2>, 8> ring = {
      {{-1, 0}, {-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}}};
  const std::uint32_t region = labels(m, n);
  std::array<bool, 8> in{};
  for (std::size_t k = 0; k < 8; ++k) {
    const auto mm = static_cast<std::ptrdiff_t>(m) + ring[k][0];
    const auto nn = static_cast<std::ptrdiff_t>(n) + ring[k][1];
    in[k] = mm >= 0 && nn >= 0 && static_cast<std::size_t>(mm) < labels.height() &&
            static_cast<std::size_t>(nn) < labels.width() &&
            labels(static_cast<std::size_t>(mm), static_cast<std::size_t>(nn)) == region;
  }
  // Rotate so the scan starts just after a gap; a full ring cannot happen for
  // a pixel that has a neighbouring foreign region, but handle it anyway.
  std::size_t start = 8;
  for (std::size_t k = 0; k < 8; ++k) {
    if (!in[k]) {
      start = k;
      break;
    }
  }
  if (start == 8) return true;

  int runs_touching = 0;
  bool in_run = false;
  bool run_touches = false;
  for (std::size_t step = 1; step <= 8; ++step) {
    const std::size_t k = (start + step) % 8;
    if (in[k]) {
      if (!in_run) {
        in_run = true;
        run_touches = false;
      }
      if (k % 2 == 0) run_touches = true;  // even slots are 4-neighbours
    } else if (in_run) {
      in_run = false;
      if (run_touches) ++runs_touching;
    }
  }
  if (in_run && run_touches) ++runs_touching;
  return runs_touching <= 1;
}

}  // namespace

SuperpixelMap grid_partition(std::size_t height, std::size_t width, std::size_t target_count) {
  if (height == 0 || width == 0) fail(ErrorCode::dimension, "superpixels: empty image");
  if (target_count < 1 || target_count > height * width) {
    fail(ErrorCode::range, "superpixels: target_count " + std::to_string(target_count) +
                               " outside [1, " + std::to_string(height * width) + "]");
  }
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(target_count))));
  const std::size_t rows = (target_count + cols - 1) / cols;
  const std::size_t last_row_cells = target_count - (rows - 1) * cols;

  SuperpixelMap sp;
  sp.labels = Grid<std::uint32_t>(height, width, 0);
  std::size_t first_id = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t cells = r + 1 == rows ? last_row_cells : cols;
    const std::size_t m0 = r * height / rows;
    const std::size_t m1 = (r + 1) * height / rows;
    for (std::size_t m = m0; m < m1; ++m) {
      for (std::size_t n = 0; n < width; ++n) {
        sp.labels(m, n) = static_cast<std::uint32_t>(first_id + n * cells / width);
      }
    }
    first_id += cells;
  }
  sp.region_count = compact_labels(sp.labels);
  return sp;
}

SuperpixelMap seeds_partition(const Image& img, const SeedsParams& params) {
  SuperpixelMap sp = grid_partition(img.height(), img.width(), params.target_count);
  if (params.iterations == 0 || sp.region_count < 2) return sp;

  const std::size_t h = img.height();
  const std::size_t w = img.width();
  const auto bins = quantize(img);

  RegionStats stats;
  stats.hist.assign(sp.region_count, {});
  stats.size.assign(sp.region_count, 0);
  stats.sumsq.assign(sp.region_count, 0);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const auto r = sp.labels[i];
    ++stats.hist[r][bins[i]];
    ++stats.size[r];
  }
  for (std::size_t r = 0; r < sp.region_count; ++r) {
    for (auto c : stats.hist[r]) stats.sumsq[r] += c * c;
  }

  std::vector<std::size_t> order(img.size());
  for (std::size_t it = 0; it < params.iterations; ++it) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(hash_keys({params.seed, it}));
    rng.shuffle(order);

    for (std::size_t idx : order) {
      const std::size_t m = idx / w;
      const std::size_t n = idx % w;
      const std::uint32_t from = sp.labels[idx];
      if (stats.size[from] <= 1) continue;

      std::array<std::uint32_t, 4> candidates{};
      std::size_t n_candidates = 0;
      auto consider = [&](std::size_t mm, std::size_t nn) {
        const std::uint32_t r = sp.labels(mm, nn);
        if (r == from) return;
        for (std::size_t k = 0; k < n_candidates; ++k) {
          if (candidates[k] == r) return;
        }
        candidates[n_candidates++] = r;
      };
      if (m > 0) consider(m - 1, n);
      if (n + 1 < w) consider(m, n + 1);
      if (m + 1 < h) consider(m + 1, n);
      if (n > 0) consider(m, n - 1);
      if (n_candidates == 0) continue;

      const std::size_t b = bins[idx];
      const std::int64_t from_size = stats.size[from];
      const std::int64_t from_sumsq = stats.sumsq[from] - 2 * stats.hist[from][b] + 1;
      const double from_after = static_cast<double>(from_sumsq) /
                                static_cast<double>((from_size - 1) * (from_size - 1));
      const double from_before = stats.energy(from);

      double best_gain = kMinGain;
      std::uint32_t best = from;
      for (std::size_t k = 0; k < n_candidates; ++k) {
        const std::uint32_t to = candidates[k];
        const std::int64_t to_size = stats.size[to] + 1;
        const std::int64_t to_sumsq = stats.sumsq[to] + 2 * stats.hist[to][b] + 1;
        const double to_after = static_cast<double>(to_sumsq) / static_cast<double>(to_size * to_size);
        const double gain = (from_after + to_after) - (from_before + stats.energy(to));
        if (gain > best_gain || (gain == best_gain && best != from && to < best)) {
          best_gain = gain;
          best = to;
        }
      }
      if (best == from) continue;
      if (!removal_keeps_connected(sp.labels, m, n)) continue;

      stats.sumsq[from] = from_sumsq;
      --stats.hist[from][b];
      --stats.size[from];
      stats.sumsq[best] += 2 * stats.hist[best][b] + 1;
      ++stats.hist[best][b];
      ++stats.size[best];
      sp.labels[idx] = best;
    }
  }
  return sp;
}

std::vector<PixelCoord> region_pixels(const SuperpixelMap& sp, std::size_t region) {
  if (region >= sp.region_count) {
    fail(ErrorCode::range, "region " + std::to_string(region) + " out of range (count " +
                               std::to_string(sp.region_count) + ")");
  }
  std::vector<PixelCoord> out;
  for (std::size_t m = 0; m < sp.labels.height(); ++m) {
    for (std::size_t n = 0; n < sp.labels.width(); ++n) {
      if (sp.labels(m, n) == region) out.emplace_back(m, n);
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> region_index(const SuperpixelMap& sp) {
  std::vector<std::vector<std::size_t>> out(sp.region_count);
  for (std::size_t i = 0; i < sp.labels.size(); ++i) out[sp.labels[i]].push_back(i);
  return out;
}

void validate_superpixels(const SuperpixelMap& sp) {
  const std::size_t h = sp.labels.height();
  const std::size_t w = sp.labels.width();
  std::vector<std::size_t> count(sp.region_count, 0);
  for (auto v : sp.labels.values()) {
    if (v >= sp.region_count) fail(ErrorCode::range, "superpixel id out of range");
    ++count[v];
  }
  for (std::size_t r = 0; r < sp.region_count; ++r) {
    if (count[r] == 0) fail(ErrorCode::state, "superpixel region " + std::to_string(r) + " is empty");
  }
  std::vector<bool> seen(sp.labels.size(), false);
  std::vector<bool> region_done(sp.region_count, false);
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < sp.labels.size(); ++start) {
    const auto r = sp.labels[start];
    if (seen[start]) continue;
    if (region_done[r]) fail(ErrorCode::state, "superpixel region " + std::to_string(r) + " is not 4-connected");
    region_done[r] = true;
    seen[start] = true;
    stack.assign(1, start);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const std::size_t m = i / w;
      const std::size_t n = i % w;
      auto visit = [&](std::size_t j) {
        if (!seen[j] && sp.labels[j] == r) {
          seen[j] = true;
          stack.push_back(j);
        }
      };
      if (m > 0) visit(i - w);
      if (m + 1 < h) visit(i + w);
      if (n > 0) visit(i - 1);
      if (n + 1 < w) visit(i + 1);
    }
  }
}

std::filesystem::path high_byte_path(const std::filesystem::path& path) {
  auto out = path;
  out.replace_extension();
  out += ".hi.ealt";
  return out;
}

void write_superpixel_map(const std::filesystem::path& path, const SuperpixelMap& sp) {
  if (sp.region_count > 65536) fail(ErrorCode::range, "superpixel maps support at most 65536 regions");
  const std::vector<std::uint32_t> dims = {static_cast<std::uint32_t>(sp.labels.height()),
                                           static_cast<std::uint32_t>(sp.labels.width())};
  std::vector<std::uint8_t> low(sp.labels.size());
  for (std::size_t i = 0; i < low.size(); ++i) low[i] = static_cast<std::uint8_t>(sp.labels[i] & 0xFF);
  write_tensor(path, Tensor::from_u8(dims, std::move(low)));

  const auto hi_path = high_byte_path(path);
  if (sp.region_count <= 256) {
    std::error_code ec;
    std::filesystem::remove(hi_path, ec);
    return;
  }
  std::vector<std::uint8_t> high(sp.labels.size());
  for (std::size_t i = 0; i < high.size(); ++i) high[i] = static_cast<std::uint8_t>(sp.labels[i] >> 8);
  write_tensor(hi_path, Tensor::from_u8(dims, std::move(high)));
}

SuperpixelMap read_superpixel_map(const std::filesystem::path& path) {
  const Tensor low = read_tensor(path);
  if (low.rank() != 2 || low.dtype() != DType::u8) {
    fail(ErrorCode::format, path.string() + ": superpixel map must be a rank-2 u8 tensor");
  }
  SuperpixelMap sp;
  sp.labels = Grid<std::uint32_t>(low.dim(0), low.dim(1), 0);
  auto lo = low.u8();
  for (std::size_t i = 0; i < lo.size(); ++i) sp.labels[i] = lo[i];

  const auto hi_path = high_byte_path(path);
  if (std::filesystem::exists(hi_path)) {
    const Tensor high = read_tensor(hi_path);
    if (high.dtype() != DType::u8 || std::vector<std::uint32_t>(high.dims().begin(), high.dims().end()) !=
                                         std::vector<std::uint32_t>(low.dims().begin(), low.dims().end())) {
      fail(ErrorCode::dimension, hi_path.string() + ": high-byte file does not match " + path.string());
    }
    auto hi = high.u8();
    for (std::size_t i = 0; i < hi.size(); ++i) sp.labels[i] |= static_cast<std::uint32_t>(hi[i]) << 8;
  }
  std::uint32_t max_id = 0;
  for (auto v : sp.labels.values()) max_id = std::max(max_id, v);
  sp.region_count = max_id + 1;
  validate_superpixels(sp);
  return sp;
}

}  // namespace edgeal
