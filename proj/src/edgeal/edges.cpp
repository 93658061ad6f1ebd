#include "edgeal/edges.hpp"

#include <algorithm>
#include <cmath>

#include "edgeal/error.hpp"

namespace edgeal {

namespace {

std::size_t clamp_index(std::ptrdiff_t i, std::size_t n) {
  if (i < 0) return 0;
  if (static_cast<std::size_t>(i) >= n) return n - 1;
  return static_cast<std::size_t>(i);
}

}  // namespace

Grid<double> sobel_magnitude(const Image& img) {
  const std::size_t h = img.height();
  const std::size_t w = img.width();
  if (h < 3 || w < 3) fail(ErrorCode::dimension, "sobel_magnitude needs an image of at least 3x3");

  Grid<double> out(h, w);
  for (std::size_t m = 0; m < h; ++m) {
    const std::size_t up = clamp_index(static_cast<std::ptrdiff_t>(m) - 1, h);
    const std::size_t dn = clamp_index(static_cast<std::ptrdiff_t>(m) + 1, h);
    for (std::size_t n = 0; n < w; ++n) {
      const std::size_t lf = clamp_index(static_cast<std::ptrdiff_t>(n) - 1, w);
      const std::size_t rt = clamp_index(static_cast<std::ptrdiff_t>(n) + 1, w);
      // Gx = [[-1,0,1],[-2,0,2],[-1,0,1]], Gy = Gx^T
      const double gx = (img(up, rt) - img(up, lf)) + 2.0 * (img(m, rt) - img(m, lf)) +
                        (img(dn, rt) - img(dn, lf));
      const double gy = (img(dn, lf) - img(up, lf)) + 2.0 * (img(dn, n) - img(up, n)) +
                        (img(dn, rt) - img(up, rt));
      out(m, n) = std::sqrt(gx * gx + gy * gy);
    }
  }
  return out;
}

EdgeMap normalize_edges(const Grid<double>& grad) {
  EdgeMap out(grad.height(), grad.width(), 0.0);
  if (grad.empty()) return out;
  const auto [lo, hi] = std::minmax_element(grad.values().begin(), grad.values().end());
  const double min = *lo;
  const double range = *hi - min;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    out[i] = std::clamp((grad[i] - min) / range, 0.0, 1.0);
  }
  return out;
}

EdgeMap edge_map(const Image& img) { return normalize_edges(sobel_magnitude(img)); }

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) fail(ErrorCode::invalid_argument, "gaussian sigma must be positive");
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
    const double v = std::exp(-static_cast<double>(k * k) / (2.0 * sigma * sigma));
    taps[static_cast<std::size_t>(k + radius)] = v;
    sum += v;
  }
  for (double& v : taps) v /= sum;
  return taps;
}

Image gaussian_blur(const Image& img, double sigma) {
  const auto taps = gaussian_kernel(sigma);
  const auto radius = static_cast<std::ptrdiff_t>(taps.size() / 2);
  const std::size_t h = img.height();
  const std::size_t w = img.width();

  Image rows(h, w);
  for (std::size_t m = 0; m < h; ++m) {
    for (std::size_t n = 0; n < w; ++n) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        acc += taps[static_cast<std::size_t>(k + radius)] *
               img(m, clamp_index(static_cast<std::ptrdiff_t>(n) + k, w));
      }
      rows(m, n) = acc;
    }
  }
  Image out(h, w);
  for (std::size_t m = 0; m < h; ++m) {
    for (std::size_t n = 0; n < w; ++n) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        acc += taps[static_cast<std::size_t>(k + radius)] *
               rows(clamp_index(static_cast<std::ptrdiff_t>(m) + k, h), n);
      }
      out(m, n) = acc;
    }
  }
  return out;
}

}  // namespace edgeal
