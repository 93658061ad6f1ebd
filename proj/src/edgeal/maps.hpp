#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "edgeal/tensor.hpp"

namespace edgeal {

// Dense H×W array, row-major. Images, edge maps and score maps are
// Grid<double>; masks and class-id maps are Grid<std::uint8_t>.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t height, std::size_t width, T fill = T{})
      : height_(height), width_(width), values_(height * width, fill) {}
  Grid(std::size_t height, std::size_t width, std::vector<T> values);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  T& operator()(std::size_t m, std::size_t n) noexcept { return values_[m * width_ + n]; }
  const T& operator()(std::size_t m, std::size_t n) const noexcept { return values_[m * width_ + n]; }
  T& operator[](std::size_t i) noexcept { return values_[i]; }
  const T& operator[](std::size_t i) const noexcept { return values_[i]; }

  std::span<T> values() & noexcept { return values_; }
  std::span<const T> values() const& noexcept { return values_; }
  // A temporary hands over its storage so range-for over it stays valid.
  std::vector<T> values() && noexcept { return std::move(values_); }

  bool same_shape(std::size_t h, std::size_t w) const noexcept { return h == height_ && w == width_; }
  template <class U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return height_ == other.height() && width_ == other.width();
  }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<T> values_;
};

using Image = Grid<double>;
using EdgeMap = Grid<double>;
using ScoreMap = Grid<double>;
using ClassMap = Grid<std::uint8_t>;

// Per-pixel class distribution, C×H×W, class-major like the EALT layout.
class ProbabilityMap {
 public:
  ProbabilityMap() = default;
  ProbabilityMap(std::size_t classes, std::size_t height, std::size_t width, double fill = 0.0)
      : classes_(classes), height_(height), width_(width), values_(classes * height * width, fill) {}

  std::size_t classes() const noexcept { return classes_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t pixels() const noexcept { return height_ * width_; }

  double& at(std::size_t c, std::size_t pixel) noexcept { return values_[c * pixels() + pixel]; }
  double at(std::size_t c, std::size_t pixel) const noexcept { return values_[c * pixels() + pixel]; }
  double& at(std::size_t c, std::size_t m, std::size_t n) noexcept { return at(c, m * width_ + n); }
  double at(std::size_t c, std::size_t m, std::size_t n) const noexcept { return at(c, m * width_ + n); }

  std::span<double> values() & noexcept { return values_; }
  std::span<const double> values() const& noexcept { return values_; }
  std::vector<double> values() && noexcept { return std::move(values_); }

  bool same_shape(const ProbabilityMap& o) const noexcept {
    return classes_ == o.classes_ && height_ == o.height_ && width_ == o.width_;
  }
  template <class U>
  bool same_pixels(const Grid<U>& g) const noexcept {
    return height_ == g.height() && width_ == g.width();
  }

 private:
  std::size_t classes_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> values_;
};

// Largest deviation of a per-pixel class sum from 1, and whether any entry is
// negative or non-finite.
struct NormalizationCheck {
  double max_sum_error = 0.0;
  bool has_invalid_entry = false;
};
NormalizationCheck check_normalization(const ProbabilityMap& p);

// Tensor conversions. u8 images are scaled to [0,1]; f32 images are taken as-is.
Image image_from_tensor(const Tensor& t);
ClassMap class_map_from_tensor(const Tensor& t);
ProbabilityMap probability_map_from_tensor(const Tensor& t);

Tensor to_tensor(const Grid<double>& g);
Tensor to_tensor(const ClassMap& g);
Tensor to_tensor(const ProbabilityMap& p);

}  // namespace edgeal

#include "edgeal/maps_impl.hpp"
