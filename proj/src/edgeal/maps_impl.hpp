#pragma once

#include <string>

#include "edgeal/error.hpp"

namespace edgeal {

template <class T>
Grid<T>::Grid(std::size_t height, std::size_t width, std::vector<T> values)
    : height_(height), width_(width), values_(std::move(values)) {
  if (values_.size() != height_ * width_) {
    fail(ErrorCode::dimension, "grid expects " + std::to_string(height_ * width_) +
                                   " values, got " + std::to_string(values_.size()));
  }
}

}  // namespace edgeal
