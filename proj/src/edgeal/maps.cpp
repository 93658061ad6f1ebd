#include "edgeal/maps.hpp"

#include <cmath>

namespace edgeal {

NormalizationCheck check_normalization(const ProbabilityMap& p) {
  NormalizationCheck result;
  for (std::size_t i = 0; i < p.pixels(); ++i) {
    double sum = 0.0;
    for (std::size_t c = 0; c < p.classes(); ++c) {
      const double v = p.at(c, i);
      if (!std::isfinite(v) || v < 0.0) result.has_invalid_entry = true;
      sum += v;
    }
    result.max_sum_error = std::max(result.max_sum_error, std::abs(sum - 1.0));
  }
  return result;
}

Image image_from_tensor(const Tensor& t) {
  if (t.rank() != 2) fail(ErrorCode::dimension, "image tensor must be rank 2");
  Image img(t.dim(0), t.dim(1));
  if (t.dtype() == DType::u8) {
    auto src = t.u8();
    for (std::size_t i = 0; i < src.size(); ++i) img[i] = src[i] / 255.0;
  } else {
    auto src = t.f32();
    for (std::size_t i = 0; i < src.size(); ++i) img[i] = src[i];
  }
  return img;
}

ClassMap class_map_from_tensor(const Tensor& t) {
  if (t.rank() != 2) fail(ErrorCode::dimension, "class map tensor must be rank 2");
  if (t.dtype() != DType::u8) fail(ErrorCode::invalid_argument, "class map tensor must be u8");
  auto src = t.u8();
  return ClassMap(t.dim(0), t.dim(1), std::vector<std::uint8_t>(src.begin(), src.end()));
}

ProbabilityMap probability_map_from_tensor(const Tensor& t) {
  if (t.rank() != 3) fail(ErrorCode::dimension, "probability map tensor must be rank 3");
  if (t.dtype() != DType::f32) fail(ErrorCode::invalid_argument, "probability map must be f32");
  if (t.dim(0) < 2) fail(ErrorCode::dimension, "probability map needs at least 2 classes");
  ProbabilityMap p(t.dim(0), t.dim(1), t.dim(2));
  auto src = t.f32();
  for (std::size_t i = 0; i < src.size(); ++i) p.values()[i] = src[i];
  return p;
}

Tensor to_tensor(const Grid<double>& g) {
  std::vector<float> data(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) data[i] = static_cast<float>(g[i]);
  return Tensor::from_f32({static_cast<std::uint32_t>(g.height()), static_cast<std::uint32_t>(g.width())},
                         std::move(data));
}

Tensor to_tensor(const ClassMap& g) {
  auto v = g.values();
  return Tensor::from_u8({static_cast<std::uint32_t>(g.height()), static_cast<std::uint32_t>(g.width())},
                         std::vector<std::uint8_t>(v.begin(), v.end()));
}

Tensor to_tensor(const ProbabilityMap& p) {
  std::vector<float> data(p.values().size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(p.values()[i]);
  return Tensor::from_f32({static_cast<std::uint32_t>(p.classes()), static_cast<std::uint32_t>(p.height()),
                          static_cast<std::uint32_t>(p.width())},
                         std::move(data));
}

}  // namespace edgeal
