#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace edgeal {

enum class DType : std::uint8_t { u8 = 0, f32 = 1 };

// Rank-2 (H,W) or rank-3 (C,H,W) array, row-major. This is the in-memory
// form of an EALT file and preserves payload bits exactly.
class Tensor {
 public:
  Tensor() = default;

  static Tensor from_u8(std::vector<std::uint32_t> dims, std::vector<std::uint8_t> data);
  static Tensor from_f32(std::vector<std::uint32_t> dims, std::vector<float> data);

  DType dtype() const noexcept { return dtype_; }
  std::size_t rank() const noexcept { return dims_.size(); }
  std::span<const std::uint32_t> dims() const noexcept { return dims_; }
  std::uint32_t dim(std::size_t i) const { return dims_.at(i); }
  std::size_t element_count() const noexcept;

  // Throws if the dtype does not match.
  std::span<const std::uint8_t> u8() const;
  std::span<const float> f32() const;

  bool operator==(const Tensor& other) const noexcept;

 private:
  DType dtype_ = DType::f32;
  std::vector<std::uint32_t> dims_;
  std::vector<std::uint8_t> u8_;
  std::vector<float> f32_;
};

inline constexpr std::uint16_t kEaltVersion = 1;

std::size_t ealt_header_size(std::size_t rank) noexcept;

std::vector<std::uint8_t> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

Tensor read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const Tensor& t);

}  // namespace edgeal
