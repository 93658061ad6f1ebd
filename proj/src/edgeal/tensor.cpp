#include "edgeal/tensor.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "edgeal/error.hpp"

namespace edgeal {

namespace {

constexpr std::uint8_t kMagic[4] = {0x45, 0x41, 0x4C, 0x54};

void validate_dims(std::span<const std::uint32_t> dims) {
  if (dims.size() != 2 && dims.size() != 3) {
    fail(ErrorCode::invalid_argument,
         "tensor rank must be 2 or 3, got " + std::to_string(dims.size()));
  }
  for (std::uint32_t d : dims) {
    if (d == 0) fail(ErrorCode::invalid_argument, "tensor dims must all be >= 1");
  }
}

std::size_t product(std::span<const std::uint32_t> dims) {
  std::size_t n = 1;
  for (std::uint32_t d : dims) n *= d;
  return n;
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

Tensor Tensor::from_u8(std::vector<std::uint32_t> dims, std::vector<std::uint8_t> data) {
  validate_dims(dims);
  if (data.size() != product(dims)) {
    fail(ErrorCode::dimension, "tensor payload has " + std::to_string(data.size()) +
                                   " elements, dims require " + std::to_string(product(dims)));
  }
  Tensor t;
  t.dtype_ = DType::u8;
  t.dims_ = std::move(dims);
  t.u8_ = std::move(data);
  return t;
}

Tensor Tensor::from_f32(std::vector<std::uint32_t> dims, std::vector<float> data) {
  validate_dims(dims);
  if (data.size() != product(dims)) {
    fail(ErrorCode::dimension, "tensor payload has " + std::to_string(data.size()) +
                                   " elements, dims require " + std::to_string(product(dims)));
  }
  Tensor t;
  t.dtype_ = DType::f32;
  t.dims_ = std::move(dims);
  t.f32_ = std::move(data);
  return t;
}

std::size_t Tensor::element_count() const noexcept {
  return dims_.empty() ? 0 : product(dims_);
}

std::span<const std::uint8_t> Tensor::u8() const {
  if (dtype_ != DType::u8) fail(ErrorCode::invalid_argument, "tensor dtype is not u8");
  return u8_;
}

std::span<const float> Tensor::f32() const {
  if (dtype_ != DType::f32) fail(ErrorCode::invalid_argument, "tensor dtype is not f32");
  return f32_;
}

bool Tensor::operator==(const Tensor& other) const noexcept {
  if (dtype_ != other.dtype_ || dims_ != other.dims_) return false;
  if (dtype_ == DType::u8) return u8_ == other.u8_;
  // Bitwise comparison so NaN payloads and signed zeros round-trip exactly.
  return f32_.size() == other.f32_.size() &&
         std::memcmp(f32_.data(), other.f32_.data(), f32_.size() * sizeof(float)) == 0;
}

std::size_t ealt_header_size(std::size_t rank) noexcept { return 8 + 4 * rank; }

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  validate_dims(t.dims());
  std::vector<std::uint8_t> out;
  const std::size_t elem = t.dtype() == DType::u8 ? 1 : 4;
  out.reserve(ealt_header_size(t.rank()) + elem * t.element_count());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u16(out, kEaltVersion);
  out.push_back(static_cast<std::uint8_t>(t.dtype()));
  out.push_back(static_cast<std::uint8_t>(t.rank()));
  for (std::uint32_t d : t.dims()) put_u32(out, d);
  if (t.dtype() == DType::u8) {
    auto data = t.u8();
    out.insert(out.end(), data.begin(), data.end());
  } else {
    for (float v : t.f32()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) throw ParseError(ParseFailure::truncated, "truncated header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ParseError(ParseFailure::bad_magic, "bad magic");
  }
  const std::uint16_t version = static_cast<std::uint16_t>(bytes[4] | (bytes[5] << 8));
  if (version != kEaltVersion) {
    throw ParseError(ParseFailure::unsupported_version,
                     "unsupported version " + std::to_string(version));
  }
  const std::uint8_t dtype = bytes[6];
  if (dtype > 1) {
    throw ParseError(ParseFailure::unsupported_dtype,
                     "unsupported dtype " + std::to_string(dtype));
  }
  const std::uint8_t rank = bytes[7];
  if (rank != 2 && rank != 3) {
    throw ParseError(ParseFailure::unsupported_rank, "unsupported rank " + std::to_string(rank));
  }
  const std::size_t header = ealt_header_size(rank);
  if (bytes.size() < header) throw ParseError(ParseFailure::truncated, "truncated header");

  std::vector<std::uint32_t> dims(rank);
  std::size_t count = 1;
  for (std::size_t i = 0; i < rank; ++i) {
    dims[i] = get_u32(bytes.data() + 8 + 4 * i);
    if (dims[i] == 0) throw ParseError(ParseFailure::bad_dims, "zero dimension");
    count *= dims[i];
  }
  const std::size_t elem = dtype == 0 ? 1 : 4;
  const std::size_t payload = bytes.size() - header;
  if (payload < count * elem) {
    throw ParseError(ParseFailure::truncated,
                     "truncated payload: expected " + std::to_string(count * elem) +
                         " bytes, found " + std::to_string(payload));
  }
  if (payload > count * elem) {
    throw ParseError(ParseFailure::trailing_bytes, "trailing bytes after payload");
  }

  const std::uint8_t* p = bytes.data() + header;
  if (dtype == 0) return Tensor::from_u8(std::move(dims), std::vector<std::uint8_t>(p, p + count));
  std::vector<float> values(count);
  for (std::size_t i = 0; i < count; ++i) values[i] = std::bit_cast<float>(get_u32(p + 4 * i));
  return Tensor::from_f32(std::move(dims), std::move(values));
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_tensor(bytes);
  } catch (const ParseError& e) {
    throw ParseError(e.reason(), path.string() + ": " + e.what());
  }
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  const auto bytes = encode_tensor(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

}  // namespace edgeal
