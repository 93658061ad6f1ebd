#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "edgeal/acquisition.hpp"
#include "edgeal/dataset.hpp"
#include "edgeal/superpixels.hpp"

namespace edgeal {

inline constexpr std::uint8_t kUnlabeled = 255;

struct RoundRecord {
  std::size_t round = 0;
  std::size_t pixels_revealed = 0;
  double fraction = 0.0;  // labeled fraction of the pool after this round
};

// Partial annotation of a pool of images. Mask entries hold the revealed class
// id, or 255 where the oracle has not been queried yet.
class LabelState {
 public:
  LabelState() = default;
  // Everything unlabeled; one mask per image with the given shapes.
  explicit LabelState(std::span<const Sample> pool);

  std::size_t image_count() const noexcept { return masks_.size(); }
  const ClassMap& mask(std::size_t image) const { return masks_.at(image); }
  LabeledMask labeled(std::size_t image) const;
  std::size_t unlabeled_count(std::size_t image) const;

  std::size_t total_pixels() const noexcept { return total_pixels_; }
  std::size_t revealed_pixels() const noexcept { return revealed_pixels_; }
  std::size_t seed_pixels() const noexcept { return seed_pixels_; }
  std::size_t seed_images() const noexcept { return seed_images_; }
  double labeled_fraction() const noexcept;
  const std::vector<RoundRecord>& history() const noexcept { return history_; }

  // Copies ground truth into every pixel of image `image`.
  void reveal_image(std::size_t image, const ClassMap& truth);
  // Copies ground truth into the listed pixels; returns how many were new.
  std::size_t reveal_pixels(std::size_t image, std::span<const std::size_t> pixels, const ClassMap& truth);

  void mark_seed();
  void record_round(std::size_t pixels_revealed);

  // Persistence: one u8 EALT mask per image plus state.csv (counters and
  // history). Restoring validates masks against the pool.
  void save(const std::filesystem::path& dir, std::span<const Sample> pool) const;
  static LabelState load(const std::filesystem::path& dir, std::span<const Sample> pool);

 private:
  std::vector<ClassMap> masks_;
  std::size_t total_pixels_ = 0;
  std::size_t revealed_pixels_ = 0;
  std::size_t seed_pixels_ = 0;
  std::size_t seed_images_ = 0;
  std::vector<RoundRecord> history_;
};

// Whole images drawn uniformly without replacement until at least `fraction`
// of the pool's pixels are labeled. 0 < fraction < 1.
LabelState sample_seed_set(std::span<const Sample> pool, double fraction, std::uint64_t seed);

// Simulated oracle: reveals ground truth for every pixel of each selected
// superpixel and appends a history record. Selecting a region that has no
// unlabeled pixels left is an error.
LabelState reveal(LabelState state, const SelectionResult& selection, std::span<const SuperpixelMap> superpixels,
                  std::span<const Sample> pool);

}  // namespace edgeal
