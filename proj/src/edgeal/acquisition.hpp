#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <vector>

#include "edgeal/maps.hpp"
#include "edgeal/superpixels.hpp"

namespace edgeal {

// 1 where a pixel is already annotated, 0 otherwise.
using LabeledMask = Grid<std::uint8_t>;

struct RegionRef {
  std::size_t image_id = 0;
  std::size_t region_id = 0;
  auto operator<=>(const RegionRef&) const = default;
};

struct RegionScore {
  std::size_t image_id = 0;
  std::size_t region_id = 0;
  double mean_ee = 0.0;
  double mean_ed = 0.0;
  std::size_t unlabeled_count = 0;

  RegionRef ref() const noexcept { return {image_id, region_id}; }
};

struct SelectionResult {
  std::vector<RegionScore> regions;  // in selection order
  std::size_t pixels_revealed = 0;
  std::size_t budget_target = 0;
};

// Means of EE and ED over the unlabeled pixels of each superpixel. Regions
// without unlabeled pixels are omitted. Output is ordered by region id.
std::vector<RegionScore> regional_means(std::size_t image_id, const ScoreMap& ee, const ScoreMap& ed,
                                        const SuperpixelMap& sp, const LabeledMask& labeled);

// Per-image inputs the candidate-set construction reads. Referenced, not owned.
struct ImageEntropyView {
  std::size_t image_id;
  const ScoreMap& entropy;
  const SuperpixelMap& superpixels;
  const LabeledMask& labeled;
};

// Highest mean EE; ties go to the lower (image_id, region_id).
const RegionScore& entropy_anchor(std::span<const RegionScore> scores);

// Pixels within this distance below the anchor's mean still count as high-EE,
// so a region whose values all equal the threshold is not lost to rounding.
inline constexpr double kThresholdSlack = 1e-9;
inline constexpr double kOverlapFraction = 0.5;

// Candidate set R: the anchor region plus every scored region whose unlabeled
// pixels have EE at or above the anchor's mean EE on at least half of them.
// Returned sorted by (image_id, region_id).
std::vector<RegionRef> build_candidate_set(std::span<const RegionScore> scores,
                                           std::span<const ImageEntropyView> images);

// Greedy ED-descending pick from the candidates until the accumulated
// unlabeled pixel count reaches budget_pixels or the candidates run out.
// Ties: higher mean_ee, then lower image_id, then lower region_id.
SelectionResult select_regions(std::span<const RegionScore> scores, std::span<const RegionRef> candidates,
                               std::size_t budget_pixels);

// One full acquisition over a scored pool. When the candidate set runs dry
// before the budget is met, a new anchor is taken from the regions not yet
// picked and selection continues from its candidate set.
SelectionResult edgeal_select(std::span<const RegionScore> scores, std::span<const ImageEntropyView> images,
                              std::size_t budget_pixels);

// Greedy pick by a caller-supplied priority (descending), ties by
// (secondary descending, image_id, region_id). Shared by the baselines.
struct PrioritizedRegion {
  RegionScore region;
  double priority = 0.0;
  double secondary = 0.0;
};
SelectionResult select_by_priority(std::vector<PrioritizedRegion> regions, std::size_t budget_pixels);

}  // namespace edgeal
