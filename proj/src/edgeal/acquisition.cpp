#include "edgeal/acquisition.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <unordered_map>

#include "edgeal/error.hpp"

namespace edgeal {

std::vector<RegionScore> regional_means(std::size_t image_id, const ScoreMap& ee, const ScoreMap& ed,
                                        const SuperpixelMap& sp, const LabeledMask& labeled) {
  if (!ee.same_shape(ed) || !ee.same_shape(sp.labels) || !ee.same_shape(labeled)) {
    fail(ErrorCode::dimension, "regional_means: dimension mismatch for image " + std::to_string(image_id));
  }
  std::vector<double> sum_ee(sp.region_count, 0.0);
  std::vector<double> sum_ed(sp.region_count, 0.0);
  std::vector<std::size_t> count(sp.region_count, 0);
  for (std::size_t i = 0; i < ee.size(); ++i) {
    if (labeled[i]) continue;
    const auto r = sp.labels[i];
    sum_ee[r] += ee[i];
    sum_ed[r] += ed[i];
    ++count[r];
  }
  std::vector<RegionScore> out;
  for (std::size_t r = 0; r < sp.region_count; ++r) {
    if (count[r] == 0) continue;
    const double n = static_cast<double>(count[r]);
    out.push_back({image_id, r, sum_ee[r] / n, sum_ed[r] / n, count[r]});
  }
  return out;
}

const RegionScore& entropy_anchor(std::span<const RegionScore> scores) {
  if (scores.empty()) fail(ErrorCode::invalid_argument, "build_candidate_set: no region scores");
  const RegionScore* best = &scores.front();
  for (const auto& s : scores) {
    if (s.mean_ee > best->mean_ee || (s.mean_ee == best->mean_ee && s.ref() < best->ref())) best = &s;
  }
  return *best;
}

std::vector<RegionRef> build_candidate_set(std::span<const RegionScore> scores,
                                           std::span<const ImageEntropyView> images) {
  const RegionScore& anchor = entropy_anchor(scores);
  const double threshold = anchor.mean_ee - kThresholdSlack;

  std::unordered_map<std::size_t, const ImageEntropyView*> by_id;
  for (const auto& view : images) by_id[view.image_id] = &view;

  // High-EE pixel counts per region, over unlabeled pixels only.
  std::unordered_map<std::size_t, std::vector<std::size_t>> high;
  std::set<std::size_t> scored_images;
  for (const auto& s : scores) scored_images.insert(s.image_id);
  for (std::size_t id : scored_images) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) fail(ErrorCode::invalid_argument, "build_candidate_set: no maps for image " + std::to_string(id));
    const ImageEntropyView& view = *it->second;
    if (!view.entropy.same_shape(view.superpixels.labels) || !view.entropy.same_shape(view.labeled)) {
      fail(ErrorCode::dimension, "build_candidate_set: dimension mismatch for image " + std::to_string(id));
    }
    auto& counts = high[id];
    counts.assign(view.superpixels.region_count, 0);
    for (std::size_t i = 0; i < view.entropy.size(); ++i) {
      if (!view.labeled[i] && view.entropy[i] >= threshold) ++counts[view.superpixels.labels[i]];
    }
  }

  std::vector<RegionRef> out;
  for (const auto& s : scores) {
    const bool is_anchor = s.ref() == anchor.ref();
    const auto& counts = high.at(s.image_id);
    if (s.region_id >= counts.size()) {
      fail(ErrorCode::range, "build_candidate_set: region id out of range for image " + std::to_string(s.image_id));
    }
    const double fraction = static_cast<double>(counts[s.region_id]) / static_cast<double>(s.unlabeled_count);
    if (is_anchor || fraction >= kOverlapFraction) out.push_back(s.ref());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SelectionResult select_by_priority(std::vector<PrioritizedRegion> regions, std::size_t budget_pixels) {
  if (budget_pixels < 1) fail(ErrorCode::invalid_argument, "budget must be at least 1 pixel");
  std::sort(regions.begin(), regions.end(), [](const PrioritizedRegion& a, const PrioritizedRegion& b) {
    if (a.priority != b.priority) return a.priority > b.priority;
    if (a.secondary != b.secondary) return a.secondary > b.secondary;
    return a.region.ref() < b.region.ref();
  });
  SelectionResult result;
  result.budget_target = budget_pixels;
  for (const auto& r : regions) {
    if (result.pixels_revealed >= budget_pixels) break;
    result.regions.push_back(r.region);
    result.pixels_revealed += r.region.unlabeled_count;
  }
  return result;
}

SelectionResult select_regions(std::span<const RegionScore> scores, std::span<const RegionRef> candidates,
                               std::size_t budget_pixels) {
  const std::set<RegionRef> in_r(candidates.begin(), candidates.end());
  std::vector<PrioritizedRegion> pool;
  for (const auto& s : scores) {
    if (in_r.count(s.ref())) pool.push_back({s, s.mean_ed, s.mean_ee});
  }
  return select_by_priority(std::move(pool), budget_pixels);
}

SelectionResult edgeal_select(std::span<const RegionScore> scores, std::span<const ImageEntropyView> images,
                              std::size_t budget_pixels) {
  if (budget_pixels < 1) fail(ErrorCode::invalid_argument, "budget must be at least 1 pixel");
  SelectionResult result;
  result.budget_target = budget_pixels;
  std::vector<RegionScore> remaining(scores.begin(), scores.end());
  while (result.pixels_revealed < budget_pixels && !remaining.empty()) {
    const auto candidates = build_candidate_set(remaining, images);
    const auto part = select_regions(remaining, candidates, budget_pixels - result.pixels_revealed);
    std::set<RegionRef> picked;
    for (const auto& r : part.regions) {
      result.regions.push_back(r);
      result.pixels_revealed += r.unlabeled_count;
      picked.insert(r.ref());
    }
    std::erase_if(remaining, [&](const RegionScore& s) { return picked.count(s.ref()) > 0; });
  }
  return result;
}

}  // namespace edgeal
