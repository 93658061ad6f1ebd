#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edgeal/acquisition.hpp"
#include "edgeal/maps.hpp"

namespace edgeal {

struct DiceReport {
  std::vector<double> per_class;  // 0 for classes not evaluated
  std::vector<bool> evaluated;    // false when a class is absent from both maps
  double mean = 0.0;              // over evaluated classes
  std::size_t classes_evaluated = 0;
};

// Per-class 2|A∩B|/(|A|+|B|). A class predicted but absent from the ground
// truth scores 0; a class absent from both is skipped.
DiceReport dice(const ClassMap& pred, const ClassMap& gt, std::size_t classes);

enum class Strategy { edgeal, random, ent, conf, mar, rmcdr };

std::string_view strategy_name(Strategy s) noexcept;
Strategy parse_strategy(std::string_view name);
std::span<const Strategy> all_strategies() noexcept;

// Per-image maps a baseline reads. `deterministic` is the dropout-free
// prediction (ENT, CONF, MAR); `mc_mean` the D-pass average (RMCDR).
// `entropy`/`divergence` only populate the mean_ee/mean_ed report columns.
struct BaselineImageMaps {
  std::size_t image_id = 0;
  const ProbabilityMap* deterministic = nullptr;
  const ProbabilityMap* mc_mean = nullptr;
  const ScoreMap* entropy = nullptr;
  const ScoreMap* divergence = nullptr;
  const SuperpixelMap* superpixels = nullptr;
  const LabeledMask* labeled = nullptr;
};

// Per-pixel uncertainty scores of the probability baselines, higher = more
// uncertain: ENT/RMCDR entropy, CONF 1 - max p, MAR -(top1 - top2).
ScoreMap entropy_map(const ProbabilityMap& p);
ScoreMap confidence_map(const ProbabilityMap& p);
ScoreMap margin_map(const ProbabilityMap& p);

// Region-level priority of `strategy` for one image; regions without
// unlabeled pixels are omitted.
std::vector<PrioritizedRegion> baseline_region_scores(Strategy strategy, const BaselineImageMaps& maps,
                                                      std::uint64_t seed);

// Scores every image with the strategy, then runs the shared greedy
// pixel-budget loop. Not valid for Strategy::edgeal.
SelectionResult baseline_select(Strategy strategy, std::span<const BaselineImageMaps> maps,
                                std::size_t budget_pixels, std::uint64_t seed);

// Spearman rank correlation (average ranks for ties).
double rank_correlation(std::span<const double> a, std::span<const double> b);

}  // namespace edgeal
