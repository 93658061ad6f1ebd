#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "edgeal/dataset.hpp"
#include "edgeal/labels.hpp"
#include "edgeal/learner.hpp"
#include "edgeal/metrics.hpp"
#include "edgeal/superpixels.hpp"
#include "edgeal/uncertainty.hpp"

namespace edgeal {

// Model-independent per-image data of the unlabeled pool, computed once per
// experiment: the edge prior and the superpixel partition.
struct CandidatePool {
  std::span<const Sample> samples;
  std::vector<EdgeMap> edges;
  std::vector<SuperpixelMap> superpixels;

  std::size_t size() const noexcept { return samples.size(); }
};

CandidatePool make_pool(std::span<const Sample> samples, const SeedsParams& seeds);

struct RoundOptions {
  std::size_t mc_passes = 8;
  std::size_t budget_pixels = 1;
  std::uint64_t seed = 0;  // Random strategy ordering
};

// Score maps of one pool image for the current model.
struct ImageRoundMaps {
  std::size_t image_id = 0;
  EdgeScores scores;
  ProbabilityMap deterministic;
  LabeledMask labeled;
};

// Runs the D passes and the edge-score chain for every pool image that still
// has unlabeled pixels. Provider errors are rethrown with the image id.
std::vector<ImageRoundMaps> score_pool(const PredictionProvider& provider, const CandidatePool& pool,
                                       const LabelState& state, std::size_t mc_passes, bool need_deterministic);

// One EdgeAL acquisition round: score maps, regional means, candidate set,
// ED-greedy selection. Labels are not revealed here.
SelectionResult edgeal_round(const PredictionProvider& provider, const CandidatePool& pool, const LabelState& state,
                             const RoundOptions& options);

// Dispatches to edgeal_round or a baseline on the same budget machinery.
SelectionResult strategy_round(Strategy strategy, const PredictionProvider& provider, const CandidatePool& pool,
                               const LabelState& state, const RoundOptions& options);

}  // namespace edgeal
