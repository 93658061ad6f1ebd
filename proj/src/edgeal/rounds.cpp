#include "edgeal/rounds.hpp"

#include <string>

#include "edgeal/edges.hpp"
#include "edgeal/error.hpp"

namespace edgeal {

CandidatePool make_pool(std::span<const Sample> samples, const SeedsParams& seeds) {
  CandidatePool pool;
  pool.samples = samples;
  pool.edges.reserve(samples.size());
  pool.superpixels.reserve(samples.size());
  for (const auto& s : samples) {
    pool.edges.push_back(edge_map(s.image));
    pool.superpixels.push_back(seeds_partition(s.image, seeds));
  }
  return pool;
}

std::vector<ImageRoundMaps> score_pool(const PredictionProvider& provider, const CandidatePool& pool,
                                       const LabelState& state, std::size_t mc_passes, bool need_deterministic) {
  if (state.image_count() != pool.size()) fail(ErrorCode::invalid_argument, "label state does not match the pool");
  if (mc_passes < 1) fail(ErrorCode::invalid_argument, "mc_passes must be >= 1");
  std::vector<ImageRoundMaps> out;
  for (std::size_t id = 0; id < pool.size(); ++id) {
    if (state.unlabeled_count(id) == 0) continue;
    ImageRoundMaps maps;
    maps.image_id = id;
    try {
      std::vector<ProbabilityMap> passes;
      passes.reserve(mc_passes);
      for (std::size_t k = 0; k < mc_passes; ++k) passes.push_back(provider.predict_pass(id, k));
      maps.scores = score_with_edges(pool.edges[id], passes);
      if (need_deterministic) {
        maps.deterministic = provider.predict_deterministic(id);
      }
    } catch (const Error& e) {
      throw Error(e.code(), "image " + std::to_string(id) + " (" + pool.samples[id].name + "): " + e.what());
    }
    maps.labeled = state.labeled(id);
    out.push_back(std::move(maps));
  }
  return out;
}

SelectionResult edgeal_round(const PredictionProvider& provider, const CandidatePool& pool, const LabelState& state,
                             const RoundOptions& options) {
  if (state.revealed_pixels() == 0) fail(ErrorCode::state, "edgeal_round: no labeled pixels (seed set missing)");
  const auto maps = score_pool(provider, pool, state, options.mc_passes, false);
  std::vector<RegionScore> scores;
  std::vector<ImageEntropyView> views;
  for (const auto& m : maps) {
    auto part = regional_means(m.image_id, m.scores.entropy, m.scores.divergence, pool.superpixels[m.image_id],
                               m.labeled);
    scores.insert(scores.end(), part.begin(), part.end());
    views.push_back({m.image_id, m.scores.entropy, pool.superpixels[m.image_id], m.labeled});
  }
  if (scores.empty()) {
    SelectionResult empty;
    empty.budget_target = options.budget_pixels;
    return empty;
  }
  return edgeal_select(scores, views, options.budget_pixels);
}

SelectionResult strategy_round(Strategy strategy, const PredictionProvider& provider, const CandidatePool& pool,
                               const LabelState& state, const RoundOptions& options) {
  if (strategy == Strategy::edgeal) return edgeal_round(provider, pool, state, options);
  const bool deterministic = strategy == Strategy::ent || strategy == Strategy::conf || strategy == Strategy::mar;
  const auto maps = score_pool(provider, pool, state, options.mc_passes, deterministic);
  std::vector<BaselineImageMaps> views;
  for (const auto& m : maps) {
    BaselineImageMaps v;
    v.image_id = m.image_id;
    v.deterministic = deterministic ? &m.deterministic : nullptr;
    v.mc_mean = &m.scores.mean;
    v.entropy = &m.scores.entropy;
    v.divergence = &m.scores.divergence;
    v.superpixels = &pool.superpixels[m.image_id];
    v.labeled = &m.labeled;
    views.push_back(v);
  }
  if (views.empty()) {
    SelectionResult empty;
    empty.budget_target = options.budget_pixels;
    return empty;
  }
  return baseline_select(strategy, views, options.budget_pixels, options.seed);
}

}  // namespace edgeal
