#include "edgeal/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "edgeal/error.hpp"
#include "edgeal/rng.hpp"

namespace edgeal {

DiceReport dice(const ClassMap& pred, const ClassMap& gt, std::size_t classes) {
  if (!pred.same_shape(gt)) fail(ErrorCode::dimension, "dice: prediction and ground truth dims differ");
  std::vector<std::size_t> inter(classes, 0), pred_count(classes, 0), gt_count(classes, 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto a = pred[i];
    const auto b = gt[i];
    if (a >= classes || b >= classes) fail(ErrorCode::range, "dice: class id out of range");
    ++pred_count[a];
    ++gt_count[b];
    if (a == b) ++inter[a];
  }
  DiceReport report;
  report.per_class.assign(classes, 0.0);
  report.evaluated.assign(classes, false);
  double sum = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    const std::size_t denom = pred_count[c] + gt_count[c];
    if (denom == 0) continue;
    report.evaluated[c] = true;
    report.per_class[c] = 2.0 * static_cast<double>(inter[c]) / static_cast<double>(denom);
    sum += report.per_class[c];
    ++report.classes_evaluated;
  }
  report.mean = report.classes_evaluated ? sum / static_cast<double>(report.classes_evaluated) : 0.0;
  return report;
}

namespace {
constexpr std::array<Strategy, 6> kStrategies = {Strategy::edgeal, Strategy::random, Strategy::ent,
                                                 Strategy::conf,   Strategy::mar,    Strategy::rmcdr};
}

std::string_view strategy_name(Strategy s) noexcept {
  switch (s) {
    case Strategy::edgeal: return "edgeal";
    case Strategy::random: return "random";
    case Strategy::ent: return "ent";
    case Strategy::conf: return "conf";
    case Strategy::mar: return "mar";
    case Strategy::rmcdr: return "rmcdr";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  for (Strategy s : kStrategies) {
    if (strategy_name(s) == name) return s;
  }
  fail(ErrorCode::invalid_argument, "unknown strategy '" + std::string(name) + "'");
}

std::span<const Strategy> all_strategies() noexcept { return kStrategies; }

ScoreMap entropy_map(const ProbabilityMap& p) {
  ScoreMap out(p.height(), p.width(), 0.0);
  for (std::size_t i = 0; i < p.pixels(); ++i) {
    double h = 0.0;
    for (std::size_t c = 0; c < p.classes(); ++c) {
      const double v = p.at(c, i);
      if (v > 0.0) h -= v * std::log(v);
    }
    out[i] = h;
  }
  return out;
}

ScoreMap confidence_map(const ProbabilityMap& p) {
  ScoreMap out(p.height(), p.width(), 0.0);
  for (std::size_t i = 0; i < p.pixels(); ++i) {
    double top = 0.0;
    for (std::size_t c = 0; c < p.classes(); ++c) top = std::max(top, p.at(c, i));
    out[i] = 1.0 - top;
  }
  return out;
}

ScoreMap margin_map(const ProbabilityMap& p) {
  ScoreMap out(p.height(), p.width(), 0.0);
  for (std::size_t i = 0; i < p.pixels(); ++i) {
    double first = -1.0, second = -1.0;
    for (std::size_t c = 0; c < p.classes(); ++c) {
      const double v = p.at(c, i);
      if (v > first) {
        second = first;
        first = v;
      } else if (v > second) {
        second = v;
      }
    }
    out[i] = -(first - second);
  }
  return out;
}

std::vector<PrioritizedRegion> baseline_region_scores(Strategy strategy, const BaselineImageMaps& maps,
                                                      std::uint64_t seed) {
  if (!maps.superpixels || !maps.labeled) fail(ErrorCode::invalid_argument, "baseline: missing superpixels or mask");
  const SuperpixelMap& sp = *maps.superpixels;
  const std::size_t h = sp.labels.height();
  const std::size_t w = sp.labels.width();
  const ScoreMap zeros(h, w, 0.0);
  const ScoreMap& ee = maps.entropy ? *maps.entropy : zeros;
  const ScoreMap& ed = maps.divergence ? *maps.divergence : zeros;

  ScoreMap pixel_score;
  switch (strategy) {
    case Strategy::random:
      pixel_score = zeros;
      break;
    case Strategy::ent:
    case Strategy::conf:
    case Strategy::mar: {
      if (!maps.deterministic) fail(ErrorCode::invalid_argument, "baseline: missing deterministic prediction");
      const ProbabilityMap& p = *maps.deterministic;
      pixel_score = strategy == Strategy::ent ? entropy_map(p) : strategy == Strategy::conf ? confidence_map(p) : margin_map(p);
      break;
    }
    case Strategy::rmcdr:
      if (!maps.mc_mean) fail(ErrorCode::invalid_argument, "baseline: missing MC-averaged prediction");
      pixel_score = entropy_map(*maps.mc_mean);
      break;
    case Strategy::edgeal:
      fail(ErrorCode::invalid_argument, "baseline scoring does not handle the edgeal strategy");
  }
  if (!pixel_score.same_shape(sp.labels)) fail(ErrorCode::dimension, "baseline: map dims differ from superpixels");

  const auto regions = regional_means(maps.image_id, ee, ed, sp, *maps.labeled);
  std::vector<double> sum(sp.region_count, 0.0);
  for (std::size_t i = 0; i < pixel_score.size(); ++i) {
    if (!(*maps.labeled)[i]) sum[sp.labels[i]] += pixel_score[i];
  }
  std::vector<PrioritizedRegion> out;
  out.reserve(regions.size());
  for (const auto& r : regions) {
    double priority;
    if (strategy == Strategy::random) {
      priority = to_unit(hash_keys({seed, 0xA11Dull, r.image_id, r.region_id}));
    } else {
      priority = sum[r.region_id] / static_cast<double>(r.unlabeled_count);
    }
    out.push_back({r, priority, 0.0});
  }
  return out;
}

SelectionResult baseline_select(Strategy strategy, std::span<const BaselineImageMaps> maps,
                                std::size_t budget_pixels, std::uint64_t seed) {
  std::vector<PrioritizedRegion> pool;
  for (const auto& m : maps) {
    auto part = baseline_region_scores(strategy, m, seed);
    pool.insert(pool.end(), part.begin(), part.end());
  }
  return select_by_priority(std::move(pool), budget_pixels);
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j);
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double rank_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) fail(ErrorCode::invalid_argument, "rank_correlation: need equal sizes >= 2");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n - 1.0) / 2.0;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - mean) * (rb[i] - mean);
    va += (ra[i] - mean) * (ra[i] - mean);
    vb += (rb[i] - mean) * (rb[i] - mean);
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

}  // namespace edgeal
