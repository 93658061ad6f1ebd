#include "edgeal/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "edgeal/edges.hpp"
#include "edgeal/error.hpp"

namespace edgeal {

namespace {

constexpr double kPassTolerance = 1e-4;

void require_same_pixels(const ProbabilityMap& p, std::size_t h, std::size_t w, const char* what) {
  if (p.height() != h || p.width() != w) {
    fail(ErrorCode::dimension, std::string(what) + ": dimension mismatch (" + std::to_string(p.height()) +
                                   "x" + std::to_string(p.width()) + " vs " + std::to_string(h) + "x" +
                                   std::to_string(w) + ")");
  }
}

}  // namespace

ProbabilityMap mc_average(std::span<const ProbabilityMap> passes) {
  if (passes.empty()) fail(ErrorCode::invalid_argument, "mc_average: no passes");
  const ProbabilityMap& first = passes.front();
  for (std::size_t d = 0; d < passes.size(); ++d) {
    if (!passes[d].same_shape(first)) {
      fail(ErrorCode::dimension, "mc_average: pass " + std::to_string(d) + " has different dims");
    }
    const auto check = check_normalization(passes[d]);
    if (check.has_invalid_entry || check.max_sum_error > kPassTolerance) {
      fail(ErrorCode::invalid_argument, "mc_average: pass " + std::to_string(d) + " is not normalized");
    }
  }

  ProbabilityMap mean(first.classes(), first.height(), first.width(), 0.0);
  auto out = mean.values();
  for (const auto& pass : passes) {
    auto in = pass.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += in[i];
  }
  const double inv = 1.0 / static_cast<double>(passes.size());
  for (double& v : out) v *= inv;
  return mean;
}

ProbabilityMap contextual_probability(const ProbabilityMap& p, const EdgeMap& s) {
  require_same_pixels(p, s.height(), s.width(), "contextual_probability");
  const std::size_t classes = p.classes();
  ProbabilityMap phi(classes, p.height(), p.width());
  std::vector<double> z(classes);
  for (std::size_t i = 0; i < p.pixels(); ++i) {
    double zmax = -INFINITY;
    for (std::size_t c = 0; c < classes; ++c) {
      z[c] = p.at(c, i) * s[i];
      zmax = std::max(zmax, z[c]);
    }
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      z[c] = std::exp(z[c] - zmax);
      sum += z[c];
    }
    for (std::size_t c = 0; c < classes; ++c) phi.at(c, i) = z[c] / sum;
  }
  return phi;
}

ScoreMap edge_entropy(const ProbabilityMap& phi) {
  ScoreMap ee(phi.height(), phi.width(), 0.0);
  for (std::size_t i = 0; i < phi.pixels(); ++i) {
    double h = 0.0;
    for (std::size_t c = 0; c < phi.classes(); ++c) {
      const double v = phi.at(c, i);
      if (v > 0.0) h -= v * std::log(v);
    }
    ee[i] = h;
  }
  return ee;
}

ScoreMap edge_divergence(const ProbabilityMap& p, const ProbabilityMap& phi) {
  if (!p.same_shape(phi)) fail(ErrorCode::dimension, "edge_divergence: dimension mismatch");
  ScoreMap ed(p.height(), p.width(), 0.0);
  for (std::size_t i = 0; i < p.pixels(); ++i) {
    double kl = 0.0;
    for (std::size_t c = 0; c < p.classes(); ++c) {
      const double pc = std::clamp(p.at(c, i), kDivergenceFloor, 1.0);
      const double qc = std::clamp(phi.at(c, i), kDivergenceFloor, 1.0);
      kl += pc * std::log(pc / qc);
    }
    ed[i] = kl;
  }
  return ed;
}

EdgeScores score_with_edges(const EdgeMap& edges, std::span<const ProbabilityMap> passes) {
  EdgeScores out;
  out.mean = mc_average(passes);
  out.contextual = contextual_probability(out.mean, edges);
  out.entropy = edge_entropy(out.contextual);
  out.divergence = edge_divergence(out.mean, out.contextual);
  return out;
}

EdgeScores score_image(const Image& img, std::span<const ProbabilityMap> passes) {
  return score_with_edges(edge_map(img), passes);
}

}  // namespace edgeal
