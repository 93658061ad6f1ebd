#pragma once

#include <span>

#include "edgeal/maps.hpp"

namespace edgeal {

inline constexpr double kDivergenceFloor = 1e-8;

// Elementwise mean of D stochastic forward passes. Every pass must have the
// same shape and be per-pixel normalized (tolerance 1e-4).
ProbabilityMap mc_average(std::span<const ProbabilityMap> passes);

// phi(c) = exp(P(c)·S) / Σ_k exp(P(k)·S), per pixel.
ProbabilityMap contextual_probability(const ProbabilityMap& p, const EdgeMap& s);

// Shannon entropy of phi per pixel, natural log, 0·ln 0 = 0.
ScoreMap edge_entropy(const ProbabilityMap& phi);

// KL(P ‖ phi) per pixel. Both operands are clamped to [1e-8, 1] before the
// ratio; no renormalization.
ScoreMap edge_divergence(const ProbabilityMap& p, const ProbabilityMap& phi);

struct EdgeScores {
  ProbabilityMap mean;  // MC-averaged prediction
  ProbabilityMap contextual;
  ScoreMap entropy;
  ScoreMap divergence;
};

// Full per-image chain: MC average, edge prior, contextual probability,
// edge entropy and edge divergence.
EdgeScores score_image(const Image& img, std::span<const ProbabilityMap> passes);
EdgeScores score_with_edges(const EdgeMap& edges, std::span<const ProbabilityMap> passes);

}  // namespace edgeal
