#pragma once

#include <vector>

#include "edgeal/maps.hpp"

namespace edgeal {

// Sobel gradient magnitude sqrt(gx² + gy²) with clamp-to-edge borders.
// Requires H, W >= 3.
Grid<double> sobel_magnitude(const Image& img);

// Min-max normalization to [0,1]. A constant map has no edges and normalizes
// to all zeros.
EdgeMap normalize_edges(const Grid<double>& grad);

// The edge prior used by the acquisition step: normalize_edges(sobel_magnitude(img)).
EdgeMap edge_map(const Image& img);

// Normalized 1-D Gaussian taps for offsets -r..r, r = ceil(3σ).
std::vector<double> gaussian_kernel(double sigma);

// Separable Gaussian smoothing with clamp-to-edge borders.
Image gaussian_blur(const Image& img, double sigma);

}  // namespace edgeal
