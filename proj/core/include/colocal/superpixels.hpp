#pragma once

// Graph-based superpixel segmentation (Felzenszwalb-Huttenlocher) plus the
// region statistics needed downstream: centroids, major axis lengths, and
// L1-normalized RGB color histograms.

#include <cstddef>
#include <utility>
#include <vector>

#include "colocal/image.hpp"
#include "colocal/types.hpp"

namespace colocal {

struct FhParams {
  double sigma = 0.5;  // Gaussian pre-smoothing; 0 disables smoothing
  double k = 300.0;    // merge-threshold scale: tau(C) = Int(C) + k/|C|
  int min_size = 100;  // components smaller than this are merged post-hoc
};

struct Superpixel {
  int id = 0;
  std::vector<std::pair<int, int>> members;  // (x, y), raster order
  double centroid_x = 0.0;
  double centroid_y = 0.0;
  // 4 * sqrt(largest eigenvalue of the population covariance of member
  // pixel coordinates) -- the ellipse-of-same-second-moments convention.
  double major_axis = 0.0;
  // 16 bins per RGB channel concatenated (48 entries), L1-normalized.
  std::vector<double> histogram;

  std::size_t pixel_count() const { return members.size(); }
};

struct SuperpixelPartition {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<int> labels;  // row-major per-pixel superpixel id
  std::vector<Superpixel> nodes;

  int label_at(std::size_t x, std::size_t y) const {
    return labels[y * width + x];
  }
};

struct SuperpixelGraph {
  // Unordered node-id pairs stored with first < second, sorted.
  std::vector<std::pair<int, int>> edges;
};

// Segments the raster into connected components by sorted-edge merging over
// the 8-connected pixel graph (edge weight = Euclidean RGB distance after
// optional Gaussian smoothing), then folds undersized components into a
// neighbor.  The result is an exact partition of the image.
SuperpixelPartition compute_superpixels(const RgbImage& raster,
                                        const FhParams& params);

// Connects two superpixels iff their centroid distance is strictly smaller
// than the sum of their major axis lengths.
SuperpixelGraph build_adjacency(const std::vector<Superpixel>& nodes);

}  // namespace colocal
