#pragma once

// Detection heat maps: per-pixel accumulation of proposal scores followed by
// min-max normalization.  Every pixel of a W x H map collects the sum of the
// scores of all proposals whose box covers it; pixels covered by no proposal
// stay exactly zero.

#include <cstddef>
#include <vector>

#include "colocal/detector.hpp"
#include "colocal/image.hpp"
#include "colocal/types.hpp"

namespace colocal {

struct HeatMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;  // row-major, width * height entries

  double& at(std::size_t x, std::size_t y) { return values[y * width + x]; }
  double at(std::size_t x, std::size_t y) const { return values[y * width + x]; }
};

// Sums score[j] into every pixel inside proposals[j].box.  Boxes must lie
// within the W x H canvas and scores must align one-to-one with proposals.
HeatMap accumulate_heatmap(std::size_t width, std::size_t height,
                           const ProposalSet& proposals, const ScoreVector& scores);

// Affine rescale onto [0, 1]: (v - min) / (max - min).  A constant map
// (max == min) normalizes to all zeros.
HeatMap normalize_heatmap(const HeatMap& raw);

// Renders a normalized map as an 8-bit grayscale image, rounding half up
// (v * 255 + 0.5 truncated).  Values are expected in [0, 1].
GrayImage heatmap_to_gray(const HeatMap& normalized);

}  // namespace colocal
