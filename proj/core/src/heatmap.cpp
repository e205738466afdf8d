#include "colocal/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace colocal {

HeatMap accumulate_heatmap(std::size_t width, std::size_t height,
                           const ProposalSet& proposals,
                           const ScoreVector& scores) {
  if (width == 0 || height == 0)
    throw ValidationError("accumulate_heatmap: empty canvas");
  if (scores.s.size() != proposals.size())
    throw ValidationError("accumulate_heatmap: " +
                          std::to_string(scores.s.size()) + " scores for " +
                          std::to_string(proposals.size()) + " proposals");

  HeatMap map;
  map.width = width;
  map.height = height;
  map.values.assign(width * height, 0.0);

  for (std::size_t j = 0; j < proposals.size(); ++j) {
    const BBox& b = proposals[j].box;
    if (b.x_min < 0 || b.y_min < 0 ||
        b.x_max > static_cast<int>(width) || b.y_max > static_cast<int>(height))
      throw ValidationError("accumulate_heatmap: proposal " +
                            std::to_string(j) + " exceeds the canvas");
    const double s = scores.s[j];
    for (int y = b.y_min; y < b.y_max; ++y) {
      double* row = map.values.data() + static_cast<std::size_t>(y) * width;
      for (int x = b.x_min; x < b.x_max; ++x) row[x] += s;
    }
  }
  return map;
}

HeatMap normalize_heatmap(const HeatMap& raw) {
  if (raw.values.empty())
    throw ValidationError("normalize_heatmap: empty map");
  auto [lo_it, hi_it] = std::minmax_element(raw.values.begin(), raw.values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;

  HeatMap out;
  out.width = raw.width;
  out.height = raw.height;
  out.values.assign(raw.values.size(), 0.0);
  if (hi > lo) {
    const double span = hi - lo;
    for (std::size_t i = 0; i < raw.values.size(); ++i)
      out.values[i] = (raw.values[i] - lo) / span;
  }
  return out;
}

GrayImage heatmap_to_gray(const HeatMap& normalized) {
  GrayImage img;
  img.width = normalized.width;
  img.height = normalized.height;
  img.data.resize(normalized.values.size());
  for (std::size_t i = 0; i < normalized.values.size(); ++i) {
    double v = std::clamp(normalized.values[i], 0.0, 1.0);
    img.data[i] = static_cast<unsigned char>(v * 255.0 + 0.5);
  }
  return img;
}

}  // namespace colocal
