#include "colocal/superpixels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace colocal {

namespace {

// Disjoint-set forest with per-component size and merge threshold.
class Forest {
 public:
  explicit Forest(std::size_t n, double k)
      : parent_(n), rank_(n, 0), size_(n, 1), threshold_(n, k) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  std::size_t join(std::size_t a, std::size_t b) {
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    if (rank_[a] == rank_[b]) ++rank_[a];
    return a;
  }

  std::size_t size(std::size_t root) const { return size_[root]; }
  double threshold(std::size_t root) const { return threshold_[root]; }
  void set_threshold(std::size_t root, double t) { threshold_[root] = t; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<int> rank_;
  std::vector<std::size_t> size_;
  std::vector<double> threshold_;
};

struct PixelEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  double weight = 0.0;
};

// Separable Gaussian blur with clamped borders; one channel at a time.
std::vector<double> smooth_channel(const std::vector<double>& src,
                                   std::size_t w, std::size_t h, double sigma) {
  const int half = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(half) + 1);
  double total = 0.0;
  for (int i = 0; i <= half; ++i) {
    kernel[i] = std::exp(-0.5 * (i / sigma) * (i / sigma));
    total += (i == 0) ? kernel[i] : 2.0 * kernel[i];
  }
  for (double& v : kernel) v /= total;

  std::vector<double> tmp(src.size()), dst(src.size());
  for (std::size_t y = 0; y < h; ++y) {
    const double* row = src.data() + y * w;
    for (std::size_t x = 0; x < w; ++x) {
      double acc = kernel[0] * row[x];
      for (int i = 1; i <= half; ++i) {
        std::size_t lo = (static_cast<int>(x) - i < 0) ? 0 : x - i;
        std::size_t hi = std::min(w - 1, x + i);
        acc += kernel[i] * (row[lo] + row[hi]);
      }
      tmp[y * w + x] = acc;
    }
  }
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double acc = kernel[0] * tmp[y * w + x];
      for (int i = 1; i <= half; ++i) {
        std::size_t lo = (static_cast<int>(y) - i < 0) ? 0 : y - i;
        std::size_t hi = std::min(h - 1, y + i);
        acc += kernel[i] * (tmp[lo * w + x] + tmp[hi * w + x]);
      }
      dst[y * w + x] = acc;
    }
  }
  return dst;
}

}  // namespace

SuperpixelPartition compute_superpixels(const RgbImage& raster,
                                        const FhParams& params) {
  if (raster.width == 0 || raster.height == 0)
    throw ValidationError("compute_superpixels: empty raster");
  if (params.k <= 0.0)
    throw ValidationError("compute_superpixels: k must be positive");
  if (params.min_size < 1)
    throw ValidationError("compute_superpixels: min_size must be >= 1");

  const std::size_t w = raster.width;
  const std::size_t h = raster.height;
  const std::size_t n = w * h;

  std::vector<double> chan[3];
  for (int c = 0; c < 3; ++c) {
    chan[c].resize(n);
    for (std::size_t i = 0; i < n; ++i)
      chan[c][i] = static_cast<double>(raster.data[i * 3 + c]);
    if (params.sigma > 0.0)
      chan[c] = smooth_channel(chan[c], w, h, params.sigma);
  }

  auto color_dist = [&](std::size_t i, std::size_t j) {
    double dr = chan[0][i] - chan[0][j];
    double dg = chan[1][i] - chan[1][j];
    double db = chan[2][i] - chan[2][j];
    return std::sqrt(dr * dr + dg * dg + db * db);
  };

  std::vector<PixelEdge> edges;
  edges.reserve(4 * n);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      std::size_t i = y * w + x;
      if (x + 1 < w) edges.push_back({i, i + 1, color_dist(i, i + 1)});
      if (y + 1 < h) edges.push_back({i, i + w, color_dist(i, i + w)});
      if (x + 1 < w && y + 1 < h)
        edges.push_back({i, i + w + 1, color_dist(i, i + w + 1)});
      if (x + 1 < w && y > 0)
        edges.push_back({i, i - w + 1, color_dist(i, i - w + 1)});
    }
  }
  std::sort(edges.begin(), edges.end(), [](const PixelEdge& a, const PixelEdge& b) {
    if (a.weight != b.weight) return a.weight < b.weight;
    if (a.a != b.a) return a.a < b.a;
    return a.b < b.b;
  });

  Forest forest(n, params.k);
  for (const PixelEdge& e : edges) {
    std::size_t ra = forest.find(e.a);
    std::size_t rb = forest.find(e.b);
    if (ra == rb) continue;
    if (e.weight <= forest.threshold(ra) && e.weight <= forest.threshold(rb)) {
      std::size_t r = forest.join(ra, rb);
      forest.set_threshold(
          r, e.weight + params.k / static_cast<double>(forest.size(r)));
    }
  }

  // Fold components below min_size into whichever neighbor the cheapest
  // boundary edge reaches first.
  const std::size_t min_size = static_cast<std::size_t>(params.min_size);
  for (const PixelEdge& e : edges) {
    std::size_t ra = forest.find(e.a);
    std::size_t rb = forest.find(e.b);
    if (ra != rb && (forest.size(ra) < min_size || forest.size(rb) < min_size))
      forest.join(ra, rb);
  }

  SuperpixelPartition part;
  part.width = w;
  part.height = h;
  part.labels.assign(n, -1);

  std::vector<int> root_label(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = forest.find(i);
    if (root_label[r] < 0) root_label[r] = next++;
    part.labels[i] = root_label[r];
  }

  part.nodes.resize(static_cast<std::size_t>(next));
  for (int id = 0; id < next; ++id) part.nodes[id].id = id;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      part.nodes[part.labels[y * w + x]].members.emplace_back(
          static_cast<int>(x), static_cast<int>(y));

  for (Superpixel& sp : part.nodes) {
    const double count = static_cast<double>(sp.members.size());
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    sp.histogram.assign(48, 0.0);
    for (auto [x, y] : sp.members) {
      sx += x;
      sy += y;
      sxx += static_cast<double>(x) * x;
      syy += static_cast<double>(y) * y;
      sxy += static_cast<double>(x) * y;
      const unsigned char* px =
          raster.data.data() +
          (static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)) * 3;
      for (int c = 0; c < 3; ++c) ++sp.histogram[c * 16 + px[c] / 16];
    }
    sp.centroid_x = sx / count;
    sp.centroid_y = sy / count;

    const double cxx = sxx / count - sp.centroid_x * sp.centroid_x;
    const double cyy = syy / count - sp.centroid_y * sp.centroid_y;
    const double cxy = sxy / count - sp.centroid_x * sp.centroid_y;
    const double half_trace = 0.5 * (cxx + cyy);
    const double det = cxx * cyy - cxy * cxy;
    const double disc = std::max(0.0, half_trace * half_trace - det);
    const double lambda_max = half_trace + std::sqrt(disc);
    sp.major_axis = 4.0 * std::sqrt(std::max(0.0, lambda_max));

    for (double& v : sp.histogram) v /= 3.0 * count;
  }

  return part;
}

SuperpixelGraph build_adjacency(const std::vector<Superpixel>& nodes) {
  SuperpixelGraph g;
  for (std::size_t m = 0; m < nodes.size(); ++m) {
    for (std::size_t n2 = m + 1; n2 < nodes.size(); ++n2) {
      double dx = nodes[m].centroid_x - nodes[n2].centroid_x;
      double dy = nodes[m].centroid_y - nodes[n2].centroid_y;
      double dist = std::sqrt(dx * dx + dy * dy);
      if (dist < nodes[m].major_axis + nodes[n2].major_axis)
        g.edges.emplace_back(static_cast<int>(m), static_cast<int>(n2));
    }
  }
  return g;
}

}  // namespace colocal
