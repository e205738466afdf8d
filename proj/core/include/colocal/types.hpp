#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "colocal/image.hpp"

namespace colocal {

/// Raised when an on-disk artifact cannot be read or written.
class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when loaded data violates a documented invariant.
class ValidationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Axis-aligned box in pixel coordinates. Max coordinates are exclusive,
/// so area() = (x_max - x_min) * (y_max - y_min) with no +-1 terms.
struct BBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  int width() const { return x_max - x_min; }
  int height() const { return y_max - y_min; }
  std::int64_t area() const {
    return static_cast<std::int64_t>(width()) * height();
  }
  bool valid() const {
    return x_min >= 0 && y_min >= 0 && x_max > x_min && y_max > y_min;
  }
  bool contains_pixel(int x, int y) const {
    return x >= x_min && x < x_max && y >= y_min && y < y_max;
  }
  /// Closed-region containment: shared edges count as contained.
  bool contains_box(const BBox& inner) const {
    return inner.x_min >= x_min && inner.y_min >= y_min &&
           inner.x_max <= x_max && inner.y_max <= y_max;
  }

  bool operator==(const BBox&) const = default;
};

/// A candidate object box with its upstream objectness score in [0, 1].
struct Proposal {
  BBox box;
  double objectness = 0.0;

  bool operator==(const Proposal&) const = default;
};

using ProposalSet = std::vector<Proposal>;

/// Dense row-major feature matrix; row j describes proposal j.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<float> data;

  std::span<const float> row(std::size_t j) const {
    return {data.data() + j * dim, dim};
  }

  bool operator==(const FeatureMatrix&) const = default;
};

struct ImageRecord {
  std::string id;
  int width = 0;
  int height = 0;
  ProposalSet proposals;
  FeatureMatrix features;
  std::optional<RgbImage> raster;
  std::vector<BBox> ground_truth;

  bool operator==(const ImageRecord&) const = default;
};

struct DatasetManifest {
  std::vector<ImageRecord> images;

  std::size_t size() const { return images.size(); }

  bool operator==(const DatasetManifest&) const = default;
};

}  // namespace colocal
