#pragma once

// Localization scoring: IoU, CorLoc (strict ">" against the threshold, so an
// IoU of exactly 0.5 does not count at threshold 0.5), CorLoc curves over a
// threshold sweep, and the five-way error diagnosis of a prediction against
// its best-matching ground-truth box.

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "colocal/types.hpp"

namespace colocal {

double iou(const BBox& a, const BBox& b);

// Fraction of images whose prediction has max-over-ground-truth IoU strictly
// above `threshold`.  preds[i] pairs with gts[i]; every image needs >= 1
// ground-truth box.
double corloc(const std::vector<BBox>& preds,
              const std::vector<std::vector<BBox>>& gts, double threshold);

struct CorLocCurve {
  std::vector<double> thresholds;  // ascending, evenly spaced over [0, 1]
  std::vector<double> values;      // non-increasing
};

CorLocCurve corloc_curve(const std::vector<BBox>& preds,
                         const std::vector<std::vector<BBox>>& gts,
                         int num_points);

enum class ErrorMode { Correct, GtInHypothesis, HypothesisInGt, NoOverlap, LowOverlap };
constexpr std::size_t kNumErrorModes = 5;

std::string error_mode_name(ErrorMode mode);

// Diagnosis against the max-IoU ground truth: Correct when IoU > 0.5;
// otherwise containment of that ground truth in the prediction, then the
// reverse (closed regions, shared edges count); NoOverlap when max IoU is 0;
// everything else is LowOverlap.
ErrorMode diagnose(const BBox& pred, const std::vector<BBox>& gts);

//
// Prediction and report artifacts.
//

struct Prediction {
  std::string id;
  BBox box;
  std::string mode;
};
using PredictionSet = std::vector<Prediction>;

// One line per image: `id x_min y_min x_max y_max mode`.
void save_predictions(const std::filesystem::path& path, const PredictionSet& preds);
PredictionSet load_predictions(const std::filesystem::path& path);

struct ImageEval {
  std::string id;
  BBox box;
  double iou = 0.0;  // against the best ground truth
  ErrorMode mode = ErrorMode::NoOverlap;
};

struct EvaluationReport {
  double threshold = 0.5;
  double corloc = 0.0;
  CorLocCurve curve;
  std::array<std::size_t, kNumErrorModes> mode_counts{};
  std::vector<ImageEval> images;
};

// Joins predictions with manifest ground truth by image id.  Unknown or
// duplicate ids and images without ground truth are errors naming the id.
EvaluationReport build_report(const PredictionSet& preds,
                              const DatasetManifest& data, double threshold,
                              int curve_points);

void save_report(const std::filesystem::path& path, const EvaluationReport& report);

}  // namespace colocal
