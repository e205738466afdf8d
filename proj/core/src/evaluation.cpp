#include "colocal/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "colocal/image.hpp"

namespace colocal {

namespace fs = std::filesystem;
using nlohmann::json;

double iou(const BBox& a, const BBox& b) {
  if (!a.valid() || !b.valid())
    throw ValidationError("iou: degenerate box");
  const int ix = std::max(0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
  const int iy = std::max(0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
  const long long inter = static_cast<long long>(ix) * iy;
  const long long uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

double best_iou(const BBox& pred, const std::vector<BBox>& gts) {
  double best = 0.0;
  for (const BBox& gt : gts) best = std::max(best, iou(pred, gt));
  return best;
}

void check_aligned(const std::vector<BBox>& preds,
                   const std::vector<std::vector<BBox>>& gts) {
  if (preds.size() != gts.size())
    throw ValidationError("corloc: " + std::to_string(preds.size()) +
                          " predictions vs " + std::to_string(gts.size()) +
                          " ground-truth sets");
  for (std::size_t i = 0; i < gts.size(); ++i)
    if (gts[i].empty())
      throw ValidationError("corloc: image " + std::to_string(i) +
                            " has no ground-truth box");
}

}  // namespace

double corloc(const std::vector<BBox>& preds,
              const std::vector<std::vector<BBox>>& gts, double threshold) {
  check_aligned(preds, gts);
  if (preds.empty()) throw ValidationError("corloc: no predictions");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (best_iou(preds[i], gts[i]) > threshold) ++hits;
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

CorLocCurve corloc_curve(const std::vector<BBox>& preds,
                         const std::vector<std::vector<BBox>>& gts,
                         int num_points) {
  if (num_points < 2)
    throw ValidationError("corloc_curve: need at least 2 points");
  CorLocCurve curve;
  curve.thresholds.resize(static_cast<std::size_t>(num_points));
  curve.values.resize(static_cast<std::size_t>(num_points));
  for (int i = 0; i < num_points; ++i) {
    double t = static_cast<double>(i) / static_cast<double>(num_points - 1);
    curve.thresholds[static_cast<std::size_t>(i)] = t;
    curve.values[static_cast<std::size_t>(i)] = corloc(preds, gts, t);
  }
  return curve;
}

std::string error_mode_name(ErrorMode mode) {
  switch (mode) {
    case ErrorMode::Correct: return "correct";
    case ErrorMode::GtInHypothesis: return "gt_in_hypothesis";
    case ErrorMode::HypothesisInGt: return "hypothesis_in_gt";
    case ErrorMode::NoOverlap: return "no_overlap";
    case ErrorMode::LowOverlap: return "low_overlap";
  }
  throw ValidationError("invalid error mode value");
}

ErrorMode diagnose(const BBox& pred, const std::vector<BBox>& gts) {
  if (gts.empty()) throw ValidationError("diagnose: no ground-truth boxes");
  std::size_t best = 0;
  double best_v = -1.0;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    double v = iou(pred, gts[i]);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  const BBox& gt = gts[best];
  if (best_v > 0.5) return ErrorMode::Correct;
  if (pred.contains_box(gt)) return ErrorMode::GtInHypothesis;
  if (gt.contains_box(pred)) return ErrorMode::HypothesisInGt;
  if (best_v == 0.0) return ErrorMode::NoOverlap;
  return ErrorMode::LowOverlap;
}

void save_predictions(const fs::path& path, const PredictionSet& preds) {
  std::string out;
  for (const Prediction& p : preds) {
    out += p.id;
    out += ' ';
    out += std::to_string(p.box.x_min);
    out += ' ';
    out += std::to_string(p.box.y_min);
    out += ' ';
    out += std::to_string(p.box.x_max);
    out += ' ';
    out += std::to_string(p.box.y_max);
    out += ' ';
    out += p.mode;
    out += '\n';
  }
  atomic_write_file(path, out);
}

PredictionSet load_predictions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open predictions file: " + path.string());
  PredictionSet preds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    Prediction p;
    if (!(ss >> p.id >> p.box.x_min >> p.box.y_min >> p.box.x_max >>
          p.box.y_max >> p.mode))
      throw IoError("malformed prediction at " + path.string() + ":" +
                    std::to_string(line_no));
    if (!p.box.valid())
      throw ValidationError("degenerate predicted box at " + path.string() +
                            ":" + std::to_string(line_no));
    preds.push_back(std::move(p));
  }
  if (preds.empty())
    throw IoError("predictions file is empty: " + path.string());
  return preds;
}

EvaluationReport build_report(const PredictionSet& preds,
                              const DatasetManifest& data, double threshold,
                              int curve_points) {
  std::map<std::string, const ImageRecord*> by_id;
  for (const ImageRecord& img : data.images) by_id[img.id] = &img;

  EvaluationReport report;
  report.threshold = threshold;

  std::vector<BBox> boxes;
  std::vector<std::vector<BBox>> gts;
  std::map<std::string, bool> seen;
  for (const Prediction& p : preds) {
    auto it = by_id.find(p.id);
    if (it == by_id.end())
      throw ValidationError("prediction for unknown image id '" + p.id + "'");
    if (seen[p.id])
      throw ValidationError("duplicate prediction for image id '" + p.id + "'");
    seen[p.id] = true;
    const ImageRecord& img = *it->second;
    if (img.ground_truth.empty())
      throw ValidationError("image '" + p.id + "' has no ground-truth box");

    ImageEval ev;
    ev.id = p.id;
    ev.box = p.box;
    ev.iou = best_iou(p.box, img.ground_truth);
    ev.mode = diagnose(p.box, img.ground_truth);
    ++report.mode_counts[static_cast<std::size_t>(ev.mode)];
    report.images.push_back(std::move(ev));

    boxes.push_back(p.box);
    gts.push_back(img.ground_truth);
  }

  report.corloc = corloc(boxes, gts, threshold);
  report.curve = corloc_curve(boxes, gts, curve_points);
  return report;
}

void save_report(const fs::path& path, const EvaluationReport& report) {
  json doc;
  doc["threshold"] = report.threshold;
  doc["corloc"] = report.corloc;
  doc["num_images"] = report.images.size();
  doc["curve"] = {{"thresholds", report.curve.thresholds},
                  {"values", report.curve.values}};

  json modes = json::object();
  json fractions = json::object();
  const double total = static_cast<double>(report.images.size());
  for (std::size_t m = 0; m < kNumErrorModes; ++m) {
    std::string name = error_mode_name(static_cast<ErrorMode>(m));
    modes[name] = report.mode_counts[m];
    fractions[name] = static_cast<double>(report.mode_counts[m]) / total;
  }
  doc["mode_counts"] = modes;
  doc["mode_fractions"] = fractions;

  json images = json::array();
  for (const ImageEval& ev : report.images) {
    images.push_back({{"id", ev.id},
                      {"box", {ev.box.x_min, ev.box.y_min, ev.box.x_max, ev.box.y_max}},
                      {"iou", ev.iou},
                      {"mode", error_mode_name(ev.mode)}});
  }
  doc["images"] = images;

  atomic_write_file(path, doc.dump(2) + "\n");
}

}  // namespace colocal
