#include "colocal/segmentation.hpp"

#include <algorithm>
#include <limits>

namespace colocal {

Mode parse_mode(const std::string& name) {
  if (name == "our-sel") return Mode::OurSel;
  if (name == "our-seg") return Mode::OurSeg;
  if (name == "obj-sel") return Mode::ObjSel;
  if (name == "obj-seg") return Mode::ObjSeg;
  throw ValidationError("unknown mode '" + name +
                        "' (expected our-sel, our-seg, obj-sel, or obj-seg)");
}

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::OurSel: return "our-sel";
    case Mode::OurSeg: return "our-seg";
    case Mode::ObjSel: return "obj-sel";
    case Mode::ObjSeg: return "obj-seg";
  }
  throw ValidationError("invalid mode value");
}

ScoreVector objectness_scores(const ImageRecord& img) {
  ScoreVector s;
  s.s.reserve(img.proposals.size());
  for (const Proposal& p : img.proposals) s.s.push_back(p.objectness);
  return s;
}

std::optional<BBox> bbox_from_labels(const LabelAssignment& labels,
                                     const std::vector<Superpixel>& nodes) {
  if (labels.labels.size() != nodes.size())
    throw ValidationError("bbox_from_labels: label/node count mismatch");
  int x_min = std::numeric_limits<int>::max();
  int y_min = std::numeric_limits<int>::max();
  int x_max = std::numeric_limits<int>::min();
  int y_max = std::numeric_limits<int>::min();
  bool any = false;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!labels.labels[i]) continue;
    any = true;
    for (auto [x, y] : nodes[i].members) {
      x_min = std::min(x_min, x);
      y_min = std::min(y_min, y);
      x_max = std::max(x_max, x + 1);
      y_max = std::max(y_max, y + 1);
    }
  }
  if (!any) return std::nullopt;
  return BBox{x_min, y_min, x_max, y_max};
}

SegmentationOutcome segment_from_scores(const ImageRecord& img,
                                        const ScoreVector& scores,
                                        const SegParams& params) {
  if (!img.raster)
    throw ValidationError("image " + img.id +
                          " has no raster; segmentation requires one");

  SegmentationOutcome out;
  out.heat = normalize_heatmap(
      accumulate_heatmap(img.width, img.height, img.proposals, scores));
  out.partition = compute_superpixels(*img.raster, params.fh);

  EnergyModel model;
  model.unary = unary_potentials(out.partition.nodes, out.heat, params.clamp_delta);
  SuperpixelGraph graph = build_adjacency(out.partition.nodes);
  model.pairwise = pairwise_weights(out.partition.nodes, graph, params.beta);

  out.labels = min_cut_segment(model);
  out.box = bbox_from_labels(out.labels, out.partition.nodes);
  return out;
}

GrayImage foreground_mask(const SuperpixelPartition& partition,
                          const LabelAssignment& labels) {
  GrayImage mask;
  mask.width = partition.width;
  mask.height = partition.height;
  mask.data.resize(partition.labels.size());
  for (std::size_t i = 0; i < partition.labels.size(); ++i)
    mask.data[i] = labels.labels[partition.labels[i]] ? 255 : 0;
  return mask;
}

namespace {

BBox top_by_scores(const ImageRecord& img, const ScoreVector& s) {
  if (img.proposals.empty())
    throw ValidationError("image " + img.id + " has no proposals");
  std::size_t best = 0;
  for (std::size_t j = 1; j < s.s.size(); ++j)
    if (s.s[j] > s.s[best]) best = j;
  return img.proposals[best].box;
}

}  // namespace

BBox localize(const Detector* d, const ImageRecord& img, Mode mode,
              const SegParams& params, bool use_objectness) {
  const bool needs_detector = (mode == Mode::OurSel || mode == Mode::OurSeg);
  if (needs_detector && d == nullptr)
    throw ValidationError("mode " + mode_name(mode) + " requires a detector");

  ScoreVector scores =
      needs_detector
          ? score_proposals(*d, img.features, img.proposals, use_objectness)
          : objectness_scores(img);

  if (mode == Mode::OurSel || mode == Mode::ObjSel)
    return top_by_scores(img, scores);

  SegmentationOutcome seg = segment_from_scores(img, scores, params);
  if (seg.box) return *seg.box;
  return top_by_scores(img, scores);
}

}  // namespace colocal
