#pragma once

// Per-image localization: turns proposal scores into a heat map, segments it
// over a superpixel graph by exact min-cut, and extracts the tight box around
// the foreground.  Also hosts the four localization modes.

#include <optional>
#include <string>

#include "colocal/detector.hpp"
#include "colocal/energy.hpp"
#include "colocal/heatmap.hpp"
#include "colocal/superpixels.hpp"
#include "colocal/types.hpp"

namespace colocal {

// our-sel: top detector-scored proposal.     our-seg: detector + cut chain.
// obj-sel: top objectness proposal.          obj-seg: objectness + cut chain.
enum class Mode { OurSel, OurSeg, ObjSel, ObjSeg };

Mode parse_mode(const std::string& name);          // throws on unknown name
std::string mode_name(Mode mode);

struct SegParams {
  FhParams fh;
  double beta = 10.0;         // histogram-distance scale in the pairwise term
  double clamp_delta = 1e-4;  // unary clamp bound
};

struct SegmentationOutcome {
  HeatMap heat;                  // normalized to [0, 1]
  SuperpixelPartition partition;
  LabelAssignment labels;        // per-superpixel, 1 = foreground
  std::optional<BBox> box;       // empty when no superpixel is foreground
};

// Proposal objectness reinterpreted as a score vector (obj-* modes).
ScoreVector objectness_scores(const ImageRecord& img);

// Tight box around all pixels of foreground-labeled superpixels; nullopt
// when the foreground is empty (callers fall back to the top proposal).
std::optional<BBox> bbox_from_labels(const LabelAssignment& labels,
                                     const std::vector<Superpixel>& nodes);

// Full chain on one image: heat map from the given scores, superpixels from
// the raster, unary/pairwise energy, min-cut, box extraction.
SegmentationOutcome segment_from_scores(const ImageRecord& img,
                                        const ScoreVector& scores,
                                        const SegParams& params);

// Binary mask (255 foreground / 0 background) from a segmentation outcome.
GrayImage foreground_mask(const SuperpixelPartition& partition,
                          const LabelAssignment& labels);

// Mode dispatch.  The detector may be null for obj-* modes; -seg modes
// require a raster and fall back to the top-scoring proposal when the cut
// labels nothing foreground.
BBox localize(const Detector* d, const ImageRecord& img, Mode mode,
              const SegParams& params, bool use_objectness = true);

}  // namespace colocal
