#pragma once

#include <cstdint>
#include <filesystem>

#include "colocal/types.hpp"

namespace colocal {

/// On-disk formats
/// ---------------
/// Manifest: a JSON document listing every image of the set. Per image:
/// id, width, height, relative paths to the proposal and feature files,
/// an optional raster path (PNG or P6 PPM) and optional ground-truth
/// boxes ([x_min, y_min, x_max, y_max], exclusive max).
///
/// Proposals: one proposal per line, `x_min y_min x_max y_max objectness`.
///
/// Features: binary, magic "CLF1", then little-endian u32 rows, u32 dim,
/// then rows*dim little-endian 32-bit floats, row-major.

inline constexpr int kDefaultProposalCap = 2000;

/// Loads and fully validates a dataset. Every invariant (unique ids,
/// proposal/feature alignment, boxes in bounds, raster dimensions,
/// objectness range) is checked eagerly; violations throw with the
/// offending image id and field in the message.
///
/// Each image's proposal list and feature rows are truncated to the first
/// `max_proposals` entries after the file-level alignment check, mirroring
/// the fixed upstream budget of proposals per image.
DatasetManifest load_manifest(const std::filesystem::path& path,
                              int max_proposals = kDefaultProposalCap);

FeatureMatrix load_features(const std::filesystem::path& path);
void save_features(const std::filesystem::path& path, const FeatureMatrix& m);

/// max_proposals == 0 means no cap.
ProposalSet load_proposals(const std::filesystem::path& path,
                           int max_proposals = 0);
void save_proposals(const std::filesystem::path& path, const ProposalSet& props);

/// Writes the manifest document for `ds`, with per-image payload files
/// assumed to live next to it under the names used by the generator.
void save_manifest(const std::filesystem::path& path, const DatasetManifest& ds);

struct SynthConfig {
  int num_images = 50;
  int proposals_per_image = 100;  // >= 2
  int feature_dim = 64;           // >= 1
  double signal_strength = 30.0;
  double noise_scale = 1.0;
  std::uint64_t seed = 0;
  int width = 128;
  int height = 96;
  bool emit_rasters = true;
};

/// Writes a planted-signal dataset under `out_dir` and returns the
/// in-memory equivalent of what was written.
///
/// Every image gets exactly one planted proposal whose feature vector is
/// signal_strength * u + noise (u a fixed unit direction drawn from the
/// seed); all other proposals draw features from isotropic noise of scale
/// noise_scale. Keep signal_strength well above noise_scale * sqrt(K): the
/// gradient of the score-entropy objective scales with feature norm, so the
/// planted direction must dominate the noise for training to lock onto it.
/// The planted box is recorded as ground truth. Planted objectness draws
/// from U(0.6, 1) against U(0.2, 1) for distractors: a weak, consistent
/// tilt (argmax objectness still picks a distractor ~98% of the time) that
/// seeds training without making the objectness baseline competitive. The
/// planted proposal's position in the list falls in the top quarter,
/// mirroring upstream proposal ranking, so truncating to a quarter of the
/// budget keeps it. When emit_rasters is set, a PPM raster is written with
/// the planted box filled in a color distinct from the background.
///
/// Output is byte-deterministic given the config.
DatasetManifest generate_synthetic(const SynthConfig& config,
                                   const std::filesystem::path& out_dir);

}  // namespace colocal
