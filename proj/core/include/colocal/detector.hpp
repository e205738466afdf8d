#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "colocal/types.hpp"

namespace colocal {

/// Linear detector over proposal features: raw response w . phi + b.
struct Detector {
  std::vector<double> w;
  double b = 0.0;
};

struct TrainConfig {
  double lambda = 1.0;           // weight of the ||w||^2 regularizer
  double epsilon = 1e-2;         // score-normalization offset
  double lr_initial = 0.1;
  double lr_decay_factor = 10.0;
  int lr_decay_every = 10;       // epochs between learning-rate divisions
  int total_epochs = 20;
  int batch_size = 16;           // images per SGD step
  // Stddev of the Gaussian weight init.  Kept small so the first steps are
  // driven by the data (the objectness prior) rather than by the sign of
  // the random draw; larger draws can push the optimizer into a basin that
  // suppresses the common direction instead of amplifying it.
  double init_sigma = 1e-3;
  std::uint64_t seed = 0;
  bool use_objectness = true;    // scale responses by proposal objectness
};

/// Nonnegative per-proposal detection confidence scores for one image.
struct ScoreVector {
  std::vector<double> s;
};

/// Scores normalized into a probability vector: p_j = (s_j + eps) / sum.
struct NormalizedScores {
  std::vector<double> p;
  double epsilon_used = 0.0;
};

struct DetectorGradient {
  std::vector<double> d_w;
  double d_b = 0.0;
};

/// Full-dataset objective after each epoch; objectives[0] is the value at
/// initialization.
struct TrainLog {
  std::vector<double> objectives;
};

/// ln(1 + e^x), evaluated as max(x,0) + log1p(e^-|x|) so it neither
/// overflows for large x nor loses the tail for very negative x.
double softplus(double x);

/// Derivative of softplus: the logistic sigmoid.
double softplus_grad(double x);

/// s_j = softplus(w . phi_j + b), times objectness_j when requested.
ScoreVector score_proposals(const Detector& d, const FeatureMatrix& feats,
                            const ProposalSet& props, bool use_objectness);

NormalizedScores normalize_scores(const ScoreVector& s, double epsilon);

/// Shannon entropy of p, in nats.
double entropy(const NormalizedScores& p);

/// Mean per-image entropy plus lambda * ||w||^2.
double objective(const Detector& d, const DatasetManifest& data,
                 const TrainConfig& cfg);

/// Analytic gradient of (1/|batch|) sum_i L(p_i) + lambda * ||w||^2 with
/// respect to (w, b). The regularizer contributes 2*lambda*w to d_w only.
DetectorGradient gradient(const Detector& d,
                          const std::vector<const ImageRecord*>& batch,
                          const TrainConfig& cfg);

/// Minibatch SGD with Gaussian init (w ~ N(0, init_sigma^2), b = 0) and a
/// stepped learning rate lr_initial / decay^floor(epoch / decay_every).
/// Deterministic for a fixed seed: init draws and per-epoch shuffles come
/// from one seeded generator and images are reduced in a fixed order.
std::pair<Detector, TrainLog> train(const DatasetManifest& data,
                                    const TrainConfig& cfg);

/// Box of the maximum-score proposal; ties go to the lowest index.
BBox select_top_proposal(const Detector& d, const ImageRecord& img,
                         bool use_objectness);

void save_detector(const std::filesystem::path& path, const Detector& d,
                   const TrainConfig& cfg);
std::pair<Detector, TrainConfig> load_detector(const std::filesystem::path& path);

}  // namespace colocal
