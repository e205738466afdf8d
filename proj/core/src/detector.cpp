#include "colocal/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

namespace colocal {

namespace fs = std::filesystem;
using nlohmann::json;

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double softplus_grad(double x) {
  // Logistic sigmoid, stable on both tails.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

double dot_row(const std::vector<double>& w, std::span<const float> phi) {
  double acc = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * phi[k];
  return acc;
}

void check_dims(const Detector& d, const FeatureMatrix& feats,
                const ProposalSet& props, const std::string& context) {
  if (feats.dim != d.w.size())
    throw ValidationError(context + ": feature dim " +
                          std::to_string(feats.dim) + " does not match detector dim " +
                          std::to_string(d.w.size()));
  if (feats.rows != props.size())
    throw ValidationError(context + ": " + std::to_string(props.size()) +
                          " proposals vs " + std::to_string(feats.rows) +
                          " feature rows");
}

}  // namespace

ScoreVector score_proposals(const Detector& d, const FeatureMatrix& feats,
                            const ProposalSet& props, bool use_objectness) {
  check_dims(d, feats, props, "score_proposals");
  ScoreVector out;
  out.s.resize(props.size());
  for (std::size_t j = 0; j < props.size(); ++j) {
    double s = softplus(dot_row(d.w, feats.row(j)) + d.b);
    if (use_objectness) s *= props[j].objectness;
    out.s[j] = s;
  }
  return out;
}

NormalizedScores normalize_scores(const ScoreVector& s, double epsilon) {
  if (!(epsilon > 0.0))
    throw ValidationError("normalize_scores: epsilon must be positive");
  NormalizedScores out;
  out.epsilon_used = epsilon;
  out.p.resize(s.s.size());
  double total = 0.0;
  for (double v : s.s) total += v + epsilon;
  for (std::size_t j = 0; j < s.s.size(); ++j) out.p[j] = (s.s[j] + epsilon) / total;
  return out;
}

double entropy(const NormalizedScores& p) {
  double h = 0.0;
  for (double v : p.p) h -= v * std::log(v);
  return h;
}

double objective(const Detector& d, const DatasetManifest& data,
                 const TrainConfig& cfg) {
  if (data.images.empty())
    throw ValidationError("objective: empty dataset");
  double total = 0.0;
  for (const ImageRecord& img : data.images) {
    ScoreVector s =
        score_proposals(d, img.features, img.proposals, cfg.use_objectness);
    total += entropy(normalize_scores(s, cfg.epsilon));
  }
  double reg = 0.0;
  for (double v : d.w) reg += v * v;
  return total / static_cast<double>(data.images.size()) + cfg.lambda * reg;
}

DetectorGradient gradient(const Detector& d,
                          const std::vector<const ImageRecord*>& batch,
                          const TrainConfig& cfg) {
  if (batch.empty()) throw ValidationError("gradient: empty batch");
  const std::size_t K = d.w.size();
  DetectorGradient g;
  g.d_w.assign(K, 0.0);
  g.d_b = 0.0;

  for (const ImageRecord* img : batch) {
    check_dims(d, img->features, img->proposals, "gradient: image " + img->id);
    const std::size_t M = img->proposals.size();

    std::vector<double> z(M);
    ScoreVector s;
    s.s.resize(M);
    for (std::size_t j = 0; j < M; ++j) {
      z[j] = dot_row(d.w, img->features.row(j)) + d.b;
      s.s[j] = softplus(z[j]);
      if (cfg.use_objectness) s.s[j] *= img->proposals[j].objectness;
    }

    NormalizedScores np = normalize_scores(s, cfg.epsilon);
    const double ent = entropy(np);
    double total = 0.0;
    for (double v : s.s) total += v + cfg.epsilon;

    // dL/ds_j = (-ln p_j - L) / T, with T the normalization total; the
    // chain through softplus and the objectness weight follows per term.
    for (std::size_t j = 0; j < M; ++j) {
      double dl_ds = (-std::log(np.p[j]) - ent) / total;
      double a = cfg.use_objectness ? img->proposals[j].objectness : 1.0;
      double coeff = dl_ds * a * softplus_grad(z[j]);
      std::span<const float> phi = img->features.row(j);
      for (std::size_t k = 0; k < K; ++k) g.d_w[k] += coeff * phi[k];
      g.d_b += coeff;
    }
  }

  const double inv = 1.0 / static_cast<double>(batch.size());
  for (std::size_t k = 0; k < K; ++k)
    g.d_w[k] = g.d_w[k] * inv + 2.0 * cfg.lambda * d.w[k];
  g.d_b *= inv;
  return g;
}

std::pair<Detector, TrainLog> train(const DatasetManifest& data,
                                    const TrainConfig& cfg) {
  if (data.images.empty()) throw ValidationError("train: empty dataset");
  if (!(cfg.lr_initial > 0.0))
    throw ValidationError("train: lr_initial must be positive");
  if (cfg.batch_size < 1) throw ValidationError("train: batch_size must be >= 1");
  if (cfg.total_epochs < 0) throw ValidationError("train: negative epoch count");

  const std::size_t K = data.images.front().features.dim;
  for (const ImageRecord& img : data.images) {
    if (img.features.dim != K)
      throw ValidationError("train: image " + img.id + " has feature dim " +
                            std::to_string(img.features.dim) + ", expected " +
                            std::to_string(K));
  }

  std::mt19937_64 rng(cfg.seed);
  Detector d;
  d.w.assign(K, 0.0);
  if (cfg.init_sigma > 0.0) {
    std::normal_distribution<double> init(0.0, cfg.init_sigma);
    for (double& v : d.w) v = init(rng);
  }
  d.b = 0.0;

  TrainLog log;
  log.objectives.push_back(objective(d, data, cfg));

  std::vector<std::size_t> order(data.images.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < cfg.total_epochs; ++epoch) {
    const double lr =
        cfg.lr_initial /
        std::pow(cfg.lr_decay_factor,
                 cfg.lr_decay_every > 0 ? epoch / cfg.lr_decay_every : 0);
    std::shuffle(order.begin(), order.end(), rng);

    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t end = std::min(order.size(),
                                 start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<const ImageRecord*> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i)
        batch.push_back(&data.images[order[i]]);

      DetectorGradient g = gradient(d, batch, cfg);
      for (std::size_t k = 0; k < K; ++k) d.w[k] -= lr * g.d_w[k];
      d.b -= lr * g.d_b;
    }

    double obj = objective(d, data, cfg);
    if (!std::isfinite(obj))
      throw ValidationError("train: objective diverged to a non-finite value "
                            "after epoch " + std::to_string(epoch + 1));
    log.objectives.push_back(obj);
  }

  return {std::move(d), std::move(log)};
}

BBox select_top_proposal(const Detector& d, const ImageRecord& img,
                         bool use_objectness) {
  if (img.proposals.empty())
    throw ValidationError("select_top_proposal: image " + img.id +
                          " has no proposals");
  ScoreVector s = score_proposals(d, img.features, img.proposals, use_objectness);
  std::size_t best = 0;
  for (std::size_t j = 1; j < s.s.size(); ++j)
    if (s.s[j] > s.s[best]) best = j;
  return img.proposals[best].box;
}

void save_detector(const fs::path& path, const Detector& d,
                   const TrainConfig& cfg) {
  json doc;
  doc["k"] = d.w.size();
  doc["w"] = d.w;
  doc["b"] = d.b;
  doc["config"] = {{"lambda", cfg.lambda},
                   {"epsilon", cfg.epsilon},
                   {"lr_initial", cfg.lr_initial},
                   {"lr_decay_factor", cfg.lr_decay_factor},
                   {"lr_decay_every", cfg.lr_decay_every},
                   {"total_epochs", cfg.total_epochs},
                   {"batch_size", cfg.batch_size},
                   {"init_sigma", cfg.init_sigma},
                   {"seed", cfg.seed},
                   {"use_objectness", cfg.use_objectness}};
  atomic_write_file(path, doc.dump(2) + "\n");
}

std::pair<Detector, TrainConfig> load_detector(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open detector file: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("invalid detector JSON in " + path.string() + ": " + e.what());
  }
  Detector d;
  TrainConfig cfg;
  try {
    d.w = doc.at("w").get<std::vector<double>>();
    d.b = doc.at("b").get<double>();
    if (doc.at("k").get<std::size_t>() != d.w.size())
      throw ValidationError("detector file " + path.string() +
                            ": k does not match weight count");
    const json& c = doc.at("config");
    cfg.lambda = c.at("lambda").get<double>();
    cfg.epsilon = c.at("epsilon").get<double>();
    cfg.lr_initial = c.at("lr_initial").get<double>();
    cfg.lr_decay_factor = c.at("lr_decay_factor").get<double>();
    cfg.lr_decay_every = c.at("lr_decay_every").get<int>();
    cfg.total_epochs = c.at("total_epochs").get<int>();
    cfg.batch_size = c.at("batch_size").get<int>();
    cfg.init_sigma = c.at("init_sigma").get<double>();
    cfg.seed = c.at("seed").get<std::uint64_t>();
    cfg.use_objectness = c.at("use_objectness").get<bool>();
  } catch (const json::exception& e) {
    throw IoError("malformed detector file " + path.string() + ": " + e.what());
  }
  for (double v : d.w)
    if (!std::isfinite(v))
      throw ValidationError("detector file " + path.string() +
                            ": non-finite weight");
  if (!std::isfinite(d.b))
    throw ValidationError("detector file " + path.string() + ": non-finite bias");
  return {std::move(d), cfg};
}

}  // namespace colocal
