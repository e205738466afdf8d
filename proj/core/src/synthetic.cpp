#include <algorithm>
#include <random>

#include "colocal/dataset.hpp"

namespace colocal {

namespace fs = std::filesystem;

namespace {

constexpr std::uint8_t kBackground[3] = {70, 90, 110};
constexpr std::uint8_t kPlantedColor[3] = {220, 80, 60};

std::string image_id(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "img%04d", index);
  return buf;
}

BBox sample_box(std::mt19937_64& rng, int img_w, int img_h, int min_frac_den,
                int max_frac_den) {
  // Side lengths between 1/min_frac_den and 1/max_frac_den of the image.
  std::uniform_int_distribution<int> wd(std::max(2, img_w / min_frac_den),
                                        std::max(2, img_w / max_frac_den));
  std::uniform_int_distribution<int> hd(std::max(2, img_h / min_frac_den),
                                        std::max(2, img_h / max_frac_den));
  int bw = wd(rng);
  int bh = hd(rng);
  std::uniform_int_distribution<int> xd(0, img_w - bw);
  std::uniform_int_distribution<int> yd(0, img_h - bh);
  int x0 = xd(rng);
  int y0 = yd(rng);
  return BBox{x0, y0, x0 + bw, y0 + bh};
}

}  // namespace

DatasetManifest generate_synthetic(const SynthConfig& config,
                                   const fs::path& out_dir) {
  if (config.num_images < 1)
    throw ValidationError("synth config: need at least 1 image");
  if (config.proposals_per_image < 2)
    throw ValidationError("synth config: need at least 2 proposals per image");
  if (config.feature_dim < 1)
    throw ValidationError("synth config: feature dim must be >= 1");
  if (config.width < 8 || config.height < 8)
    throw ValidationError("synth config: image size must be at least 8x8");
  if (config.noise_scale < 0.0 || !std::isfinite(config.signal_strength))
    throw ValidationError("synth config: bad signal/noise parameters");

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  // Objectness mimics a proposal ranker: boxes on the real object rate a bit
  // higher on average, but the top-objectness proposal is almost always a
  // distractor (with 99 draws from U(0.2, 1), the max beats the planted
  // proposal's U(0.6, 1) draw ~98% of the time).  That consistent-but-weak
  // tilt is what score-distribution training amplifies and argmax-objectness
  // selection cannot use; without it the entropy objective has no preferred
  // sign along the common direction and training collapses for some seeds.
  std::uniform_real_distribution<double> objectness_dist(0.2, 1.0);
  std::uniform_real_distribution<double> planted_objectness_dist(0.6, 1.0);

  const int K = config.feature_dim;
  const int M = config.proposals_per_image;

  // Common direction shared by every planted proposal.
  std::vector<double> u(static_cast<std::size_t>(K));
  double norm = 0.0;
  for (double& v : u) {
    v = gauss(rng);
    norm += v * v;
  }
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    u[0] = 1.0;
    norm = 1.0;
  }
  for (double& v : u) v /= norm;

  // Upstream proposal generators rank well-covering boxes near the top, so
  // the planted proposal lands in the top quarter of the list. That keeps
  // cap truncation from deleting the only informative proposal.
  const int planted_span = std::max(1, (M + 3) / 4);
  std::uniform_int_distribution<int> planted_dist(0, planted_span - 1);

  DatasetManifest ds;
  for (int i = 0; i < config.num_images; ++i) {
    ImageRecord img;
    img.id = image_id(i);
    img.width = config.width;
    img.height = config.height;

    const int planted = planted_dist(rng);

    img.proposals.resize(static_cast<std::size_t>(M));
    for (int j = 0; j < M; ++j) {
      img.proposals[static_cast<std::size_t>(j)].box =
          (j == planted) ? sample_box(rng, config.width, config.height, 3, 2)
                         : sample_box(rng, config.width, config.height, 8, 2);
    }
    img.ground_truth.push_back(img.proposals[static_cast<std::size_t>(planted)].box);

    img.features.rows = static_cast<std::size_t>(M);
    img.features.dim = static_cast<std::size_t>(K);
    img.features.data.resize(static_cast<std::size_t>(M) * K);
    for (int j = 0; j < M; ++j) {
      for (int k = 0; k < K; ++k) {
        double v = config.noise_scale * gauss(rng);
        if (j == planted) v += config.signal_strength * u[static_cast<std::size_t>(k)];
        img.features.data[static_cast<std::size_t>(j) * K + k] =
            static_cast<float>(v);
      }
    }

    for (int j = 0; j < M; ++j)
      img.proposals[static_cast<std::size_t>(j)].objectness =
          (j == planted) ? planted_objectness_dist(rng) : objectness_dist(rng);

    if (config.emit_rasters) {
      RgbImage raster = RgbImage::filled(config.width, config.height,
                                         kBackground[0], kBackground[1],
                                         kBackground[2]);
      const BBox& box = img.ground_truth.front();
      for (int y = box.y_min; y < box.y_max; ++y) {
        for (int x = box.x_min; x < box.x_max; ++x) {
          std::uint8_t* px = raster.pixel(x, y);
          px[0] = kPlantedColor[0];
          px[1] = kPlantedColor[1];
          px[2] = kPlantedColor[2];
        }
      }
      img.raster = std::move(raster);
    }

    save_proposals(out_dir / (img.id + ".props"), img.proposals);
    save_features(out_dir / (img.id + ".clf"), img.features);
    if (img.raster) write_ppm(out_dir / (img.id + ".ppm"), *img.raster);

    ds.images.push_back(std::move(img));
  }

  save_manifest(out_dir / "manifest", ds);
  return ds;
}

}  // namespace colocal
