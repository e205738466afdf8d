// Microbenchmarks for the hot paths: proposal scoring, gradient evaluation,
// heat-map accumulation, superpixel extraction, and the max-flow cut.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "colocal/detector.hpp"
#include "colocal/energy.hpp"
#include "colocal/heatmap.hpp"
#include "colocal/superpixels.hpp"
#include "colocal/types.hpp"

using namespace colocal;

namespace {

ImageRecord random_image(std::mt19937_64& rng, int m, int k, int w, int h) {
  std::uniform_real_distribution<double> obj(0.05, 1.0);
  std::normal_distribution<float> feat(0.0f, 1.0f);
  std::uniform_int_distribution<int> x0(0, w - 2), y0(0, h - 2);
  ImageRecord img;
  img.id = "bench";
  img.width = w;
  img.height = h;
  img.features.rows = static_cast<std::size_t>(m);
  img.features.dim = static_cast<std::size_t>(k);
  for (int j = 0; j < m; ++j) {
    int xa = x0(rng), ya = y0(rng);
    std::uniform_int_distribution<int> x1(xa + 1, w), y1(ya + 1, h);
    img.proposals.push_back({BBox{xa, ya, x1(rng), y1(rng)}, obj(rng)});
    for (int c = 0; c < k; ++c) img.features.data.push_back(feat(rng));
  }
  return img;
}

Detector random_detector(std::mt19937_64& rng, int k) {
  std::normal_distribution<double> g(0.0, 0.5);
  Detector d;
  for (int j = 0; j < k; ++j) d.w.push_back(g(rng));
  d.b = g(rng);
  return d;
}

RgbImage noisy_raster(std::mt19937_64& rng, int w, int h) {
  std::uniform_int_distribution<int> jitter(-20, 20);
  RgbImage img = RgbImage::filled(w, h, 0, 0, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      // Two flat regions plus pixel noise: realistic merge work for the
      // segmentation without being trivially uniform.
      int base = (x * 3 < w * 2 && y * 3 < h * 2) ? 180 : 70;
      for (int c = 0; c < 3; ++c) {
        int v = base + jitter(rng);
        img.pixel(x, y)[c] = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
      }
    }
  return img;
}

void bm_score_proposals(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const int m = static_cast<int>(state.range(0));
  ImageRecord img = random_image(rng, m, 64, 128, 96);
  Detector d = random_detector(rng, 64);
  for (auto _ : state) {
    ScoreVector s = score_proposals(d, img.features, img.proposals, true);
    benchmark::DoNotOptimize(s.s.data());
  }
  state.SetItemsProcessed(state.iterations() * m);
}

void bm_gradient(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const int batch_size = static_cast<int>(state.range(0));
  std::vector<ImageRecord> imgs;
  for (int i = 0; i < batch_size; ++i)
    imgs.push_back(random_image(rng, 100, 64, 128, 96));
  std::vector<const ImageRecord*> batch;
  for (const ImageRecord& img : imgs) batch.push_back(&img);
  Detector d = random_detector(rng, 64);
  TrainConfig cfg;
  for (auto _ : state) {
    DetectorGradient g = gradient(d, batch, cfg);
    benchmark::DoNotOptimize(g.d_w.data());
  }
  state.SetItemsProcessed(state.iterations() * batch_size);
}

void bm_heatmap(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const int m = static_cast<int>(state.range(0));
  ImageRecord img = random_image(rng, m, 2, 128, 96);
  Detector d = random_detector(rng, 2);
  ScoreVector s = score_proposals(d, img.features, img.proposals, true);
  for (auto _ : state) {
    HeatMap heat = normalize_heatmap(
        accumulate_heatmap(128, 96, img.proposals, s));
    benchmark::DoNotOptimize(heat.values.data());
  }
  state.SetItemsProcessed(state.iterations() * m);
}

void bm_superpixels(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const int w = static_cast<int>(state.range(0));
  const int h = w * 3 / 4;
  RgbImage raster = noisy_raster(rng, w, h);
  FhParams params;
  for (auto _ : state) {
    SuperpixelPartition part = compute_superpixels(raster, params);
    benchmark::DoNotOptimize(part.labels.data());
  }
  state.SetItemsProcessed(state.iterations() * w * h);
}

void bm_min_cut(benchmark::State& state) {
  std::mt19937_64 rng(5);
  const int n = static_cast<int>(state.range(0));
  std::uniform_real_distribution<double> cost(0.0, 5.0), weight(0.0, 2.0);
  std::uniform_int_distribution<int> node(0, n - 1);
  EnergyModel model;
  for (int i = 0; i < n; ++i) model.unary.push_back({cost(rng), cost(rng)});
  for (int e = 0; e < 4 * n; ++e) {
    int a = node(rng), b = node(rng);
    if (a == b) continue;
    model.pairwise.push_back({std::min(a, b), std::max(a, b), weight(rng)});
  }
  for (auto _ : state) {
    LabelAssignment out = min_cut_segment(model);
    benchmark::DoNotOptimize(out.labels.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}

BENCHMARK(bm_score_proposals)->Arg(100)->Arg(1000);
BENCHMARK(bm_gradient)->Arg(1)->Arg(16);
BENCHMARK(bm_heatmap)->Arg(100)->Arg(1000);
BENCHMARK(bm_superpixels)->Arg(128)->Arg(256);
BENCHMARK(bm_min_cut)->Arg(64)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
