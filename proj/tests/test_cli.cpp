#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "colocal/dataset.hpp"
#include "colocal/detector.hpp"
#include "colocal/evaluation.hpp"
#include "colocal/image.hpp"
#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"

using namespace colocal;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int status = -1;
  std::string output;
};

CliResult run_cli(const std::string& args, const fs::path& scratch) {
  fs::path log = scratch / "cli-output.log";
  std::string cmd = std::string("\"") + COLOCAL_CLI_PATH + "\" " + args + " > \"" +
                    log.string() + "\" 2>&1";
  int rc = std::system(cmd.c_str());
  CliResult result;
  if (rc != -1 && WIFEXITED(rc)) result.status = WEXITSTATUS(rc);
  result.output = oracle::read_file(log);
  return result;
}

std::vector<double> read_log_values(const fs::path& p) {
  std::ifstream in(p);
  std::vector<double> values;
  double v;
  while (in >> v) values.push_back(v);
  return values;
}

// Single-image dataset: hot color region, one proposal on it, one distractor;
// features rigged so w = (1, 0) fires on the region proposal only.
BBox write_hot_fixture(const fs::path& dir) {
  const BBox region{16, 12, 40, 36};
  ImageRecord img = oracle::make_image(
      "hot", 64, 48, {{region, 0.9}, {{2, 2, 12, 10}, 0.8}}, 2,
      {10.0f, 0.0f, -10.0f, 0.0f});
  img.ground_truth = {region};
  RgbImage raster = RgbImage::filled(64, 48, 60, 90, 120);
  for (int y = region.y_min; y < region.y_max; ++y)
    for (int x = region.x_min; x < region.x_max; ++x) {
      std::uint8_t* px = raster.pixel(x, y);
      px[0] = 230;
      px[1] = 70;
      px[2] = 50;
    }
  img.raster = std::move(raster);

  fs::create_directories(dir);
  save_proposals(dir / "hot.props", img.proposals);
  save_features(dir / "hot.clf", img.features);
  write_ppm(dir / "hot.ppm", *img.raster);
  DatasetManifest ds;
  ds.images.push_back(std::move(img));
  save_manifest(dir / "manifest", ds);

  Detector d{{1.0, 0.0}, 0.0};
  save_detector(dir / "detector.json", d, TrainConfig{});
  return region;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("usage errors exit nonzero") {
  oracle::TempDir tmp("cli-usage");
  CHECK(run_cli("", tmp.path()).status != 0);
  CHECK(run_cli("no-such-command", tmp.path()).status != 0);

  CliResult m1 = run_cli("synth --out " + q(tmp.path() / "ds") + " --m 1",
                         tmp.path());
  CHECK(m1.status == 1);
  CHECK(m1.output.find("at least 2 proposals") != std::string::npos);
}

TEST_CASE("synth is deterministic across invocations") {
  oracle::TempDir tmp("cli-synth");
  std::string flags = " --n 4 --m 20 --k 8 --seed 123";
  CHECK(run_cli("synth --out " + q(tmp.path() / "a") + flags, tmp.path()).status == 0);
  CHECK(run_cli("synth --out " + q(tmp.path() / "b") + flags, tmp.path()).status == 0);

  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(tmp.path() / "a")) {
    ++files;
    fs::path twin = tmp.path() / "b" / entry.path().filename();
    REQUIRE(fs::exists(twin));
    CHECK(oracle::read_file(entry.path()) == oracle::read_file(twin));
  }
  CHECK(files == 4 * 3 + 1);
}

TEST_CASE("the full pipeline runs end to end") {
  oracle::TempDir tmp("cli-pipeline");
  fs::path ds = tmp.path() / "ds";
  REQUIRE(run_cli("synth --out " + q(ds) + " --seed 7", tmp.path()).status == 0);

  // train: 21-entry decreasing log plus a loadable detector.
  fs::path tdir = tmp.path() / "trained";
  CliResult trained = run_cli(
      "train --manifest " + q(ds / "manifest") + " --out " + q(tdir) + " --seed 0",
      tmp.path());
  CHECK(trained.status == 0);
  CHECK(trained.output.find("trained on 50 images") != std::string::npos);
  std::vector<double> log = read_log_values(tdir / "train_log.txt");
  REQUIRE(log.size() == 21);
  CHECK(log.back() < log.front());
  auto [d, cfg] = load_detector(tdir / "detector.json");
  CHECK(d.w.size() == 64);

  // localize our-sel, then evaluate: the planted dataset is solved.
  fs::path ldir = tmp.path() / "loc";
  CHECK(run_cli("localize --manifest " + q(ds / "manifest") + " --detector " +
                    q(tdir / "detector.json") + " --mode our-sel --out " + q(ldir),
                tmp.path()).status == 0);
  PredictionSet preds = load_predictions(ldir / "predictions.txt");
  REQUIRE(preds.size() == 50);
  for (const Prediction& p : preds) CHECK(p.mode == "our-sel");

  fs::path edir = tmp.path() / "eval";
  CliResult evaluated = run_cli(
      "evaluate --manifest " + q(ds / "manifest") + " --predictions " +
          q(ldir / "predictions.txt") + " --out " + q(edir),
      tmp.path());
  CHECK(evaluated.status == 0);
  CHECK(evaluated.output.find("CorLoc@0.5 = 1 over 50 images") != std::string::npos);

  // The written report agrees with the library on the same inputs.
  DatasetManifest data = load_manifest(ds / "manifest");
  std::vector<BBox> pred_boxes;
  std::vector<std::vector<BBox>> gts;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    pred_boxes.push_back(preds[i].box);
    gts.push_back(data.images[i].ground_truth);
  }
  nlohmann::json report =
      nlohmann::json::parse(oracle::read_file(edir / "report.json"));
  CHECK(report.at("corloc").get<double>() == corloc(pred_boxes, gts, 0.5));

  // --lambda 0 is accepted.
  CHECK(run_cli("train --manifest " + q(ds / "manifest") + " --out " +
                    q(tmp.path() / "nolambda") + " --lambda 0 --epochs 1",
                tmp.path()).status == 0);
}

TEST_CASE("obj-sel predictions are the argmax-objectness boxes") {
  oracle::TempDir tmp("cli-objsel");
  fs::path ds = tmp.path() / "ds";
  REQUIRE(run_cli("synth --out " + q(ds) + " --n 6 --m 30 --k 4 --seed 3",
                  tmp.path()).status == 0);
  fs::path odir = tmp.path() / "out";
  CHECK(run_cli("localize --manifest " + q(ds / "manifest") +
                    " --mode obj-sel --out " + q(odir),
                tmp.path()).status == 0);

  PredictionSet preds = load_predictions(odir / "predictions.txt");
  DatasetManifest data = load_manifest(ds / "manifest");
  REQUIRE(preds.size() == data.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const ImageRecord& img = data.images[i];
    std::vector<double> obj;
    for (const Proposal& p : img.proposals) obj.push_back(p.objectness);
    CHECK(preds[i].id == img.id);
    CHECK(preds[i].box == img.proposals[oracle::argmax_scan(obj)].box);
    CHECK(preds[i].mode == "obj-sel");
  }
}

TEST_CASE("our-seg recovers the hot region on the constructed fixture") {
  oracle::TempDir tmp("cli-hot");
  fs::path ds = tmp.path() / "ds";
  BBox region = write_hot_fixture(ds);

  fs::path odir = tmp.path() / "out";
  CHECK(run_cli("localize --manifest " + q(ds / "manifest") + " --detector " +
                    q(ds / "detector.json") +
                    " --mode our-seg --fh-sigma 0 --fh-k 50 --fh-min-size 20 "
                    "--out " + q(odir),
                tmp.path()).status == 0);
  PredictionSet preds = load_predictions(odir / "predictions.txt");
  REQUIRE(preds.size() == 1);
  CHECK(preds[0].box == region);
}

TEST_CASE("seg modes fail with the image id when rasters are missing") {
  oracle::TempDir tmp("cli-noraster");
  fs::path ds = tmp.path() / "ds";
  fs::create_directories(ds);
  ImageRecord img = oracle::make_image("ghost", 16, 16, {{{0, 0, 8, 8}, 0.5}},
                                       2, {1.0f, 0.0f});
  save_proposals(ds / "ghost.props", img.proposals);
  save_features(ds / "ghost.clf", img.features);
  DatasetManifest d;
  d.images.push_back(std::move(img));
  save_manifest(ds / "manifest", d);

  CliResult out = run_cli("localize --manifest " + q(ds / "manifest") +
                              " --mode obj-seg --out " + q(tmp.path() / "o"),
                          tmp.path());
  CHECK(out.status == 1);
  CHECK(out.output.find("ghost") != std::string::npos);
}

TEST_CASE("evaluate rejects predictions for unknown images") {
  oracle::TempDir tmp("cli-unknown");
  fs::path ds = tmp.path() / "ds";
  REQUIRE(run_cli("synth --out " + q(ds) + " --n 2 --m 5 --k 2 --seed 1",
                  tmp.path()).status == 0);
  save_predictions(tmp.path() / "phantom.txt",
                   {{"phantom", {0, 0, 4, 4}, "obj-sel"}});
  CliResult out = run_cli("evaluate --manifest " + q(ds / "manifest") +
                              " --predictions " + q(tmp.path() / "phantom.txt") +
                              " --out " + q(tmp.path() / "o"),
                          tmp.path());
  CHECK(out.status == 1);
  CHECK(out.output.find("phantom") != std::string::npos);
}

TEST_CASE("training aborts on divergence with a diagnostic") {
  oracle::TempDir tmp("cli-diverge");
  fs::path ds = tmp.path() / "ds";
  REQUIRE(run_cli("synth --out " + q(ds) + " --n 2 --m 5 --k 2 --seed 1",
                  tmp.path()).status == 0);
  CliResult out = run_cli("train --manifest " + q(ds / "manifest") + " --out " +
                              q(tmp.path() / "t") + " --lr 1e200",
                          tmp.path());
  CHECK(out.status == 1);
  CHECK(out.output.find("diverged") != std::string::npos);
}

TEST_CASE("render writes heat, mask, and overlay images per image") {
  oracle::TempDir tmp("cli-render");
  fs::path ds = tmp.path() / "ds";
  BBox region = write_hot_fixture(ds);

  fs::path odir = tmp.path() / "render";
  CHECK(run_cli("render --manifest " + q(ds / "manifest") + " --detector " +
                    q(ds / "detector.json") +
                    " --mode our-seg --fh-sigma 0 --fh-k 50 --fh-min-size 20 "
                    "--out " + q(odir),
                tmp.path()).status == 0);

  REQUIRE(fs::exists(odir / "hot_heat.png"));
  REQUIRE(fs::exists(odir / "hot_mask.png"));
  REQUIRE(fs::exists(odir / "hot_overlay.png"));

  // Non-constant heat map: rendered maximum is 255.
  RgbImage heat = read_raster(odir / "hot_heat.png");
  int max_byte = 0;
  for (std::uint8_t v : heat.data) max_byte = std::max(max_byte, static_cast<int>(v));
  CHECK(max_byte == 255);

  // The overlay draws the predicted (= region) box in red.
  RgbImage overlay = read_raster(odir / "hot_overlay.png");
  auto is_red = [&](int x, int y) {
    const std::uint8_t* px = overlay.pixel(x, y);
    return px[0] == 255 && px[1] == 0 && px[2] == 0;
  };
  CHECK(is_red(region.x_min, region.y_min));
  CHECK(is_red(region.x_max - 1, region.y_max - 1));
  CHECK(is_red(region.x_min, region.y_max - 1));
  CHECK(is_red(region.x_max - 1, region.y_min));
  CHECK(!is_red(0, 0));

  // The mask is exactly the region.
  RgbImage mask = read_raster(odir / "hot_mask.png");
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      CHECK(mask.pixel(x, y)[0] == (region.contains_pixel(x, y) ? 255 : 0));
}
