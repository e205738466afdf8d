#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <string>

#include "colocal/dataset.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace colocal;
namespace fs = std::filesystem;

namespace {

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string features_blob(std::uint32_t rows, std::uint32_t dim,
                          const std::vector<float>& payload) {
  std::string b = "CLF1";
  auto put_u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>(v >> (8 * i) & 0xff));
  };
  put_u32(rows);
  put_u32(dim);
  for (float f : payload) {
    char raw[4];
    std::memcpy(raw, &f, 4);
    b.append(raw, 4);
  }
  return b;
}

// The 50-image default synthetic dataset, generated once per process.
const fs::path& synth_dir() {
  static oracle::TempDir tmp("synth-ds");
  static bool made = false;
  if (!made) {
    SynthConfig cfg;
    cfg.seed = 7;
    generate_synthetic(cfg, tmp.path());
    made = true;
  }
  return tmp.path();
}

}  // namespace

TEST_CASE("minimal manifest loads with the declared shape") {
  oracle::TempDir tmp("manifest-min");
  ImageRecord img = oracle::make_image(
      "tiny", 16, 16,
      {{{0, 0, 8, 8}, 0.5}, {{4, 4, 12, 12}, 0.25}, {{8, 8, 16, 16}, 1.0}}, 4,
      std::vector<float>(12, 1.0f));
  save_proposals(tmp.path() / "tiny.props", img.proposals);
  save_features(tmp.path() / "tiny.clf", img.features);
  DatasetManifest ds;
  ds.images.push_back(img);
  save_manifest(tmp.path() / "manifest", ds);

  DatasetManifest loaded = load_manifest(tmp.path() / "manifest");
  REQUIRE(loaded.size() == 1);
  CHECK(loaded.images[0].id == "tiny");
  CHECK(loaded.images[0].proposals.size() == 3);
  CHECK(loaded.images[0].features.dim == 4);
  CHECK(loaded.images[0] == img);
}

TEST_CASE("proposal/feature count mismatch names the image") {
  oracle::TempDir tmp("manifest-mismatch");
  ImageRecord img = oracle::make_image(
      "lopsided", 16, 16,
      {{{0, 0, 8, 8}, 0.5}, {{4, 4, 12, 12}, 0.25}, {{8, 8, 16, 16}, 1.0}}, 2,
      std::vector<float>(6, 0.0f));
  save_proposals(tmp.path() / "lopsided.props", img.proposals);
  // Features file declares 5 rows instead of 3.
  FeatureMatrix wide;
  wide.rows = 5;
  wide.dim = 2;
  wide.data.assign(10, 0.0f);
  save_features(tmp.path() / "lopsided.clf", wide);
  DatasetManifest ds;
  ds.images.push_back(img);
  save_manifest(tmp.path() / "manifest", ds);

  bool threw = false;
  try {
    load_manifest(tmp.path() / "manifest");
  } catch (const ValidationError& e) {
    threw = true;
    CHECK(std::string(e.what()).find("lopsided") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("synthetic output round-trips to the identical dataset") {
  oracle::TempDir tmp("roundtrip");
  SynthConfig cfg;
  cfg.seed = 7;
  DatasetManifest written = generate_synthetic(cfg, tmp.path());
  DatasetManifest loaded = load_manifest(tmp.path() / "manifest");
  REQUIRE(loaded.size() == 50);
  CHECK(loaded == written);
}

TEST_CASE("feature file round-trip is bit-identical") {
  oracle::TempDir tmp("features");
  std::mt19937 rng(2);
  std::normal_distribution<float> gauss(0.0f, 3.0f);
  FeatureMatrix m;
  m.rows = 100;
  m.dim = 64;
  m.data.resize(m.rows * m.dim);
  for (float& v : m.data) v = gauss(rng);
  save_features(tmp.path() / "f.clf", m);
  FeatureMatrix back = load_features(tmp.path() / "f.clf");
  CHECK(back.rows == m.rows);
  CHECK(back.dim == m.dim);
  CHECK(std::memcmp(back.data.data(), m.data.data(),
                    m.data.size() * sizeof(float)) == 0);
}

TEST_CASE("feature file parsing") {
  oracle::TempDir tmp("features-parse");

  write_bytes(tmp.path() / "ok.clf",
              features_blob(2, 3, {1, 0, 0, 0, 1, 0}));
  FeatureMatrix m = load_features(tmp.path() / "ok.clf");
  REQUIRE(m.rows == 2);
  REQUIRE(m.dim == 3);
  CHECK(m.data == std::vector<float>{1, 0, 0, 0, 1, 0});

  std::string truncated = features_blob(2, 3, {1, 0, 0, 0, 1, 0});
  truncated.resize(truncated.size() - 5);
  write_bytes(tmp.path() / "short.clf", truncated);
  bool threw = false;
  try {
    load_features(tmp.path() / "short.clf");
  } catch (const IoError& e) {
    threw = true;
    CHECK(std::string(e.what()).find("truncated") != std::string::npos);
  }
  CHECK(threw);

  write_bytes(tmp.path() / "magic.clf", "NOPE" + features_blob(1, 1, {0}).substr(4));
  CHECK_THROWS_AS(load_features(tmp.path() / "magic.clf"), IoError);

  write_bytes(tmp.path() / "nan.clf",
              features_blob(2, 2, {1, 2, std::nanf(""), 4}));
  threw = false;
  try {
    load_features(tmp.path() / "nan.clf");
  } catch (const ValidationError& e) {
    threw = true;
    std::string msg = e.what();
    CHECK(msg.find("row 1") != std::string::npos);
    CHECK(msg.find("column 0") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("proposal file parsing") {
  oracle::TempDir tmp("props");

  write_bytes(tmp.path() / "one.props", "10 10 50 50 0.8\n");
  ProposalSet one = load_proposals(tmp.path() / "one.props");
  REQUIRE(one.size() == 1);
  CHECK(one[0].box == BBox{10, 10, 50, 50});
  CHECK(one[0].box.width() == 40);
  CHECK(one[0].box.height() == 40);
  CHECK(one[0].objectness == doctest::Approx(0.8));

  write_bytes(tmp.path() / "degen.props", "10 10 10 50 0.5\n");
  CHECK_THROWS_AS(load_proposals(tmp.path() / "degen.props"), ValidationError);

  write_bytes(tmp.path() / "obj.props", "0 0 5 5 1.5\n");
  CHECK_THROWS_AS(load_proposals(tmp.path() / "obj.props"), ValidationError);

  write_bytes(tmp.path() / "malformed.props", "1 2 3\n");
  CHECK_THROWS_AS(load_proposals(tmp.path() / "malformed.props"), IoError);
}

TEST_CASE("a 2000-record proposal file preserves order") {
  oracle::TempDir tmp("props-order");
  std::mt19937 rng(4);
  std::uniform_int_distribution<int> coord(0, 90);
  std::uniform_real_distribution<double> obj(0.0, 1.0);
  ProposalSet props;
  for (int j = 0; j < 2000; ++j) {
    int x0 = coord(rng), y0 = coord(rng);
    props.push_back({{x0, y0, x0 + 1 + coord(rng) % 10, y0 + 1 + coord(rng) % 10},
                     obj(rng)});
  }
  save_proposals(tmp.path() / "big.props", props);
  ProposalSet back = load_proposals(tmp.path() / "big.props");
  REQUIRE(back.size() == 2000);
  for (std::size_t j = 0; j < 2000; ++j) {
    CHECK(back[j].box == props[j].box);
    CHECK(back[j].objectness == doctest::Approx(props[j].objectness).epsilon(1e-12));
  }
}

TEST_CASE("proposal cap truncates proposals and feature rows together") {
  DatasetManifest capped = load_manifest(synth_dir() / "manifest", 25);
  DatasetManifest full = load_manifest(synth_dir() / "manifest", 2000);
  REQUIRE(capped.size() == full.size());
  for (std::size_t i = 0; i < capped.size(); ++i) {
    const ImageRecord& c = capped.images[i];
    const ImageRecord& f = full.images[i];
    REQUIRE(c.proposals.size() == 25);
    REQUIRE(c.features.rows == 25);
    CHECK(f.proposals.size() == 100);
    for (std::size_t j = 0; j < 25; ++j) {
      CHECK(c.proposals[j] == f.proposals[j]);
      CHECK(std::memcmp(c.features.row(j).data(), f.features.row(j).data(),
                        c.features.dim * sizeof(float)) == 0);
    }
  }
}

TEST_CASE("zero-noise synthetic geometry: planted is u, distractor orthogonal") {
  oracle::TempDir tmp("zero-noise");
  SynthConfig cfg;
  cfg.num_images = 1;
  cfg.proposals_per_image = 2;
  cfg.feature_dim = 2;
  cfg.signal_strength = 1.0;
  cfg.noise_scale = 0.0;
  cfg.width = 32;
  cfg.height = 32;
  DatasetManifest ds = generate_synthetic(cfg, tmp.path());
  REQUIRE(ds.size() == 1);
  const ImageRecord& img = ds.images[0];
  REQUIRE(img.ground_truth.size() == 1);

  std::size_t planted = 2;
  for (std::size_t j = 0; j < 2; ++j)
    if (img.proposals[j].box == img.ground_truth[0]) planted = j;
  REQUIRE(planted < 2);
  std::size_t other = 1 - planted;

  double norm2 = 0.0, dot = 0.0, other_norm2 = 0.0;
  for (std::size_t k = 0; k < 2; ++k) {
    double pv = img.features.data[planted * 2 + k];
    double ov = img.features.data[other * 2 + k];
    norm2 += pv * pv;
    other_norm2 += ov * ov;
    dot += pv * ov;
  }
  CHECK(std::abs(std::sqrt(norm2) - 1.0) < 1e-5);  // planted = 1.0 * u
  CHECK(other_norm2 == 0.0);                       // zero-noise distractor
  CHECK(dot == 0.0);                               // trivially orthogonal
}

TEST_CASE("same seed produces byte-identical trees") {
  oracle::TempDir a("tree-a");
  oracle::TempDir b("tree-b");
  SynthConfig cfg;
  cfg.num_images = 4;
  cfg.proposals_per_image = 20;
  cfg.feature_dim = 8;
  cfg.seed = 123;
  generate_synthetic(cfg, a.path());
  generate_synthetic(cfg, b.path());

  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a.path())) {
    ++files;
    fs::path twin = b.path() / entry.path().filename();
    REQUIRE(fs::exists(twin));
    CHECK(oracle::read_file(entry.path()) == oracle::read_file(twin));
  }
  CHECK(files == 4 * 3 + 1);  // props + clf + ppm per image, one manifest
}

TEST_CASE("generator rejects invalid configurations") {
  oracle::TempDir tmp("synth-bad");
  SynthConfig m1;
  m1.proposals_per_image = 1;
  CHECK_THROWS_AS(generate_synthetic(m1, tmp.path()), ValidationError);
  SynthConfig k0;
  k0.feature_dim = 0;
  CHECK_THROWS_AS(generate_synthetic(k0, tmp.path()), ValidationError);
  SynthConfig n0;
  n0.num_images = 0;
  CHECK_THROWS_AS(generate_synthetic(n0, tmp.path()), ValidationError);
}

TEST_CASE("manifest validation rejects invariant violations") {
  oracle::TempDir tmp("manifest-bad");

  // Box out of bounds.
  ImageRecord oob = oracle::make_image("oob", 16, 16, {{{0, 0, 20, 8}, 0.5}}, 2,
                                       {1.0f, 2.0f});
  save_proposals(tmp.path() / "oob.props", oob.proposals);
  save_features(tmp.path() / "oob.clf", oob.features);
  DatasetManifest ds;
  ds.images.push_back(oob);
  save_manifest(tmp.path() / "manifest", ds);
  bool threw = false;
  try {
    load_manifest(tmp.path() / "manifest");
  } catch (const ValidationError& e) {
    threw = true;
    CHECK(std::string(e.what()).find("oob") != std::string::npos);
  }
  CHECK(threw);

  // Duplicate ids.
  ImageRecord dup = oracle::make_image("dup", 16, 16, {{{0, 0, 8, 8}, 0.5}}, 2,
                                       {1.0f, 2.0f});
  save_proposals(tmp.path() / "dup.props", dup.proposals);
  save_features(tmp.path() / "dup.clf", dup.features);
  DatasetManifest twice;
  twice.images.push_back(dup);
  twice.images.push_back(dup);
  save_manifest(tmp.path() / "manifest2", twice);
  CHECK_THROWS_AS(load_manifest(tmp.path() / "manifest2"), ValidationError);

  CHECK_THROWS_AS(load_manifest(tmp.path() / "missing-manifest"), IoError);
}

TEST_CASE("raster dimensions must match the manifest declaration") {
  oracle::TempDir tmp("raster-bad");
  ImageRecord img = oracle::make_image("pic", 16, 16, {{{0, 0, 8, 8}, 0.5}}, 2,
                                       {1.0f, 2.0f});
  img.raster = RgbImage::filled(8, 8, 1, 2, 3);  // wrong size
  save_proposals(tmp.path() / "pic.props", img.proposals);
  save_features(tmp.path() / "pic.clf", img.features);
  write_ppm(tmp.path() / "pic.ppm", *img.raster);
  DatasetManifest ds;
  ds.images.push_back(img);
  save_manifest(tmp.path() / "manifest", ds);
  bool threw = false;
  try {
    load_manifest(tmp.path() / "manifest");
  } catch (const ValidationError& e) {
    threw = true;
    CHECK(std::string(e.what()).find("pic") != std::string::npos);
  }
  CHECK(threw);
}
