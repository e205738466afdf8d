// colocal: command-line driver for the co-localization pipeline.
//
//   synth     generate a synthetic planted-object dataset
//   train     fit the common-object detector on a dataset manifest
//   localize  predict one box per image in one of four modes
//   evaluate  score predictions against ground truth (CorLoc, error modes)
//   render    export heat maps, masks, and box overlays per image

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "colocal/dataset.hpp"
#include "colocal/detector.hpp"
#include "colocal/evaluation.hpp"
#include "colocal/segmentation.hpp"

namespace fs = std::filesystem;
using namespace colocal;

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

struct SynthArgs {
  std::string out;
  SynthConfig cfg;
};

int cmd_synth(const SynthArgs& a) {
  fs::create_directories(a.out);
  DatasetManifest data = generate_synthetic(a.cfg, a.out);
  std::cout << "wrote " << data.images.size() << " images to " << a.out
            << " (N=" << a.cfg.num_images << " M=" << a.cfg.proposals_per_image
            << " K=" << a.cfg.feature_dim << " seed=" << a.cfg.seed << ")\n";
  return 0;
}

struct TrainArgs {
  std::string manifest;
  std::string out;
  int max_proposals = kDefaultProposalCap;
  TrainConfig cfg;
};

int cmd_train(const TrainArgs& a) {
  DatasetManifest data =
      load_manifest(a.manifest, static_cast<std::size_t>(a.max_proposals));
  auto [detector, log] = train(data, a.cfg);

  fs::create_directories(a.out);
  save_detector(fs::path(a.out) / "detector.json", detector, a.cfg);

  std::string log_text;
  for (double obj : log.objectives) log_text += fmt_double(obj) + "\n";
  atomic_write_file(fs::path(a.out) / "train_log.txt", log_text);

  std::cout << "trained on " << data.images.size() << " images: objective "
            << fmt_double(log.objectives.front()) << " -> "
            << fmt_double(log.objectives.back()) << "\n";
  return 0;
}

struct LocalizeArgs {
  std::string manifest;
  std::string out;
  std::string detector;
  std::string mode = "our-seg";
  int max_proposals = kDefaultProposalCap;
  SegParams seg;
};

int cmd_localize(const LocalizeArgs& a) {
  Mode mode = parse_mode(a.mode);
  const bool needs_detector = (mode == Mode::OurSel || mode == Mode::OurSeg);
  if (needs_detector && a.detector.empty())
    throw ValidationError("mode " + a.mode + " requires --detector");

  Detector d;
  bool use_objectness = true;
  if (!a.detector.empty()) {
    auto [det, cfg] = load_detector(a.detector);
    d = std::move(det);
    use_objectness = cfg.use_objectness;
  }

  DatasetManifest data =
      load_manifest(a.manifest, static_cast<std::size_t>(a.max_proposals));

  PredictionSet preds;
  preds.reserve(data.images.size());
  for (const ImageRecord& img : data.images) {
    BBox box = localize(needs_detector ? &d : nullptr, img, mode, a.seg,
                        use_objectness);
    preds.push_back({img.id, box, a.mode});
  }

  fs::create_directories(a.out);
  fs::path pred_path = fs::path(a.out) / "predictions.txt";
  save_predictions(pred_path, preds);
  std::cout << "wrote " << preds.size() << " predictions (" << a.mode
            << ") to " << pred_path.string() << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string manifest;
  std::string predictions;
  std::string out;
  double threshold = 0.5;
  int curve_points = 101;
  int max_proposals = kDefaultProposalCap;
};

int cmd_evaluate(const EvaluateArgs& a) {
  DatasetManifest data =
      load_manifest(a.manifest, static_cast<std::size_t>(a.max_proposals));
  PredictionSet preds = load_predictions(a.predictions);
  EvaluationReport report =
      build_report(preds, data, a.threshold, a.curve_points);

  fs::create_directories(a.out);
  save_report(fs::path(a.out) / "report.json", report);

  std::cout << "CorLoc@" << fmt_double(a.threshold) << " = "
            << fmt_double(report.corloc) << " over " << report.images.size()
            << " images\n";
  return 0;
}

void draw_box(RgbImage& img, const BBox& b) {
  auto put = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= static_cast<int>(img.width) ||
        y >= static_cast<int>(img.height))
      return;
    unsigned char* px =
        img.data.data() +
        (static_cast<std::size_t>(y) * img.width + static_cast<std::size_t>(x)) * 3;
    px[0] = 255;
    px[1] = 0;
    px[2] = 0;
  };
  for (int x = b.x_min; x < b.x_max; ++x) {
    put(x, b.y_min);
    put(x, b.y_max - 1);
  }
  for (int y = b.y_min; y < b.y_max; ++y) {
    put(b.x_min, y);
    put(b.x_max - 1, y);
  }
}

int cmd_render(const LocalizeArgs& a) {
  Mode mode = parse_mode(a.mode);
  const bool detector_scores = (mode == Mode::OurSel || mode == Mode::OurSeg);
  if (detector_scores && a.detector.empty())
    throw ValidationError("mode " + a.mode + " requires --detector");

  Detector d;
  bool use_objectness = true;
  if (!a.detector.empty()) {
    auto [det, cfg] = load_detector(a.detector);
    d = std::move(det);
    use_objectness = cfg.use_objectness;
  }

  DatasetManifest data =
      load_manifest(a.manifest, static_cast<std::size_t>(a.max_proposals));
  fs::create_directories(a.out);

  for (const ImageRecord& img : data.images) {
    if (!img.raster)
      throw ValidationError("image " + img.id + " has no raster to render");

    ScoreVector scores =
        detector_scores
            ? score_proposals(d, img.features, img.proposals, use_objectness)
            : objectness_scores(img);
    SegmentationOutcome seg = segment_from_scores(img, scores, a.seg);
    BBox box = localize(detector_scores ? &d : nullptr, img, mode, a.seg,
                        use_objectness);

    fs::path base = fs::path(a.out) / img.id;
    write_png(fs::path(base.string() + "_heat.png"), heatmap_to_gray(seg.heat));
    write_png(fs::path(base.string() + "_mask.png"),
              foreground_mask(seg.partition, seg.labels));
    RgbImage overlay = *img.raster;
    draw_box(overlay, box);
    write_png(fs::path(base.string() + "_overlay.png"), overlay);
  }

  std::cout << "rendered " << data.images.size() << " images to " << a.out
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"co-localization of a common object across an image set"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--out", synth_args.out, "output directory")->required();
  synth->add_option("--n", synth_args.cfg.num_images, "number of images");
  synth->add_option("--m", synth_args.cfg.proposals_per_image,
                    "proposals per image");
  synth->add_option("--k", synth_args.cfg.feature_dim, "feature dimension");
  synth->add_option("--seed", synth_args.cfg.seed, "RNG seed");
  synth->add_option("--signal", synth_args.cfg.signal_strength,
                    "planted feature magnitude");
  synth->add_option("--noise", synth_args.cfg.noise_scale,
                    "feature noise scale");
  synth->add_option("--width", synth_args.cfg.width, "raster width");
  synth->add_option("--height", synth_args.cfg.height, "raster height");

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "train the detector");
  train->add_option("--manifest", train_args.manifest, "dataset manifest")
      ->required();
  train->add_option("--out", train_args.out, "output directory")->required();
  train->add_option("--lambda", train_args.cfg.lambda, "L2 penalty weight");
  train->add_option("--epsilon", train_args.cfg.epsilon,
                    "score normalization epsilon");
  train->add_option("--lr", train_args.cfg.lr_initial, "initial learning rate");
  train->add_option("--epochs", train_args.cfg.total_epochs, "epoch count");
  train->add_option("--batch", train_args.cfg.batch_size,
                    "images per minibatch");
  train->add_option("--seed", train_args.cfg.seed, "RNG seed");
  train->add_option("--max-proposals", train_args.max_proposals,
                    "per-image proposal cap");

  LocalizeArgs loc_args;
  CLI::App* loc = app.add_subcommand("localize", "predict one box per image");
  loc->add_option("--manifest", loc_args.manifest, "dataset manifest")
      ->required();
  loc->add_option("--out", loc_args.out, "output directory")->required();
  loc->add_option("--detector", loc_args.detector, "trained detector file");
  loc->add_option("--mode", loc_args.mode,
                  "our-sel | our-seg | obj-sel | obj-seg");
  loc->add_option("--beta", loc_args.seg.beta, "pairwise histogram scale");
  loc->add_option("--clamp-delta", loc_args.seg.clamp_delta,
                  "unary clamp bound");
  loc->add_option("--fh-sigma", loc_args.seg.fh.sigma,
                  "superpixel pre-smoothing sigma");
  loc->add_option("--fh-k", loc_args.seg.fh.k, "superpixel merge scale");
  loc->add_option("--fh-min-size", loc_args.seg.fh.min_size,
                  "minimum superpixel size");
  loc->add_option("--max-proposals", loc_args.max_proposals,
                  "per-image proposal cap");

  EvaluateArgs eval_args;
  CLI::App* eval = app.add_subcommand("evaluate", "score predictions");
  eval->add_option("--manifest", eval_args.manifest, "dataset manifest")
      ->required();
  eval->add_option("--predictions", eval_args.predictions, "predictions file")
      ->required();
  eval->add_option("--out", eval_args.out, "output directory")->required();
  eval->add_option("--threshold", eval_args.threshold, "CorLoc IoU threshold");
  eval->add_option("--curve-points", eval_args.curve_points,
                   "CorLoc curve sample count");
  eval->add_option("--max-proposals", eval_args.max_proposals,
                   "per-image proposal cap");

  LocalizeArgs render_args;
  CLI::App* render =
      app.add_subcommand("render", "export heat maps, masks, and overlays");
  render->add_option("--manifest", render_args.manifest, "dataset manifest")
      ->required();
  render->add_option("--out", render_args.out, "output directory")->required();
  render->add_option("--detector", render_args.detector,
                     "trained detector file");
  render->add_option("--mode", render_args.mode,
                     "our-sel | our-seg | obj-sel | obj-seg");
  render->add_option("--beta", render_args.seg.beta, "pairwise histogram scale");
  render->add_option("--clamp-delta", render_args.seg.clamp_delta,
                     "unary clamp bound");
  render->add_option("--fh-sigma", render_args.seg.fh.sigma,
                     "superpixel pre-smoothing sigma");
  render->add_option("--fh-k", render_args.seg.fh.k, "superpixel merge scale");
  render->add_option("--fh-min-size", render_args.seg.fh.min_size,
                     "minimum superpixel size");
  render->add_option("--max-proposals", render_args.max_proposals,
                     "per-image proposal cap");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(synth_args);
    if (train->parsed()) return cmd_train(train_args);
    if (loc->parsed()) return cmd_localize(loc_args);
    if (eval->parsed()) return cmd_evaluate(eval_args);
    if (render->parsed()) return cmd_render(render_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
