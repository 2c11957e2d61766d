#include <omp.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "graspme/dataset.hpp"
#include "graspme/error.hpp"
#include "graspme/metrics.hpp"
#include "graspme/overlay.hpp"
#include "graspme/pipeline.hpp"
#include "graspme/png_io.hpp"
#include "graspme/rng.hpp"

namespace fs = std::filesystem;
using namespace graspme;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kValidation = 2, kIo = 3 };

int default_jobs() {
  if (const char* env = std::getenv("GRASPME_JOBS")) {
    try {
      std::size_t used = 0;
      const int n = std::stoi(env, &used);
      if (used == std::string(env).size() && n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw InvalidArgument("GRASPME_JOBS must be a positive integer, got '" + std::string(env) + "'");
  }
  return std::max(1, omp_get_num_procs());
}

CocoDataset load_coco(const fs::path& path) {
  const std::string text = read_text_file(path);
  try {
    return read_coco(text);
  } catch (const SchemaError& e) {
    throw SchemaError(path.filename().string() + (e.path().empty() ? "" : ":" + e.path()), e.what());
  }
}

struct GenerateArgs {
  std::string config;
  std::string out;
  std::size_t scenes = 10;
  std::uint64_t seed = 0;
  std::string family = "simple";
  std::optional<int> jobs;
  bool quiet = false;
};

int cmd_generate(const GenerateArgs& args) {
  GenerateOptions options;
  if (!args.config.empty()) options.config = parse_generation_config(read_text_file(args.config));
  options.config.validate();
  options.family = args.family == "complex" ? Family::kComplex : Family::kSimple;
  options.scenes = args.scenes;
  options.seed = args.seed;
  options.jobs = args.jobs ? *args.jobs : default_jobs();
  if (options.jobs < 1) throw InvalidArgument("--jobs must be >= 1");
  if (options.scenes < 10) throw InvalidArgument("--scenes must be >= 10 for an 80/10/10 split");

  const fs::path out = args.out;
  std::error_code ec;
  fs::create_directories(out / "images", ec);
  if (ec) throw IoError("cannot create " + (out / "images").string() + ": " + ec.message());
  options.out_dir = out;

  std::mutex print_mutex;
  std::atomic<std::size_t> last_reported{0};
  const std::size_t step = std::max<std::size_t>(1, options.scenes / 20);
  if (!args.quiet) {
    options.progress = [&](std::size_t done) {
      if (done % step != 0 && done != options.scenes) return;
      std::lock_guard lock(print_mutex);
      if (done <= last_reported) return;
      last_reported = done;
      std::cerr << "\rgenerated " << done << "/" << options.scenes << std::flush;
      if (done == options.scenes) std::cerr << '\n';
    };
  }

  const auto start = std::chrono::steady_clock::now();
  const DatasetBuild build = generate_dataset(options);
  write_split_indices(build, out);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::size_t annotations = 0;
  for (const auto& r : build.records) annotations += r.annotations.size();
  std::printf(
      "scenes=%zu train=%zu val=%zu test=%zu annotations=%zu jobs=%d seconds=%.2f scenes_per_second=%.2f\n",
      options.scenes, build.split.train.size(), build.split.val.size(), build.split.test.size(),
      annotations, options.jobs, seconds, seconds > 0.0 ? options.scenes / seconds : 0.0);
  return kOk;
}

struct BaselineArgs {
  std::string gt;
  std::string out;
  std::uint64_t seed = 0;
  std::string boxes;
};

int cmd_baseline(const BaselineArgs& args) {
  const CocoDataset gt = load_coco(args.gt);
  std::optional<PredictionSet> boxes;
  if (!args.boxes.empty()) boxes = read_predictions(read_text_file(args.boxes), gt);
  Rng rng(args.seed);
  const PredictionSet preds = random_baseline(gt, rng, boxes ? &*boxes : nullptr);
  write_text_file(args.out, write_predictions(preds));
  std::printf("predictions=%zu\n", preds.size());
  return kOk;
}

struct EvaluateArgs {
  std::string gt;
  std::string pred;
  std::string out;
  bool merge_classes = false;
  double stroke = 3.0;
  double kappa = 0.1;
  std::string name = "model";
};

int cmd_evaluate(const EvaluateArgs& args) {
  const std::string gt_text = read_text_file(args.gt);
  const std::string pred_text = read_text_file(args.pred);
  const CocoDataset gt = read_coco(gt_text);
  const PredictionSet preds = read_predictions(pred_text, gt);

  EvalConfig config;
  config.merge_classes = args.merge_classes;
  config.stroke_px = args.stroke;
  config.oks_kappa = args.kappa;
  config.validate();

  const EvalReport report = evaluate(gt, preds, config);
  write_text_file(args.out, report_to_json(report));
  std::cout << report_table(report, args.name);
  return kOk;
}

struct InspectArgs {
  std::string dataset;
  std::string split = "test";
  std::size_t index = 0;
  std::string out;
  std::string pred;
};

int cmd_inspect(const InspectArgs& args) {
  const fs::path root = args.dataset;
  const CocoDataset ds = load_coco(root / args.split / "annotations.json");
  std::optional<PredictionSet> preds;
  if (!args.pred.empty()) preds = read_predictions(read_text_file(args.pred), ds);
  if (args.index >= ds.images.size()) {
    throw InvalidArgument("--index " + std::to_string(args.index) + " out of range; split '" +
                          args.split + "' has " + std::to_string(ds.images.size()) + " images");
  }
  const CocoImage& image = ds.images[args.index];
  const Image8 rgb = read_png(root / image.file_name);
  const Image8 overlay = render_overlay(rgb, ds, image.id, preds ? &*preds : nullptr);
  write_png(args.out, overlay);
  std::printf("image_id=%lld file=%s out=%s\n", static_cast<long long>(image.id),
              image.file_name.c_str(), args.out.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic grasp-manifold datasets and metrics"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Render a dataset with COCO split indices");
  generate->add_option("--config", gen.config, "Generation config (JSON)");
  generate->add_option("--out", gen.out, "Output directory")->required();
  generate->add_option("--scenes", gen.scenes, "Number of scenes")->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen.seed, "Master seed");
  generate->add_option("--family", gen.family, "Object family")
      ->check(CLI::IsMember({"simple", "complex"}));
  generate->add_option("--jobs", gen.jobs, "Worker threads (default: GRASPME_JOBS or all cores)");
  generate->add_flag("--quiet", gen.quiet, "No progress output");

  BaselineArgs base;
  auto* baseline = app.add_subcommand("baseline", "Random keypoints sampled inside boxes");
  baseline->add_option("--gt", base.gt, "Ground-truth COCO file")->required();
  baseline->add_option("--out", base.out, "Prediction file to write")->required();
  baseline->add_option("--seed", base.seed, "Seed");
  baseline->add_option("--boxes", base.boxes, "Predictions whose boxes replace the GT boxes");

  EvaluateArgs eval;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions against ground truth");
  evaluate_cmd->add_option("--gt", eval.gt, "Ground-truth COCO file")->required();
  evaluate_cmd->add_option("--pred", eval.pred, "Prediction file")->required();
  evaluate_cmd->add_option("--out", eval.out, "JSON report to write")->required();
  evaluate_cmd->add_flag("--merge-classes", eval.merge_classes, "Class-agnostic AP");
  evaluate_cmd->add_option("--stroke", eval.stroke, "Manifold stroke width in pixels");
  evaluate_cmd->add_option("--kappa", eval.kappa, "OKS falloff constant");
  evaluate_cmd->add_option("--name", eval.name, "Row label in the printed table");

  InspectArgs insp;
  auto* inspect = app.add_subcommand("inspect", "Draw annotations over one image");
  inspect->add_option("--dataset", insp.dataset, "Dataset directory")->required();
  inspect->add_option("--split", insp.split, "Split name")
      ->check(CLI::IsMember({"train", "val", "test"}));
  inspect->add_option("--index", insp.index, "Image position within the split");
  inspect->add_option("--out", insp.out, "Overlay PNG to write")->required();
  inspect->add_option("--pred", insp.pred, "Predictions to draw in a second color");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*generate) return cmd_generate(gen);
    if (*baseline) return cmd_baseline(base);
    if (*evaluate_cmd) return cmd_evaluate(eval);
    if (*inspect) return cmd_inspect(insp);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
  return kUsage;
}
