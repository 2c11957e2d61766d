// Serial reference vs OpenMP kernels for dataset generation and evaluation.

#include <omp.h>

#include <chrono>
#include <cstdio>

#include "CLI11.hpp"
#include "graspme/metrics.hpp"
#include "graspme/pipeline.hpp"

using namespace graspme;

namespace {

template <class F>
double time_best(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto start = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  return best;
}

void row(const char* name, double serial, double parallel) {
  std::printf("%-22s serial %8.3f s   omp %8.3f s   speedup %5.2fx\n", name, serial, parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pipeline benchmark"};
  std::size_t scenes = 200;
  int jobs = omp_get_num_procs();
  int reps = 3;
  bool complex = false;
  app.add_option("--scenes", scenes)->check(CLI::PositiveNumber);
  app.add_option("--jobs", jobs)->check(CLI::PositiveNumber);
  app.add_option("--reps", reps)->check(CLI::PositiveNumber);
  app.add_flag("--complex", complex);
  CLI11_PARSE(app, argc, argv);

  GenerateOptions opt;
  opt.family = complex ? Family::kComplex : Family::kSimple;
  opt.scenes = scenes;
  opt.seed = 99;
  opt.jobs = jobs;
  std::printf("scenes=%zu jobs=%d procs=%d family=%s\n", scenes, jobs, omp_get_num_procs(),
              complex ? "complex" : "simple");

  DatasetBuild serial_build, omp_build;
  const double gs = time_best(reps, [&] { serial_build = generate_dataset_serial(opt); });
  const double gp = time_best(reps, [&] { omp_build = generate_dataset(opt); });
  row("generate (in memory)", gs, gp);
  if (write_coco(serial_build.test) != write_coco(omp_build.test)) {
    std::fprintf(stderr, "generate: serial and OpenMP outputs differ\n");
    return 1;
  }

  std::vector<std::size_t> all(scenes);
  for (std::size_t i = 0; i < scenes; ++i) all[i] = i;
  const CocoDataset gt = assemble_split(omp_build.records, all, omp_build.categories);
  Rng rng(4);
  const PredictionSet preds = random_baseline(gt, rng);
  omp_set_num_threads(jobs);
  EvalReport rs, rp;
  const double es = time_best(reps, [&] { rs = evaluate_serial(gt, preds, EvalConfig{}); });
  const double ep = time_best(reps, [&] { rp = evaluate(gt, preds, EvalConfig{}); });
  row("evaluate", es, ep);
  if (report_to_json(rs) != report_to_json(rp)) {
    std::fprintf(stderr, "evaluate: serial and OpenMP reports differ\n");
    return 1;
  }
  return 0;
}
