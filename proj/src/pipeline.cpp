#include "graspme/pipeline.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>

#include "graspme/error.hpp"
#include "graspme/render.hpp"

namespace graspme {

namespace {

DatasetBuild finish_build(const GenerateOptions& options, std::vector<ObjectTemplate> templates,
                          std::vector<SceneRecord> records) {
  DatasetBuild build;
  build.categories = categories_for(templates);
  build.records = std::move(records);
  build.split = split_dataset(options.scenes, split_seed(options.seed));
  auto sorted = [](std::vector<std::size_t> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  build.train = assemble_split(build.records, sorted(build.split.train), build.categories);
  build.val = assemble_split(build.records, sorted(build.split.val), build.categories);
  build.test = assemble_split(build.records, sorted(build.split.test), build.categories);
  return build;
}

}  // namespace

std::uint64_t split_seed(std::uint64_t master_seed) {
  return splitmix64(master_seed ^ 0x5b11d5e7a3c4f00dULL);
}

std::vector<ObjectTemplate> templates_for(Family family, const GenerationConfig& config) {
  if (family == Family::kSimple) return simple_templates();
  if (!config.asset_dir.empty()) return load_asset_dir(config.asset_dir);
  return complex_templates();
}

SceneRecord produce_scene(std::size_t index, std::uint64_t master_seed,
                          const GenerationConfig& config,
                          const std::vector<ObjectTemplate>& templates,
                          const std::optional<std::filesystem::path>& out_dir) {
  const Scene scene = generate_scene(scene_seed(master_seed, index), config, templates);
  const FrameBuffers buffers = rasterize(scene);
  const auto annotations = annotate_scene(scene, buffers);
  if (out_dir) return emit_scene(buffers, annotations, *out_dir, index);
  return make_scene_record(index, buffers.width, buffers.height, annotations);
}

DatasetBuild generate_dataset_serial(const GenerateOptions& options) {
  options.config.validate();
  auto templates = templates_for(options.family, options.config);
  std::vector<SceneRecord> records;
  records.reserve(options.scenes);
  for (std::size_t i = 0; i < options.scenes; ++i) {
    records.push_back(produce_scene(i, options.seed, options.config, templates, options.out_dir));
    if (options.progress) options.progress(i + 1);
  }
  return finish_build(options, std::move(templates), std::move(records));
}

DatasetBuild generate_dataset(const GenerateOptions& options) {
  options.config.validate();
  auto templates = templates_for(options.family, options.config);
  std::vector<SceneRecord> records(options.scenes);

  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::atomic<std::size_t> done{0};
  const auto n = static_cast<std::int64_t>(options.scenes);

#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, options.jobs))
  for (std::int64_t i = 0; i < n; ++i) {
    {
      std::lock_guard lock(failure_mutex);
      if (failure) continue;
    }
    try {
      records[static_cast<std::size_t>(i)] =
          produce_scene(static_cast<std::size_t>(i), options.seed, options.config, templates,
                        options.out_dir);
      const std::size_t finished = ++done;
      if (options.progress) options.progress(finished);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return finish_build(options, std::move(templates), std::move(records));
}

void write_split_indices(const DatasetBuild& build, const std::filesystem::path& out_dir) {
  write_text_file(out_dir / "train" / "annotations.json", write_coco(build.train));
  write_text_file(out_dir / "val" / "annotations.json", write_coco(build.val));
  write_text_file(out_dir / "test" / "annotations.json", write_coco(build.test));
}

}  // namespace graspme
