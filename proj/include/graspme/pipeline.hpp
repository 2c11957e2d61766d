#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "graspme/assets.hpp"
#include "graspme/dataset.hpp"
#include "graspme/scene.hpp"

namespace graspme {

struct GenerateOptions {
  GenerationConfig config;
  Family family = Family::kSimple;
  std::size_t scenes = 10;
  std::uint64_t seed = 0;
  int jobs = 1;
  /// When set, PNGs are written under `out_dir/images`; otherwise scenes are
  /// rendered and annotated in memory only.
  std::optional<std::filesystem::path> out_dir;
  /// Called with the number of finished scenes; may run on worker threads.
  std::function<void(std::size_t)> progress;
};

struct DatasetBuild {
  std::vector<CocoCategory> categories;
  std::vector<SceneRecord> records;  // indexed by scene
  Split split;
  CocoDataset train;
  CocoDataset val;
  CocoDataset test;
};

std::vector<ObjectTemplate> templates_for(Family family, const GenerationConfig& config);

/// Renders and annotates scene `index` of a run seeded with `master_seed`.
SceneRecord produce_scene(std::size_t index, std::uint64_t master_seed,
                          const GenerationConfig& config,
                          const std::vector<ObjectTemplate>& templates,
                          const std::optional<std::filesystem::path>& out_dir);

/// Scenes are produced in parallel over `jobs` OpenMP threads; output is
/// identical to generate_dataset_serial for any job count.
DatasetBuild generate_dataset(const GenerateOptions& options);
DatasetBuild generate_dataset_serial(const GenerateOptions& options);

/// Writes `<out>/{train,val,test}/annotations.json`.
void write_split_indices(const DatasetBuild& build, const std::filesystem::path& out_dir);

/// Split permutation seed derived from the run seed.
std::uint64_t split_seed(std::uint64_t master_seed);

}  // namespace graspme
