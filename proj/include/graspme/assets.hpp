#pragma once

#include <filesystem>
#include <vector>

#include "graspme/shapes.hpp"

namespace graspme {

enum class Family { kSimple, kComplex };

/// Cuboid, cylinder and capsule with K = 2. Their geometry is a nominal
/// instance; scenes resample dimensions per object.
std::vector<ObjectTemplate> simple_templates();

/// Procedural stand-ins for complex household objects (banana, bottle, mug,
/// gun, camera), K = 10, each with a hand-authored manifold.
std::vector<ObjectTemplate> complex_templates();

/// Loads every `<name>.obj` in `dir` together with its `<name>.manifold.json`
/// sidecar, sorted by file name.
std::vector<ObjectTemplate> load_asset_dir(const std::filesystem::path& dir, int K = 10);

/// Writes `<category>.obj` and `<category>.manifold.json` for each mesh template.
void export_assets(const std::vector<ObjectTemplate>& templates,
                   const std::filesystem::path& dir);

}  // namespace graspme
