#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "graspme/mask.hpp"
#include "graspme/render.hpp"
#include "graspme/shapes.hpp"

namespace graspme {

struct CocoImage {
  std::int64_t id = 0;
  std::string file_name;
  int width = 0;
  int height = 0;
};

struct CocoAnnotation {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  BBox bbox;
  std::uint64_t area = 0;  // mask pixel count
  RleMask segmentation;
  std::vector<Keypoint2D> keypoints;  // length K

  int num_keypoints() const;
};

struct CocoCategory {
  std::int64_t id = 0;
  std::string name;
  std::vector<std::string> keypoints;  // names, length K
  std::vector<std::pair<int, int>> skeleton;  // 1-based keypoint index pairs
  ManifoldKind manifold_kind = ManifoldKind::kLine;

  int keypoint_budget() const { return static_cast<int>(keypoints.size()); }
};

struct CocoDataset {
  std::vector<CocoImage> images;
  std::vector<CocoAnnotation> annotations;
  std::vector<CocoCategory> categories;

  const CocoCategory* find_category(std::int64_t id) const;
  const CocoImage* find_image(std::int64_t id) const;
  /// Throws SchemaError naming the first violated invariant.
  void validate() const;
};

/// Canonical form: sorted keys, no whitespace, pixel quantities with two
/// decimals. Identical datasets serialize to identical bytes.
std::string write_coco(const CocoDataset& dataset);
/// Parses and validates; key order is irrelevant.
CocoDataset read_coco(std::string_view text);

/// One category per template: id = index + 1, keypoints "kp1".."kpK" and a
/// skeleton chaining consecutive keypoints (closed for surfaces).
std::vector<CocoCategory> categories_for(const std::vector<ObjectTemplate>& templates);

/// Annotations of one scene before split assignment (annotation ids unset).
struct SceneRecord {
  CocoImage image;
  std::vector<CocoAnnotation> annotations;
};

std::string rgb_file_name(std::size_t scene_index);
std::string depth_file_name(std::size_t scene_index);
std::string seg_file_name(std::size_t scene_index);

/// COCO records for a rendered scene: image id = scene_index + 1,
/// category id = template index + 1.
SceneRecord make_scene_record(std::size_t scene_index, int width, int height,
                              const std::vector<AnnotatedObject>& annotations);

/// Writes rgb/depth/seg PNGs of one scene into `out_dir/images` and returns
/// its COCO records. Depth is 16-bit millimeters with 65535 for background
/// and far pixels. Throws InvalidArgument if an instance id exceeds 255.
SceneRecord emit_scene(const FrameBuffers& buffers, const std::vector<AnnotatedObject>& annotations,
                       const std::filesystem::path& out_dir, std::size_t scene_index);

std::uint16_t depth_to_millimeters(double depth_m);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Deterministic shuffled 80/10/10 split by scene; val and test take
/// floor(n / 10) each, train the remainder. Requires n >= 10.
Split split_dataset(std::size_t n_scenes, std::uint64_t seed);

/// Builds one split's dataset from per-scene records, in the order given.
/// Annotation ids are assigned sequentially from 1.
CocoDataset assemble_split(const std::vector<SceneRecord>& records,
                           const std::vector<std::size_t>& scene_indices,
                           std::vector<CocoCategory> categories);

struct ScoredKeypoint {
  double u = 0.0;
  double v = 0.0;
  double confidence = 0.0;
};

struct Prediction {
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  double score = 0.0;
  BBox bbox;
  std::optional<RleMask> segmentation;
  std::vector<ScoredKeypoint> keypoints;  // length K
};

using PredictionSet = std::vector<Prediction>;

/// Parses a prediction array and checks it against the ground truth: known
/// image and category ids, 3K keypoint values, finite score in [0, 1].
PredictionSet read_predictions(std::string_view text, const CocoDataset& gt);
std::string write_predictions(const PredictionSet& predictions);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace graspme
