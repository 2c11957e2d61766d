#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "graspme/assets.hpp"
#include "graspme/geometry.hpp"
#include "graspme/rng.hpp"
#include "graspme/shapes.hpp"

namespace graspme {

using Rgb = Eigen::Vector3d;  // channels in [0, 1]

struct IntRange {
  int lo = 0;
  int hi = 0;
};

/// Every randomization knob of scene synthesis. Angles are radians here and
/// degrees in the JSON document.
struct GenerationConfig {
  IntRange object_count{1, 6};
  PrimitiveSizeConfig sizes;
  double table_width = 1.0;  // X extent, meters
  double table_depth = 1.0;  // Y extent, meters
  Rgb table_color_min = Rgb::Zero();
  Rgb table_color_max = Rgb::Ones();
  Rgb object_color_min = Rgb::Zero();
  Rgb object_color_max = Rgb::Ones();
  Range light_distance{2.0, 4.0};
  Range light_elevation{0.5235987755982988, 1.5707963267948966};
  Range light_intensity{0.5, 1.5};
  Range light_ambient{0.2, 0.4};
  HemisphereParams camera{0.8, 1.3, 0.7853981633974483, 1.4835298641951802};
  double vertical_fov = 1.0471975511965976;  // 60 degrees
  int image_width = 512;
  int image_height = 512;
  int max_retries = 50;
  int segments = 32;  // primitive tessellation
  double p_upright = 0.2;  // cylinder standing on an end cap
  double mesh_jitter = 0.17453292519943295;  // 10 degrees
  std::string asset_dir;  // complex family: empty selects the built-in stand-ins

  /// Throws InvalidArgument naming the first inconsistent field.
  void validate() const;
  CameraIntrinsics intrinsics() const;
};

/// Parses a JSON config; missing keys keep defaults, unknown keys are errors.
GenerationConfig parse_generation_config(std::string_view json_text);
std::string generation_config_to_json(const GenerationConfig& config);

struct Light {
  Vec3 position = Vec3(0, 0, 3);
  double intensity = 1.0;
  double ambient = 0.3;
};

struct SceneObject {
  std::size_t template_index = 0;
  std::string category;
  Geometry shape;         // instance geometry after size randomization
  TriMesh mesh;           // tessellation of `shape`, object frame
  GraspManifold manifold; // object frame
  int keypoint_budget = 2;
  bool simple = true;     // primitive family: enables the keypoint swap
  Pose pose;              // object -> world
  Rgb color = Rgb::Ones();
  int instance_id = 1;
};

struct Scene {
  std::vector<SceneObject> objects;
  Rgb table_color = Rgb::Constant(0.5);
  double table_width = 1.0;
  double table_depth = 1.0;
  Light light;
  Camera camera;
  std::uint64_t seed = 0;
};

/// Builds a scene object from an explicit shape and pose.
SceneObject make_scene_object(const ObjectTemplate& tmpl, std::size_t template_index,
                              Geometry shape, const Pose& pose, int instance_id,
                              int segments = 32);

/// Statically stable pose on the z = 0 plane with uniform yaw; the lowest
/// point of the shape touches the plane.
Pose rest_pose(const Geometry& shape, Rng& rng, double p_upright = 0.2,
               double mesh_jitter = 0.17453292519943295);

struct BoundingCylinder {
  double x = 0.0;
  double y = 0.0;
  double radius = 0.0;
  double z_min = 0.0;
  double z_max = 0.0;
};

BoundingCylinder bounding_cylinder(const SceneObject& object);

/// Conservative interpenetration test on vertical bounding cylinders.
bool overlap_test(const SceneObject& a, const SceneObject& b);

/// Draws one randomized scene. `seed` seeds the scene RNG and is recorded.
Scene generate_scene(std::uint64_t seed, const GenerationConfig& config,
                     const std::vector<ObjectTemplate>& templates);

}  // namespace graspme
