#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "graspme/geometry.hpp"
#include "graspme/rng.hpp"

namespace graspme {

// Primitive shapes are centered at the origin with their main axis along +X.

struct Cuboid {
  double length = 0.0;  // along X
  double width = 0.0;   // along Y
  double height = 0.0;  // along Z
};

struct Cylinder {
  double length = 0.0;  // along X
  double radius = 0.0;
};

/// Cylinder of `length` with hemispherical caps; overall extent along X is
/// length + 2 * radius.
struct Capsule {
  double length = 0.0;
  double radius = 0.0;
};

using PrimitiveShape = std::variant<Cuboid, Cylinder, Capsule>;

enum class PrimitiveKind { kCuboid, kCylinder, kCapsule };

PrimitiveKind kind_of(const PrimitiveShape& shape);
std::string_view kind_name(PrimitiveKind kind);
bool is_valid(const PrimitiveShape& shape);

using Triangle = std::array<std::uint32_t, 3>;

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<Vec3> normals;  // one unit normal per triangle

  /// Builds a mesh and computes per-face normals. Throws InvalidArgument on
  /// out-of-range indices or an empty triangle list. Zero-area faces get
  /// normal +Z.
  static TriMesh from_faces(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

  Vec3 aabb_min() const;
  Vec3 aabb_max() const;
};

enum class ManifoldKind { kLine, kSurface };

std::string_view manifold_kind_name(ManifoldKind kind);
/// Parses "line" or "surface"; throws SchemaError otherwise.
ManifoldKind parse_manifold_kind(std::string_view name);

/// Ordered keypoint approximation of an object's grasp manifold, object frame.
class GraspManifold {
 public:
  /// Throws InvalidArgument when k < 2, k < 3 for a surface, or two
  /// keypoints coincide.
  GraspManifold(std::vector<Vec3> keypoints, ManifoldKind kind);

  const std::vector<Vec3>& keypoints() const { return keypoints_; }
  ManifoldKind kind() const { return kind_; }
  std::size_t size() const { return keypoints_.size(); }

 private:
  std::vector<Vec3> keypoints_;
  ManifoldKind kind_;
};

using Geometry = std::variant<PrimitiveShape, TriMesh>;

struct ObjectTemplate {
  std::string category_name;
  Geometry geometry;
  GraspManifold manifold;
  int keypoint_budget = 2;  // K

  bool is_primitive() const { return std::holds_alternative<PrimitiveShape>(geometry); }
};

/// Main-axis line through the center: (-L/2, 0, 0) -> (+L/2, 0, 0).
GraspManifold manifold_for_primitive(const PrimitiveShape& shape);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct PrimitiveSizeConfig {
  Range cuboid_length{0.08, 0.25};
  Range cuboid_width{0.03, 0.10};
  Range cuboid_height{0.03, 0.10};
  Range cylinder_length{0.08, 0.25};
  Range cylinder_radius{0.015, 0.045};
  Range capsule_length{0.06, 0.20};
  Range capsule_radius{0.015, 0.04};
  double p_cube = 0.05;
};

/// Samples instance dimensions for a primitive of `kind`. The main axis is
/// always the longest dimension; with probability p_cube the result is a
/// cube (cuboid) or has length equal to its diameter (cylinder, capsule).
PrimitiveShape sample_primitive_dims(Rng& rng, PrimitiveKind kind,
                                     const PrimitiveSizeConfig& config);

/// Closed triangle mesh of the primitive surface. Requires segments >= 3.
TriMesh tessellate(const PrimitiveShape& shape, int segments);

/// Parses the `v`/`f` subset of Wavefront OBJ. Polygons are fan-triangulated.
TriMesh load_obj(std::string_view text);
/// Writes `v` and `f` records with round-trip exact coordinates.
std::string write_obj(const TriMesh& mesh);

struct ObjectKeypoint {
  Vec3 position = Vec3::Zero();
  int flag = 2;
};

/// Appends (origin, flag 0) entries until the list has K entries.
std::vector<ObjectKeypoint> pad_keypoints(std::vector<ObjectKeypoint> keypoints, int K);

struct KeypointAnnotation {
  std::string category;
  GraspManifold manifold;
};

/// Parses a `.manifold.json` sidecar:
/// {"category": str, "kind": "line"|"surface", "keypoints": [[x,y,z], ...]}
KeypointAnnotation load_keypoint_annotation(std::string_view text, int K = 10);
std::string write_keypoint_annotation(const KeypointAnnotation& annotation);

}  // namespace graspme
