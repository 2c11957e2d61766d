#include "graspme/assets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "graspme/error.hpp"

namespace graspme {

namespace {

struct MeshBuilder {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;

  std::uint32_t add(const Vec3& v) {
    vertices.push_back(v);
    return static_cast<std::uint32_t>(vertices.size() - 1);
  }

  void append(const TriMesh& mesh, const Pose& pose = Pose::identity()) {
    const auto base = static_cast<std::uint32_t>(vertices.size());
    for (const auto& v : mesh.vertices) vertices.push_back(transform_point(pose, v));
    for (const auto& t : mesh.triangles) triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
  }

  void box(const Vec3& lo, const Vec3& hi) {
    const Vec3 size = hi - lo;
    Pose pose;
    pose.translation = 0.5 * (lo + hi);
    append(tessellate(Cuboid{size.x(), size.y(), size.z()}, 3), pose);
  }

  TriMesh build() { return TriMesh::from_faces(std::move(vertices), std::move(triangles)); }
};

// Closed tube around a centerline. `center(t)` and `radius(t)` for t in
// [0, 1]; the tube lies in planes spanned by the in-plane normal and +Z.
template <class Center, class Radius>
TriMesh sweep_tube(Center center, Radius radius, int rings, int segments) {
  MeshBuilder b;
  std::vector<std::uint32_t> starts;
  for (int i = 0; i <= rings; ++i) {
    const double t = static_cast<double>(i) / rings;
    const double dt = 1e-4;
    const Vec3 tangent = (center(std::min(1.0, t + dt)) - center(std::max(0.0, t - dt))).normalized();
    const Vec3 side = Vec3::UnitZ().cross(tangent).normalized();
    const double r = radius(t);
    starts.push_back(static_cast<std::uint32_t>(b.vertices.size()));
    for (int s = 0; s < segments; ++s) {
      const double theta = 2.0 * std::numbers::pi * s / segments;
      b.add(center(t) + r * (std::cos(theta) * side + std::sin(theta) * Vec3::UnitZ()));
    }
  }
  const auto n = static_cast<std::uint32_t>(segments);
  for (std::size_t i = 0; i + 1 < starts.size(); ++i) {
    for (std::uint32_t s = 0; s < n; ++s) {
      const std::uint32_t a0 = starts[i] + s, a1 = starts[i] + (s + 1) % n;
      const std::uint32_t b0 = starts[i + 1] + s, b1 = starts[i + 1] + (s + 1) % n;
      b.triangles.push_back({a0, b1, a1});
      b.triangles.push_back({a0, b0, b1});
    }
  }
  const auto cap0 = b.add(center(0.0));
  const auto cap1 = b.add(center(1.0));
  for (std::uint32_t s = 0; s < n; ++s) {
    b.triangles.push_back({starts.front() + s, starts.front() + (s + 1) % n, cap0});
    b.triangles.push_back({starts.back() + (s + 1) % n, starts.back() + s, cap1});
  }
  return b.build();
}

ObjectTemplate banana() {
  auto center = [](double t) {
    const double s = 2.0 * t - 1.0;
    return Vec3(0.09 * s, 0.035 * s * s - 0.0175, 0.0);
  };
  auto radius = [](double t) {
    const double s = 2.0 * t - 1.0;
    return 0.004 + 0.015 * std::sqrt(std::max(0.0, 1.0 - s * s));
  };
  std::vector<Vec3> kps;
  for (double t : {0.1, 0.3, 0.5, 0.7, 0.9}) kps.push_back(center(t));
  return {"banana", sweep_tube(center, radius, 24, 16), GraspManifold(kps, ManifoldKind::kLine),
          10};
}

ObjectTemplate bottle() {
  // Lathe profile along X: body, shoulder, neck.
  auto center = [](double t) { return Vec3(-0.11 + 0.22 * t, 0.0, 0.0); };
  auto radius = [](double t) {
    const double x = -0.11 + 0.22 * t;
    if (x <= 0.03) return 0.035;
    if (x >= 0.065) return 0.013;
    const double a = (x - 0.03) / 0.035;
    return 0.035 + (0.013 - 0.035) * (0.5 - 0.5 * std::cos(std::numbers::pi * a));
  };
  const std::vector<Vec3> kps = {{-0.09, 0, 0}, {-0.03, 0, 0}, {0.02, 0, 0}, {0.085, 0, 0}};
  return {"bottle", sweep_tube(center, radius, 22, 20), GraspManifold(kps, ManifoldKind::kLine),
          10};
}

ObjectTemplate mug() {
  MeshBuilder b;
  b.box({-0.035, -0.045, -0.04}, {0.035, 0.045, 0.04});
  b.box({0.035, -0.006, -0.028}, {0.06, 0.006, 0.028});
  const std::vector<Vec3> kps = {{0.055, 0, -0.022}, {0.055, 0, 0.0}, {0.055, 0, 0.022}};
  return {"mug", b.build(), GraspManifold(kps, ManifoldKind::kLine), 10};
}

ObjectTemplate gun() {
  MeshBuilder b;
  b.box({-0.06, -0.012, 0.02}, {0.12, 0.012, 0.05});
  b.box({-0.06, -0.012, -0.06}, {-0.02, 0.012, 0.02});
  const std::vector<Vec3> kps = {{-0.04, 0, -0.05}, {-0.04, 0, -0.015}, {-0.04, 0, 0.015}};
  return {"gun", b.build(), GraspManifold(kps, ManifoldKind::kLine), 10};
}

ObjectTemplate camera() {
  MeshBuilder b;
  b.box({-0.06, -0.02, -0.035}, {0.06, 0.02, 0.035});
  // Lens barrel along -Y.
  Pose lens;
  lens.rotation = axis_angle(Vec3::UnitZ(), 0.5 * std::numbers::pi);
  lens.translation = Vec3(0.01, -0.0325, 0.0);
  b.append(tessellate(Cylinder{0.025, 0.02}, 16), lens);
  const std::vector<Vec3> kps = {
      {-0.05, 0, -0.028}, {0.05, 0, -0.028}, {0.05, 0, 0.028}, {-0.05, 0, 0.028}};
  return {"camera", b.build(), GraspManifold(kps, ManifoldKind::kSurface), 10};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<ObjectTemplate> simple_templates() {
  std::vector<ObjectTemplate> out;
  const PrimitiveShape nominal[] = {Cuboid{0.16, 0.06, 0.06}, Cylinder{0.16, 0.03},
                                    Capsule{0.13, 0.028}};
  for (const auto& shape : nominal) {
    out.push_back({std::string(kind_name(kind_of(shape))), shape, manifold_for_primitive(shape), 2});
  }
  return out;
}

std::vector<ObjectTemplate> complex_templates() {
  return {banana(), bottle(), mug(), gun(), camera()};
}

std::vector<ObjectTemplate> load_asset_dir(const std::filesystem::path& dir, int K) {
  if (!std::filesystem::is_directory(dir)) throw IoError("asset directory not found: " + dir.string());
  std::vector<std::filesystem::path> meshes;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".obj") meshes.push_back(entry.path());
  }
  std::sort(meshes.begin(), meshes.end());
  if (meshes.empty()) throw IoError("no .obj meshes in " + dir.string());

  std::vector<ObjectTemplate> out;
  for (const auto& mesh_path : meshes) {
    auto sidecar = mesh_path;
    sidecar.replace_extension(".manifold.json");
    TriMesh mesh;
    try {
      mesh = load_obj(read_file(mesh_path));
    } catch (const ParseError& e) {
      throw ParseError(e.line(), mesh_path.filename().string() + ": " + e.what());
    }
    auto ann = [&] {
      try {
        return load_keypoint_annotation(read_file(sidecar), K);
      } catch (const SchemaError& e) {
        throw SchemaError(sidecar.filename().string() + (e.path().empty() ? "" : "." + e.path()),
                          e.what());
      }
    }();
    out.push_back({ann.category, std::move(mesh), ann.manifold, K});
  }
  return out;
}

void export_assets(const std::vector<ObjectTemplate>& templates,
                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& t : templates) {
    const auto* mesh = std::get_if<TriMesh>(&t.geometry);
    if (mesh == nullptr) continue;
    std::ofstream obj(dir / (t.category_name + ".obj"), std::ios::binary);
    std::ofstream side(dir / (t.category_name + ".manifold.json"), std::ios::binary);
    if (!obj || !side) throw IoError("cannot write assets to " + dir.string());
    obj << write_obj(*mesh);
    side << write_keypoint_annotation({t.category_name, t.manifold});
  }
}

}  // namespace graspme
