#include "graspme/scene.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "graspme/error.hpp"
#include "json.hpp"

namespace graspme {

namespace {

using nlohmann::json;

constexpr double kDeg = std::numbers::pi / 180.0;

void check_range(const Range& r, const char* name, bool positive = false) {
  if (!(std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi)) {
    throw InvalidArgument(std::string(name) + ": range must be ordered and finite");
  }
  if (positive && !(r.lo > 0.0)) throw InvalidArgument(std::string(name) + ": must be positive");
}

void check_color(const Rgb& lo, const Rgb& hi, const char* name) {
  for (int c = 0; c < 3; ++c) {
    if (!(0.0 <= lo[c] && lo[c] <= hi[c] && hi[c] <= 1.0)) {
      throw InvalidArgument(std::string(name) + ": color bounds must satisfy 0 <= min <= max <= 1");
    }
  }
}

// Walks a JSON object and rejects keys nobody consumed.
class ObjectReader {
 public:
  ObjectReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw SchemaError(path_, "expected object");
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.contains(key)) throw SchemaError(join(key), "unknown key");
    }
  }

  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out, double scale = 1.0) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw SchemaError(join(key), "expected number");
      out = v->get<double>() * scale;
    }
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw SchemaError(join(key), "expected integer");
      out = v->get<int>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw SchemaError(join(key), "expected string");
      out = v->get<std::string>();
    }
  }

  void range(const std::string& key, Range& out, double scale = 1.0) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
        throw SchemaError(join(key), "expected [min, max]");
      }
      out = {(*v)[0].get<double>() * scale, (*v)[1].get<double>() * scale};
    }
  }

  void int_range(const std::string& key, IntRange& out) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number_integer() ||
          !(*v)[1].is_number_integer()) {
        throw SchemaError(join(key), "expected [min, max] integers");
      }
      out = {(*v)[0].get<int>(), (*v)[1].get<int>()};
    }
  }

  void color(const std::string& key, Rgb& out) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != 3) throw SchemaError(join(key), "expected [r, g, b]");
      for (int c = 0; c < 3; ++c) {
        if (!(*v)[c].is_number()) throw SchemaError(join(key), "expected [r, g, b]");
        out[c] = (*v)[c].get<double>();
      }
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

json range_json(const Range& r, double scale = 1.0) { return {r.lo / scale, r.hi / scale}; }
json color_json(const Rgb& c) { return {c[0], c[1], c[2]}; }

Pose with_yaw(const Mat3& tilt, double height, double yaw) {
  Pose pose;
  pose.rotation = axis_angle(Vec3::UnitZ(), yaw) * tilt;
  pose.translation = Vec3(0.0, 0.0, height);
  return pose;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

void GenerationConfig::validate() const {
  if (!(object_count.lo >= 1 && object_count.lo <= object_count.hi)) {
    throw InvalidArgument("object_count: require 1 <= min <= max");
  }
  if (object_count.hi > 255) throw InvalidArgument("object_count: at most 255 objects per scene");
  check_range(sizes.cuboid_length, "sizes.cuboid_length", true);
  check_range(sizes.cuboid_width, "sizes.cuboid_width", true);
  check_range(sizes.cuboid_height, "sizes.cuboid_height", true);
  check_range(sizes.cylinder_length, "sizes.cylinder_length", true);
  check_range(sizes.cylinder_radius, "sizes.cylinder_radius", true);
  check_range(sizes.capsule_length, "sizes.capsule_length", true);
  check_range(sizes.capsule_radius, "sizes.capsule_radius", true);
  if (!(sizes.p_cube >= 0.0 && sizes.p_cube <= 1.0)) throw InvalidArgument("sizes.p_cube: must be in [0, 1]");
  if (!(table_width > 0.0 && table_depth > 0.0)) throw InvalidArgument("table: extent must be positive");
  check_color(table_color_min, table_color_max, "table");
  check_color(object_color_min, object_color_max, "object_color");
  check_range(light_distance, "light.distance", true);
  check_range(light_elevation, "light.elevation_deg");
  if (!(light_elevation.lo > 0.0 && light_elevation.hi <= 0.5 * std::numbers::pi)) {
    throw InvalidArgument("light.elevation_deg: must lie in (0, 90]");
  }
  check_range(light_intensity, "light.intensity", true);
  check_range(light_ambient, "light.ambient");
  if (!(light_ambient.lo >= 0.0 && light_ambient.hi <= 1.0)) {
    throw InvalidArgument("light.ambient: must lie in [0, 1]");
  }
  if (!(camera.r_min > 0.0 && camera.r_min <= camera.r_max)) {
    throw InvalidArgument("camera.distance: require 0 < min <= max");
  }
  if (!(camera.elev_min >= 0.0 && camera.elev_min <= camera.elev_max &&
        camera.elev_max <= 0.5 * std::numbers::pi && camera.elev_max > 0.0)) {
    throw InvalidArgument("camera.elevation_deg: require 0 <= min <= max <= 90, max > 0");
  }
  if (!(vertical_fov > 0.0 && vertical_fov < std::numbers::pi)) {
    throw InvalidArgument("camera.vertical_fov_deg: must lie in (0, 180)");
  }
  if (image_width <= 0 || image_height <= 0) throw InvalidArgument("image: size must be positive");
  if (max_retries < 1) throw InvalidArgument("max_retries: must be >= 1");
  if (segments < 3) throw InvalidArgument("segments: must be >= 3");
  if (!(p_upright >= 0.0 && p_upright <= 1.0)) throw InvalidArgument("p_upright: must be in [0, 1]");
  if (!(mesh_jitter >= 0.0)) throw InvalidArgument("mesh_jitter_deg: must be >= 0");
}

CameraIntrinsics GenerationConfig::intrinsics() const {
  return CameraIntrinsics::from_fov(image_width, image_height, vertical_fov);
}

GenerationConfig parse_generation_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("invalid JSON: ") + e.what());
  }
  GenerationConfig c;
  {
    ObjectReader root(doc, "");
    root.int_range("object_count", c.object_count);
    if (const json* sizes = root.find("sizes")) {
      ObjectReader r(*sizes, "sizes");
      r.range("cuboid_length", c.sizes.cuboid_length);
      r.range("cuboid_width", c.sizes.cuboid_width);
      r.range("cuboid_height", c.sizes.cuboid_height);
      r.range("cylinder_length", c.sizes.cylinder_length);
      r.range("cylinder_radius", c.sizes.cylinder_radius);
      r.range("capsule_length", c.sizes.capsule_length);
      r.range("capsule_radius", c.sizes.capsule_radius);
      r.number("p_cube", c.sizes.p_cube);
      r.finish();
    }
    if (const json* table = root.find("table")) {
      ObjectReader r(*table, "table");
      r.number("width", c.table_width);
      r.number("depth", c.table_depth);
      r.color("color_min", c.table_color_min);
      r.color("color_max", c.table_color_max);
      r.finish();
    }
    if (const json* color = root.find("object_color")) {
      ObjectReader r(*color, "object_color");
      r.color("min", c.object_color_min);
      r.color("max", c.object_color_max);
      r.finish();
    }
    if (const json* light = root.find("light")) {
      ObjectReader r(*light, "light");
      r.range("distance", c.light_distance);
      r.range("elevation_deg", c.light_elevation, kDeg);
      r.range("intensity", c.light_intensity);
      r.range("ambient", c.light_ambient);
      r.finish();
    }
    if (const json* cam = root.find("camera")) {
      ObjectReader r(*cam, "camera");
      Range distance{c.camera.r_min, c.camera.r_max};
      Range elevation{c.camera.elev_min, c.camera.elev_max};
      r.range("distance", distance);
      r.range("elevation_deg", elevation, kDeg);
      r.number("vertical_fov_deg", c.vertical_fov, kDeg);
      r.finish();
      c.camera = {distance.lo, distance.hi, elevation.lo, elevation.hi};
    }
    if (const json* image = root.find("image")) {
      ObjectReader r(*image, "image");
      r.integer("width", c.image_width);
      r.integer("height", c.image_height);
      r.finish();
    }
    root.integer("max_retries", c.max_retries);
    root.integer("segments", c.segments);
    root.number("p_upright", c.p_upright);
    root.number("mesh_jitter_deg", c.mesh_jitter, kDeg);
    root.string("asset_dir", c.asset_dir);
    root.finish();
  }
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw SchemaError("", e.what());
  }
  return c;
}

std::string generation_config_to_json(const GenerationConfig& c) {
  json doc;
  doc["object_count"] = {c.object_count.lo, c.object_count.hi};
  doc["sizes"] = {{"cuboid_length", range_json(c.sizes.cuboid_length)},
                  {"cuboid_width", range_json(c.sizes.cuboid_width)},
                  {"cuboid_height", range_json(c.sizes.cuboid_height)},
                  {"cylinder_length", range_json(c.sizes.cylinder_length)},
                  {"cylinder_radius", range_json(c.sizes.cylinder_radius)},
                  {"capsule_length", range_json(c.sizes.capsule_length)},
                  {"capsule_radius", range_json(c.sizes.capsule_radius)},
                  {"p_cube", c.sizes.p_cube}};
  doc["table"] = {{"width", c.table_width},
                  {"depth", c.table_depth},
                  {"color_min", color_json(c.table_color_min)},
                  {"color_max", color_json(c.table_color_max)}};
  doc["object_color"] = {{"min", color_json(c.object_color_min)},
                         {"max", color_json(c.object_color_max)}};
  doc["light"] = {{"distance", range_json(c.light_distance)},
                  {"elevation_deg", range_json(c.light_elevation, kDeg)},
                  {"intensity", range_json(c.light_intensity)},
                  {"ambient", range_json(c.light_ambient)}};
  doc["camera"] = {{"distance", {c.camera.r_min, c.camera.r_max}},
                   {"elevation_deg", {c.camera.elev_min / kDeg, c.camera.elev_max / kDeg}},
                   {"vertical_fov_deg", c.vertical_fov / kDeg}};
  doc["image"] = {{"width", c.image_width}, {"height", c.image_height}};
  doc["max_retries"] = c.max_retries;
  doc["segments"] = c.segments;
  doc["p_upright"] = c.p_upright;
  doc["mesh_jitter_deg"] = c.mesh_jitter / kDeg;
  doc["asset_dir"] = c.asset_dir;
  return doc.dump(2) + "\n";
}

SceneObject make_scene_object(const ObjectTemplate& tmpl, std::size_t template_index,
                              Geometry shape, const Pose& pose, int instance_id, int segments) {
  TriMesh mesh = std::visit(
      Overloaded{[segments](const PrimitiveShape& s) { return tessellate(s, segments); },
                 [](const TriMesh& m) { return m; }},
      shape);
  GraspManifold manifold = tmpl.manifold;
  if (const auto* prim = std::get_if<PrimitiveShape>(&shape)) manifold = manifold_for_primitive(*prim);
  return SceneObject{template_index, tmpl.category_name,  std::move(shape),
                     std::move(mesh), std::move(manifold), tmpl.keypoint_budget,
                     tmpl.is_primitive(), pose,            Rgb::Ones(),
                     instance_id};
}

Pose rest_pose(const Geometry& shape, Rng& rng, double p_upright, double mesh_jitter) {
  const double quarter = 0.5 * std::numbers::pi;
  const Mat3 x_up = axis_angle(Vec3::UnitY(), -quarter);  // maps +X to +Z
  const Mat3 y_up = axis_angle(Vec3::UnitX(), quarter);   // maps +Y to +Z

  if (const auto* prim = std::get_if<PrimitiveShape>(&shape)) {
    Mat3 tilt = Mat3::Identity();
    double height = 0.0;
    if (const auto* c = std::get_if<Cuboid>(prim)) {
      switch (rng.uniform_int(0, 2)) {
        case 0: height = 0.5 * c->height; break;
        case 1: tilt = y_up; height = 0.5 * c->width; break;
        default: tilt = x_up; height = 0.5 * c->length; break;
      }
    } else if (const auto* c = std::get_if<Cylinder>(prim)) {
      if (rng.bernoulli(p_upright)) {
        tilt = x_up;
        height = 0.5 * c->length;
      } else {
        height = c->radius;
      }
    } else {
      height = std::get<Capsule>(*prim).radius;
    }
    return with_yaw(tilt, height, 2.0 * std::numbers::pi * rng.uniform());
  }

  // Meshes lie on the largest face of their bounding box, randomly flipped,
  // then tilted by up to `mesh_jitter` about a random horizontal axis.
  const auto& mesh = std::get<TriMesh>(shape);
  const Vec3 extent = mesh.aabb_max() - mesh.aabb_min();
  int thin = 0;
  extent.minCoeff(&thin);
  const bool flip = rng.bernoulli(0.5);
  Mat3 base = Mat3::Identity();
  if (thin == 0) base = flip ? axis_angle(Vec3::UnitY(), quarter) : x_up;
  if (thin == 1) base = flip ? axis_angle(Vec3::UnitX(), -quarter) : y_up;
  if (thin == 2 && flip) base = axis_angle(Vec3::UnitX(), std::numbers::pi);

  const double axis_angle_rad = 2.0 * std::numbers::pi * rng.uniform();
  const double tilt_angle = rng.uniform(-mesh_jitter, mesh_jitter);
  const Mat3 jitter =
      axis_angle(Vec3(std::cos(axis_angle_rad), std::sin(axis_angle_rad), 0.0), tilt_angle);
  const double yaw = 2.0 * std::numbers::pi * rng.uniform();

  Pose pose = with_yaw(jitter * base, 0.0, yaw);
  double z_min = std::numeric_limits<double>::infinity();
  for (const auto& v : mesh.vertices) z_min = std::min(z_min, (pose.rotation * v).z());
  pose.translation.z() = -z_min;
  return pose;
}

BoundingCylinder bounding_cylinder(const SceneObject& object) {
  BoundingCylinder b;
  b.x = object.pose.translation.x();
  b.y = object.pose.translation.y();
  b.z_min = std::numeric_limits<double>::infinity();
  b.z_max = -std::numeric_limits<double>::infinity();
  for (const auto& v : object.mesh.vertices) {
    const Vec3 w = transform_point(object.pose, v);
    b.radius = std::max(b.radius, std::hypot(w.x() - b.x, w.y() - b.y));
    b.z_min = std::min(b.z_min, w.z());
    b.z_max = std::max(b.z_max, w.z());
  }
  return b;
}

namespace {

bool cylinders_overlap(const BoundingCylinder& a, const BoundingCylinder& b) {
  const double d = std::hypot(a.x - b.x, a.y - b.y);
  return d <= a.radius + b.radius && a.z_min <= b.z_max && b.z_min <= a.z_max;
}

}  // namespace

bool overlap_test(const SceneObject& a, const SceneObject& b) {
  return cylinders_overlap(bounding_cylinder(a), bounding_cylinder(b));
}

Scene generate_scene(std::uint64_t seed, const GenerationConfig& config,
                     const std::vector<ObjectTemplate>& templates) {
  if (templates.empty()) throw InvalidArgument("generate_scene: no object templates");
  config.validate();
  Rng rng(seed);

  Scene scene;
  scene.seed = seed;
  scene.table_width = config.table_width;
  scene.table_depth = config.table_depth;

  auto sample_color = [&rng](const Rgb& lo, const Rgb& hi) {
    Rgb c;
    for (int i = 0; i < 3; ++i) c[i] = rng.uniform(lo[i], hi[i]);
    return c;
  };

  const auto count = rng.uniform_int(config.object_count.lo, config.object_count.hi);
  std::vector<BoundingCylinder> placed;
  for (std::int64_t i = 0; i < count; ++i) {
    const auto tidx = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(templates.size()) - 1));
    const ObjectTemplate& tmpl = templates[tidx];
    Geometry shape = tmpl.geometry;
    if (const auto* prim = std::get_if<PrimitiveShape>(&tmpl.geometry)) {
      shape = sample_primitive_dims(rng, kind_of(*prim), config.sizes);
    }
    const Rgb color = sample_color(config.object_color_min, config.object_color_max);
    const Pose pose = rest_pose(shape, rng, config.p_upright, config.mesh_jitter);

    SceneObject object = make_scene_object(tmpl, tidx, std::move(shape), pose,
                                           static_cast<int>(scene.objects.size()) + 1,
                                           config.segments);
    object.color = color;
    const BoundingCylinder at_origin = bounding_cylinder(object);

    for (int attempt = 0; attempt < config.max_retries; ++attempt) {
      BoundingCylinder candidate = at_origin;
      candidate.x = rng.uniform(-0.5 * config.table_width, 0.5 * config.table_width);
      candidate.y = rng.uniform(-0.5 * config.table_depth, 0.5 * config.table_depth);
      bool clear = true;
      for (const auto& other : placed) {
        if (cylinders_overlap(candidate, other)) {
          clear = false;
          break;
        }
      }
      if (clear) {
        object.pose.translation.x() = candidate.x;
        object.pose.translation.y() = candidate.y;
        placed.push_back(candidate);
        scene.objects.push_back(std::move(object));
        break;
      }
    }
  }
  if (scene.objects.empty()) throw Error("generate_scene: every object placement failed");

  scene.table_color = sample_color(config.table_color_min, config.table_color_max);
  const double light_d = rng.uniform(config.light_distance.lo, config.light_distance.hi);
  const double light_e = rng.uniform(config.light_elevation.lo, config.light_elevation.hi);
  const double light_a = 2.0 * std::numbers::pi * rng.uniform();
  scene.light.position = light_d * Vec3(std::cos(light_e) * std::cos(light_a),
                                        std::cos(light_e) * std::sin(light_a), std::sin(light_e));
  scene.light.intensity = rng.uniform(config.light_intensity.lo, config.light_intensity.hi);
  scene.light.ambient = rng.uniform(config.light_ambient.lo, config.light_ambient.hi);
  scene.camera = sample_hemisphere_camera(rng, Vec3::Zero(), config.camera, config.intrinsics());
  return scene;
}

}  // namespace graspme
