#include "graspme/shapes.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "graspme/error.hpp"
#include "json.hpp"

namespace graspme {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Vec3 face_normal(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 n = (b - a).cross(c - a);
  const double len = n.norm();
  if (!(len > 0.0) || !std::isfinite(len)) return Vec3::UnitZ();
  return n / len;
}

// Convex primitives are centered at the origin: orient every face outward.
TriMesh finish_convex(std::vector<Vec3> vertices, std::vector<Triangle> triangles) {
  for (auto& tri : triangles) {
    const Vec3& a = vertices[tri[0]];
    const Vec3& b = vertices[tri[1]];
    const Vec3& c = vertices[tri[2]];
    const Vec3 centroid = (a + b + c) / 3.0;
    if ((b - a).cross(c - a).dot(centroid) < 0.0) std::swap(tri[1], tri[2]);
  }
  return TriMesh::from_faces(std::move(vertices), std::move(triangles));
}

// Ring of `n` points around the X axis at offset `x` with radius `r`.
std::uint32_t add_ring(std::vector<Vec3>& vertices, double x, double r, int n) {
  const auto start = static_cast<std::uint32_t>(vertices.size());
  for (int i = 0; i < n; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / n;
    vertices.emplace_back(x, r * std::cos(theta), r * std::sin(theta));
  }
  return start;
}

void connect_rings(std::vector<Triangle>& tris, std::uint32_t a, std::uint32_t b, int n) {
  for (int i = 0; i < n; ++i) {
    const auto i0 = static_cast<std::uint32_t>(i);
    const auto i1 = static_cast<std::uint32_t>((i + 1) % n);
    tris.push_back({a + i0, a + i1, b + i1});
    tris.push_back({a + i0, b + i1, b + i0});
  }
}

void fan_to_point(std::vector<Triangle>& tris, std::uint32_t ring, std::uint32_t apex, int n) {
  for (int i = 0; i < n; ++i) {
    tris.push_back({ring + static_cast<std::uint32_t>(i),
                    ring + static_cast<std::uint32_t>((i + 1) % n), apex});
  }
}

TriMesh tessellate_cuboid(const Cuboid& c) {
  std::vector<Vec3> v;
  for (int i = 0; i < 8; ++i) {
    v.emplace_back((i & 1 ? 0.5 : -0.5) * c.length, (i & 2 ? 0.5 : -0.5) * c.width,
                   (i & 4 ? 0.5 : -0.5) * c.height);
  }
  std::vector<Triangle> t = {
      {0, 2, 6}, {0, 6, 4},  // -X
      {1, 5, 7}, {1, 7, 3},  // +X
      {0, 4, 5}, {0, 5, 1},  // -Y
      {2, 3, 7}, {2, 7, 6},  // +Y
      {0, 1, 3}, {0, 3, 2},  // -Z
      {4, 6, 7}, {4, 7, 5},  // +Z
  };
  return finish_convex(std::move(v), std::move(t));
}

TriMesh tessellate_cylinder(const Cylinder& c, int n) {
  std::vector<Vec3> v;
  std::vector<Triangle> t;
  const double half = 0.5 * c.length;
  const auto a = add_ring(v, -half, c.radius, n);
  const auto b = add_ring(v, half, c.radius, n);
  const auto cap_a = static_cast<std::uint32_t>(v.size());
  v.emplace_back(-half, 0.0, 0.0);
  const auto cap_b = static_cast<std::uint32_t>(v.size());
  v.emplace_back(half, 0.0, 0.0);
  connect_rings(t, a, b, n);
  fan_to_point(t, a, cap_a, n);
  fan_to_point(t, b, cap_b, n);
  return finish_convex(std::move(v), std::move(t));
}

TriMesh tessellate_capsule(const Capsule& c, int n) {
  std::vector<Vec3> v;
  std::vector<Triangle> t;
  const double half = 0.5 * c.length;
  const int latitudes = std::max(2, n / 4);

  // Rings from the -X pole to the +X pole; latitude 0 is each equator.
  std::vector<std::uint32_t> rings;
  for (int j = latitudes - 1; j >= 0; --j) {
    const double phi = 0.5 * std::numbers::pi * j / latitudes;
    rings.push_back(add_ring(v, -half - c.radius * std::sin(phi), c.radius * std::cos(phi), n));
  }
  for (int j = 0; j < latitudes; ++j) {
    const double phi = 0.5 * std::numbers::pi * j / latitudes;
    rings.push_back(add_ring(v, half + c.radius * std::sin(phi), c.radius * std::cos(phi), n));
  }
  const auto pole_a = static_cast<std::uint32_t>(v.size());
  v.emplace_back(-half - c.radius, 0.0, 0.0);
  const auto pole_b = static_cast<std::uint32_t>(v.size());
  v.emplace_back(half + c.radius, 0.0, 0.0);

  for (std::size_t i = 0; i + 1 < rings.size(); ++i) connect_rings(t, rings[i], rings[i + 1], n);
  fan_to_point(t, rings.front(), pole_a, n);
  fan_to_point(t, rings.back(), pole_b, n);
  return finish_convex(std::move(v), std::move(t));
}

bool parse_double(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_long(std::string_view token, long& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

void append_number(std::string& out, double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

}  // namespace

PrimitiveKind kind_of(const PrimitiveShape& shape) {
  return std::visit(Overloaded{[](const Cuboid&) { return PrimitiveKind::kCuboid; },
                               [](const Cylinder&) { return PrimitiveKind::kCylinder; },
                               [](const Capsule&) { return PrimitiveKind::kCapsule; }},
                    shape);
}

std::string_view kind_name(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::kCuboid: return "cuboid";
    case PrimitiveKind::kCylinder: return "cylinder";
    case PrimitiveKind::kCapsule: return "capsule";
  }
  return "unknown";
}

bool is_valid(const PrimitiveShape& shape) {
  return std::visit(
      Overloaded{[](const Cuboid& c) { return c.length > 0 && c.width > 0 && c.height > 0; },
                 [](const Cylinder& c) { return c.length > 0 && c.radius > 0; },
                 [](const Capsule& c) { return c.length > 0 && c.radius > 0; }},
      shape);
}

TriMesh TriMesh::from_faces(std::vector<Vec3> vertices, std::vector<Triangle> triangles) {
  if (triangles.empty()) throw InvalidArgument("mesh has no triangles");
  TriMesh mesh;
  mesh.normals.reserve(triangles.size());
  for (const auto& tri : triangles) {
    for (auto idx : tri) {
      if (idx >= vertices.size()) throw InvalidArgument("triangle index out of range");
    }
    mesh.normals.push_back(face_normal(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]));
  }
  mesh.vertices = std::move(vertices);
  mesh.triangles = std::move(triangles);
  return mesh;
}

Vec3 TriMesh::aabb_min() const {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  for (const auto& v : vertices) lo = lo.cwiseMin(v);
  return lo;
}

Vec3 TriMesh::aabb_max() const {
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());
  for (const auto& v : vertices) hi = hi.cwiseMax(v);
  return hi;
}

std::string_view manifold_kind_name(ManifoldKind kind) {
  return kind == ManifoldKind::kLine ? "line" : "surface";
}

ManifoldKind parse_manifold_kind(std::string_view name) {
  if (name == "line") return ManifoldKind::kLine;
  if (name == "surface") return ManifoldKind::kSurface;
  throw SchemaError("kind", "unknown manifold kind '" + std::string(name) + "'");
}

GraspManifold::GraspManifold(std::vector<Vec3> keypoints, ManifoldKind kind)
    : keypoints_(std::move(keypoints)), kind_(kind) {
  if (keypoints_.size() < 2) throw InvalidArgument("grasp manifold needs at least 2 keypoints");
  if (kind_ == ManifoldKind::kSurface && keypoints_.size() < 3) {
    throw InvalidArgument("surface grasp manifold needs at least 3 keypoints");
  }
  for (std::size_t i = 0; i < keypoints_.size(); ++i) {
    if (!keypoints_[i].allFinite()) throw InvalidArgument("grasp manifold keypoint not finite");
    for (std::size_t j = i + 1; j < keypoints_.size(); ++j) {
      if (keypoints_[i] == keypoints_[j]) {
        throw InvalidArgument("grasp manifold keypoints " + std::to_string(i) + " and " +
                              std::to_string(j) + " coincide");
      }
    }
  }
}

GraspManifold manifold_for_primitive(const PrimitiveShape& shape) {
  const double length = std::visit([](const auto& s) { return s.length; }, shape);
  return GraspManifold({Vec3(-0.5 * length, 0, 0), Vec3(0.5 * length, 0, 0)}, ManifoldKind::kLine);
}

PrimitiveShape sample_primitive_dims(Rng& rng, PrimitiveKind kind,
                                     const PrimitiveSizeConfig& config) {
  auto draw = [&rng](const Range& r) { return rng.uniform(r.lo, r.hi); };
  const bool cube = rng.bernoulli(config.p_cube);

  switch (kind) {
    case PrimitiveKind::kCuboid: {
      std::array<double, 3> dims = {draw(config.cuboid_length), draw(config.cuboid_width),
                                    draw(config.cuboid_height)};
      if (cube) return Cuboid{dims[0], dims[0], dims[0]};
      std::sort(dims.begin(), dims.end(), std::greater<>());
      return Cuboid{dims[0], dims[1], dims[2]};
    }
    case PrimitiveKind::kCylinder:
    case PrimitiveKind::kCapsule: {
      const bool cylinder = kind == PrimitiveKind::kCylinder;
      double length = draw(cylinder ? config.cylinder_length : config.capsule_length);
      double radius = draw(cylinder ? config.cylinder_radius : config.capsule_radius);
      if (cube) {
        length = 2.0 * radius;
      } else if (length < 2.0 * radius) {
        std::swap(length, radius);
        length *= 2.0;
        radius *= 0.5;
      }
      if (cylinder) return Cylinder{length, radius};
      return Capsule{length, radius};
    }
  }
  throw InvalidArgument("unknown primitive kind");
}

TriMesh tessellate(const PrimitiveShape& shape, int segments) {
  if (segments < 3) throw InvalidArgument("tessellate: segments must be >= 3");
  if (!is_valid(shape)) throw InvalidArgument("tessellate: dimensions must be positive");
  return std::visit(
      Overloaded{[](const Cuboid& c) { return tessellate_cuboid(c); },
                 [segments](const Cylinder& c) { return tessellate_cylinder(c, segments); },
                 [segments](const Capsule& c) { return tessellate_capsule(c, segments); }},
      shape);
}

TriMesh load_obj(std::string_view text) {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<std::size_t> triangle_lines;
  std::vector<long> face_refs;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tokens = split_ws(line);
    if (tokens.empty()) {
      if (end == text.size()) break;
      continue;
    }

    if (tokens[0] == "v") {
      if (tokens.size() < 4 || tokens.size() > 5) throw ParseError(line_no, "malformed vertex");
      Vec3 p;
      for (int i = 0; i < 3; ++i) {
        if (!parse_double(tokens[i + 1], p[i])) throw ParseError(line_no, "malformed vertex");
      }
      vertices.push_back(p);
    } else if (tokens[0] == "f") {
      if (tokens.size() < 4) throw ParseError(line_no, "face needs at least 3 vertices");
      face_refs.clear();
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        const auto ref = tokens[i].substr(0, tokens[i].find('/'));
        long idx = 0;
        if (!parse_long(ref, idx) || idx == 0) throw ParseError(line_no, "malformed face index");
        // Negative indices are relative to the vertices read so far.
        if (idx < 0) idx += static_cast<long>(vertices.size()) + 1;
        if (idx < 1) throw ParseError(line_no, "face index out of range");
        face_refs.push_back(idx - 1);
      }
      for (std::size_t i = 1; i + 1 < face_refs.size(); ++i) {
        triangles.push_back({static_cast<std::uint32_t>(face_refs[0]),
                             static_cast<std::uint32_t>(face_refs[i]),
                             static_cast<std::uint32_t>(face_refs[i + 1])});
        triangle_lines.push_back(line_no);
      }
    }
    // vt, vn, groups, materials and anything else are ignored.
    if (end == text.size()) break;
  }

  for (std::size_t i = 0; i < triangles.size(); ++i) {
    for (auto idx : triangles[i]) {
      if (idx >= vertices.size()) throw ParseError(triangle_lines[i], "face index out of range");
    }
  }
  if (triangles.empty()) throw ParseError(line_no, "mesh has no faces");
  return TriMesh::from_faces(std::move(vertices), std::move(triangles));
}

std::string write_obj(const TriMesh& mesh) {
  std::string out;
  for (const auto& v : mesh.vertices) {
    out += "v";
    for (int i = 0; i < 3; ++i) {
      out += ' ';
      append_number(out, v[i]);
    }
    out += '\n';
  }
  for (const auto& t : mesh.triangles) {
    out += "f " + std::to_string(t[0] + 1) + ' ' + std::to_string(t[1] + 1) + ' ' +
           std::to_string(t[2] + 1) + '\n';
  }
  return out;
}

std::vector<ObjectKeypoint> pad_keypoints(std::vector<ObjectKeypoint> keypoints, int K) {
  if (K < 0 || keypoints.size() > static_cast<std::size_t>(K)) {
    throw InvalidArgument("pad_keypoints: " + std::to_string(keypoints.size()) +
                          " keypoints exceed budget K=" + std::to_string(K));
  }
  keypoints.resize(static_cast<std::size_t>(K), ObjectKeypoint{Vec3::Zero(), 0});
  return keypoints;
}

KeypointAnnotation load_keypoint_annotation(std::string_view text, int K) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("", "annotation must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "category" && key != "kind" && key != "keypoints") {
      throw SchemaError(key, "unknown key");
    }
  }
  if (!doc.contains("category") || !doc["category"].is_string()) {
    throw SchemaError("category", "expected string");
  }
  if (!doc.contains("kind") || !doc["kind"].is_string()) throw SchemaError("kind", "expected string");
  if (!doc.contains("keypoints") || !doc["keypoints"].is_array()) {
    throw SchemaError("keypoints", "expected array");
  }

  const ManifoldKind kind = parse_manifold_kind(doc["kind"].get<std::string>());
  const auto& kps = doc["keypoints"];
  if (kps.size() < 2 || kps.size() > static_cast<std::size_t>(K)) {
    throw SchemaError("keypoints", "keypoint count " + std::to_string(kps.size()) +
                                       " outside [2, " + std::to_string(K) + "]");
  }
  std::vector<Vec3> points;
  for (std::size_t i = 0; i < kps.size(); ++i) {
    const auto& p = kps[i];
    const std::string path = "keypoints[" + std::to_string(i) + "]";
    if (!p.is_array() || p.size() != 3) throw SchemaError(path, "expected [x, y, z]");
    Vec3 v;
    for (int j = 0; j < 3; ++j) {
      if (!p[j].is_number()) throw SchemaError(path, "coordinate is not a number");
      v[j] = p[j].get<double>();
    }
    points.push_back(v);
  }
  try {
    return KeypointAnnotation{doc["category"].get<std::string>(),
                              GraspManifold(std::move(points), kind)};
  } catch (const InvalidArgument& e) {
    throw SchemaError("keypoints", e.what());
  }
}

std::string write_keypoint_annotation(const KeypointAnnotation& annotation) {
  nlohmann::json doc;
  doc["category"] = annotation.category;
  doc["kind"] = std::string(manifold_kind_name(annotation.manifold.kind()));
  doc["keypoints"] = nlohmann::json::array();
  for (const auto& p : annotation.manifold.keypoints()) {
    doc["keypoints"].push_back({p.x(), p.y(), p.z()});
  }
  return doc.dump(2) + "\n";
}

}  // namespace graspme
