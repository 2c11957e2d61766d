#include "graspme/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "graspme/error.hpp"

namespace graspme {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ScreenVertex {
  double x = 0.0;
  double y = 0.0;
  double inv_z = 0.0;
};

struct ClipVertex {
  Vec3 p;  // camera frame
};

double edge(const ScreenVertex& a, const ScreenVertex& b, double px, double py) {
  return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
}

// Top-left fill rule for a counter-clockwise (positive area in this edge
// convention) triangle: shared edges are owned by exactly one triangle.
bool owns_edge(const ScreenVertex& a, const ScreenVertex& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  return dy < 0.0 || (dy == 0.0 && dx > 0.0);
}

class Rasterizer {
 public:
  Rasterizer(FrameBuffers& fb, const Camera& camera, double near_plane)
      : fb_(fb), k_(camera.intrinsics), near_(near_plane) {}

  void draw(const std::array<Vec3, 3>& cam, std::int32_t id, const std::array<std::uint8_t, 3>& rgb) {
    // Clip against the near plane (Sutherland-Hodgman, one plane).
    std::array<Vec3, 4> poly{};
    int n = 0;
    for (int i = 0; i < 3; ++i) {
      const Vec3& a = cam[i];
      const Vec3& b = cam[(i + 1) % 3];
      const bool a_in = a.z() >= near_;
      const bool b_in = b.z() >= near_;
      if (a_in) poly[n++] = a;
      if (a_in != b_in) {
        const double t = (near_ - a.z()) / (b.z() - a.z());
        poly[n++] = a + t * (b - a);
      }
    }
    if (n < 3) return;
    std::array<ScreenVertex, 4> sv{};
    for (int i = 0; i < n; ++i) {
      const double inv_z = 1.0 / poly[i].z();
      sv[i] = {k_.cx + k_.fx * poly[i].x() * inv_z, k_.cy + k_.fy * poly[i].y() * inv_z, inv_z};
    }
    for (int i = 1; i + 1 < n; ++i) fill(sv[0], sv[i], sv[i + 1], id, rgb);
  }

 private:
  void fill(ScreenVertex a, ScreenVertex b, ScreenVertex c, std::int32_t id,
            const std::array<std::uint8_t, 3>& rgb) {
    double area = edge(a, b, c.x, c.y);
    if (area == 0.0 || !std::isfinite(area)) return;
    if (area < 0.0) {
      std::swap(b, c);
      area = -area;
    }
    const int x0 = std::max(0, static_cast<int>(std::ceil(std::min({a.x, b.x, c.x}))));
    const int x1 = std::min(fb_.width - 1, static_cast<int>(std::floor(std::max({a.x, b.x, c.x}))));
    const int y0 = std::max(0, static_cast<int>(std::ceil(std::min({a.y, b.y, c.y}))));
    const int y1 = std::min(fb_.height - 1, static_cast<int>(std::floor(std::max({a.y, b.y, c.y}))));
    if (x0 > x1 || y0 > y1) return;

    const bool own_bc = owns_edge(b, c);
    const bool own_ca = owns_edge(c, a);
    const bool own_ab = owns_edge(a, b);
    const double inv_area = 1.0 / area;

    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double w0 = edge(b, c, x, y);
        const double w1 = edge(c, a, x, y);
        const double w2 = edge(a, b, x, y);
        if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
        if ((w0 == 0.0 && !own_bc) || (w1 == 0.0 && !own_ca) || (w2 == 0.0 && !own_ab)) continue;
        const double inv_z = (w0 * a.inv_z + w1 * b.inv_z + w2 * c.inv_z) * inv_area;
        const double z = 1.0 / inv_z;
        const std::size_t idx = fb_.index(x, y);
        if (z < fb_.depth[idx] || (z == fb_.depth[idx] && id < fb_.instance_id[idx])) {
          fb_.depth[idx] = z;
          fb_.instance_id[idx] = id;
          fb_.rgb[3 * idx + 0] = rgb[0];
          fb_.rgb[3 * idx + 1] = rgb[1];
          fb_.rgb[3 * idx + 2] = rgb[2];
        }
      }
    }
  }

  FrameBuffers& fb_;
  const CameraIntrinsics& k_;
  double near_;
};

std::uint8_t to_byte(double c) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
}

std::array<std::uint8_t, 3> shade(const Rgb& color, Vec3 normal, const Vec3& centroid,
                                  const Vec3& eye, const Light& light) {
  // Two-sided lighting: the visible side of a face is the lit side.
  if (normal.dot(eye - centroid) < 0.0) normal = -normal;
  const Vec3 to_light = (light.position - centroid).normalized();
  const double factor = light.ambient + light.intensity * std::max(0.0, normal.dot(to_light));
  return {to_byte(color[0] * factor), to_byte(color[1] * factor), to_byte(color[2] * factor)};
}

}  // namespace

FrameBuffers::FrameBuffers(int w, int h)
    : width(w),
      height(h),
      rgb(static_cast<std::size_t>(w) * h * 3, 0),
      depth(static_cast<std::size_t>(w) * h, kInf),
      instance_id(static_cast<std::size_t>(w) * h, 0) {}

BinaryMask FrameBuffers::mask_of(std::int32_t id) const {
  BinaryMask mask(width, height);
  for (std::size_t i = 0; i < instance_id.size(); ++i) mask.pixels[i] = instance_id[i] == id;
  return mask;
}

FrameBuffers rasterize(const Scene& scene, const RenderSettings& settings) {
  const auto& k = scene.camera.intrinsics;
  FrameBuffers fb(k.width, k.height);
  const std::array<std::uint8_t, 3> bg = {to_byte(settings.background[0]),
                                          to_byte(settings.background[1]),
                                          to_byte(settings.background[2])};
  for (std::size_t i = 0; i < fb.instance_id.size(); ++i) {
    std::copy(bg.begin(), bg.end(), fb.rgb.begin() + static_cast<std::ptrdiff_t>(3 * i));
  }

  Rasterizer raster(fb, scene.camera, settings.near_plane);
  const Vec3 eye = scene.camera.eye();
  const Pose& view = scene.camera.extrinsic;

  const double hw = 0.5 * scene.table_width;
  const double hd = 0.5 * scene.table_depth;
  const std::array<Vec3, 4> table = {Vec3(-hw, -hd, 0), Vec3(hw, -hd, 0), Vec3(hw, hd, 0),
                                     Vec3(-hw, hd, 0)};
  const auto table_rgb = shade(scene.table_color, Vec3::UnitZ(), Vec3::Zero(), eye, scene.light);
  for (const auto& tri : {std::array<int, 3>{0, 1, 2}, std::array<int, 3>{0, 2, 3}}) {
    raster.draw({transform_point(view, table[tri[0]]), transform_point(view, table[tri[1]]),
                 transform_point(view, table[tri[2]])},
                0, table_rgb);
  }

  for (const auto& object : scene.objects) {
    const Pose to_camera = view.compose(object.pose);
    std::vector<Vec3> world(object.mesh.vertices.size());
    std::vector<Vec3> cam(object.mesh.vertices.size());
    for (std::size_t i = 0; i < world.size(); ++i) {
      world[i] = transform_point(object.pose, object.mesh.vertices[i]);
      cam[i] = transform_point(to_camera, object.mesh.vertices[i]);
    }
    for (std::size_t t = 0; t < object.mesh.triangles.size(); ++t) {
      const auto& tri = object.mesh.triangles[t];
      const Vec3 centroid = (world[tri[0]] + world[tri[1]] + world[tri[2]]) / 3.0;
      const Vec3 normal = object.pose.rotation * object.mesh.normals[t];
      raster.draw({cam[tri[0]], cam[tri[1]], cam[tri[2]]}, object.instance_id,
                  shade(object.color, normal, centroid, eye, scene.light));
    }
  }
  return fb;
}

std::vector<Keypoint2D> annotate_keypoints(const Scene& scene, const FrameBuffers& buffers,
                                           const SceneObject& object) {
  std::vector<ObjectKeypoint> kps;
  for (const auto& p : object.manifold.keypoints()) kps.push_back({p, 2});
  kps = pad_keypoints(std::move(kps), object.keypoint_budget);

  std::vector<Keypoint2D> out;
  out.reserve(kps.size());
  for (const auto& kp : kps) {
    const auto proj = project(scene.camera, transform_point(object.pose, kp.position));
    Keypoint2D k2;
    if (proj) {
      k2.u = proj->u;
      k2.v = proj->v;
    }
    if (kp.flag == 0) {
      k2.flag = 0;
    } else if (!proj) {
      k2.flag = 1;
    } else {
      const int px = pixel_of(proj->u);
      const int py = pixel_of(proj->v);
      const bool inside = px >= 0 && px < buffers.width && py >= 0 && py < buffers.height;
      k2.flag = inside && buffers.instance_id[buffers.index(px, py)] == object.instance_id ? 2 : 1;
    }
    out.push_back(k2);
  }
  return out;
}

std::vector<Keypoint2D> apply_simple_swap(std::vector<Keypoint2D> keypoints) {
  if (keypoints.size() != 2) {
    throw InvalidArgument("apply_simple_swap: expected 2 keypoints, got " +
                          std::to_string(keypoints.size()));
  }
  if (keypoints[0].flag != 2 && keypoints[1].flag == 2) std::swap(keypoints[0], keypoints[1]);
  return keypoints;
}

std::vector<AnnotatedObject> annotate_scene(const Scene& scene, const FrameBuffers& buffers) {
  std::vector<AnnotatedObject> out;
  for (const auto& object : scene.objects) {
    BinaryMask mask = buffers.mask_of(object.instance_id);
    const auto bbox = bbox_from_mask(mask);
    if (!bbox) continue;
    AnnotatedObject ann;
    ann.instance_id = object.instance_id;
    ann.template_index = object.template_index;
    ann.category = object.category;
    ann.kind = object.manifold.kind();
    ann.bbox = *bbox;
    ann.mask = std::move(mask);
    ann.keypoints = annotate_keypoints(scene, buffers, object);
    if (object.simple) ann.keypoints = apply_simple_swap(std::move(ann.keypoints));
    out.push_back(std::move(ann));
  }
  return out;
}

}  // namespace graspme
