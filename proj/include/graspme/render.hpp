#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graspme/mask.hpp"
#include "graspme/scene.hpp"

namespace graspme {

/// Per-frame rasters. Pixel (x, y) samples the image point (x, y): pixel
/// centers sit on integer coordinates, so a sub-pixel position (u, v) falls
/// in pixel (floor(u + 0.5), floor(v + 0.5)).
struct FrameBuffers {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;       // row-major, 3 bytes per pixel
  std::vector<double> depth;           // camera Z in meters, +inf for background
  std::vector<std::int32_t> instance_id;  // 0 = table or background

  FrameBuffers() = default;
  FrameBuffers(int w, int h);

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  BinaryMask mask_of(std::int32_t id) const;
};

struct RenderSettings {
  Rgb background = Rgb(0.0, 0.0, 0.0);
  double near_plane = 1e-3;
};

/// Flat-shaded z-buffer rasterization of the table quad and all objects.
/// Exact depth ties go to the lower instance id.
FrameBuffers rasterize(const Scene& scene, const RenderSettings& settings = {});

struct Keypoint2D {
  double u = 0.0;
  double v = 0.0;
  int flag = 0;  // 0 absent/padding, 1 occluded or out of frame, 2 visible

  friend bool operator==(const Keypoint2D&, const Keypoint2D&) = default;
};

/// Pixel a sub-pixel coordinate falls in (nearest integer, ties up).
inline int pixel_of(double coord) { return static_cast<int>(std::floor(coord + 0.5)); }

/// Projects the object's manifold keypoints and flags their visibility from
/// the instance-id buffer. Padded to the object's K with flag-0 entries.
std::vector<Keypoint2D> annotate_keypoints(const Scene& scene, const FrameBuffers& buffers,
                                           const SceneObject& object);

/// Swaps the two keypoints of a symmetric object so that the first one is
/// visible whenever either is. Throws InvalidArgument unless size == 2.
std::vector<Keypoint2D> apply_simple_swap(std::vector<Keypoint2D> keypoints);

struct AnnotatedObject {
  int instance_id = 0;
  std::size_t template_index = 0;
  std::string category;
  ManifoldKind kind = ManifoldKind::kLine;
  BBox bbox;
  BinaryMask mask;
  std::vector<Keypoint2D> keypoints;
};

/// One annotation per object with a non-empty visible mask, in instance order.
std::vector<AnnotatedObject> annotate_scene(const Scene& scene, const FrameBuffers& buffers);

}  // namespace graspme
