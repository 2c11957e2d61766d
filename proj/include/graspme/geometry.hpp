#pragma once

#include <optional>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "graspme/rng.hpp"

namespace graspme {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Rigid transform p -> rotation * p + translation.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }

  Pose inverse() const;
  /// (*this) after `other`: x -> this(other(x)).
  Pose compose(const Pose& other) const;
  bool is_rigid(double tol = 1e-9) const;
};

Vec3 transform_point(const Pose& pose, const Vec3& p);

/// Rotation by `angle` radians about a unit `axis`.
Mat3 axis_angle(const Vec3& axis, double angle);

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  /// Square pixels, principal point at the image center, given vertical FOV.
  static CameraIntrinsics from_fov(int width, int height, double vertical_fov_rad);
  bool valid() const;
};

/// Pinhole camera. `extrinsic` maps world to camera frame; the camera looks
/// along +Z with +X right and +Y down in the image.
struct Camera {
  CameraIntrinsics intrinsics;
  Pose extrinsic;

  /// Camera center in world coordinates.
  Vec3 eye() const;
};

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

/// Projects a world point. Absent when the point is on or behind the camera
/// plane; points outside the image bounds are still returned.
std::optional<PixelPoint> project(const Camera& camera, const Vec3& world_point);

/// World-to-camera pose with +Z pointing from `eye` toward `target` and
/// image-up aligned with `up`. Throws InvalidArgument on degenerate input.
Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& up);

struct HemisphereParams {
  double r_min = 0.0;
  double r_max = 0.0;
  double elev_min = 0.0;  // radians above the horizontal plane
  double elev_max = 0.0;
};

/// Samples a camera on a spherical shell segment above `center` looking at
/// it. Azimuth is uniform in [0, 2pi), distance and elevation uniform in
/// their ranges.
Camera sample_hemisphere_camera(Rng& rng, const Vec3& center, const HemisphereParams& params,
                                const CameraIntrinsics& intrinsics);

}  // namespace graspme
