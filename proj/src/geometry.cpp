#include "graspme/geometry.hpp"

#include <cmath>
#include <numbers>


#include "graspme/error.hpp"

namespace graspme {

Pose Pose::inverse() const {
  Pose out;
  out.rotation = rotation.transpose();
  out.translation = -(out.rotation * translation);
  return out;
}

Pose Pose::compose(const Pose& other) const {
  Pose out;
  out.rotation = rotation * other.rotation;
  out.translation = rotation * other.translation + translation;
  return out;
}

bool Pose::is_rigid(double tol) const {
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho < tol && std::abs(rotation.determinant() - 1.0) < tol;
}

Vec3 transform_point(const Pose& pose, const Vec3& p) {
  return pose.rotation * p + pose.translation;
}

Mat3 axis_angle(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

CameraIntrinsics CameraIntrinsics::from_fov(int width, int height, double vertical_fov_rad) {
  if (width <= 0 || height <= 0) throw InvalidArgument("image size must be positive");
  if (!(vertical_fov_rad > 0.0 && vertical_fov_rad < std::numbers::pi)) {
    throw InvalidArgument("vertical field of view must be in (0, pi)");
  }
  CameraIntrinsics k;
  k.width = width;
  k.height = height;
  k.fy = 0.5 * height / std::tan(0.5 * vertical_fov_rad);
  k.fx = k.fy;
  k.cx = 0.5 * width;
  k.cy = 0.5 * height;
  return k;
}

bool CameraIntrinsics::valid() const {
  return fx > 0 && fy > 0 && width > 0 && height > 0 && cx >= 0 && cx < width && cy >= 0 &&
         cy < height;
}

Vec3 Camera::eye() const { return extrinsic.inverse().translation; }

std::optional<PixelPoint> project(const Camera& camera, const Vec3& world_point) {
  const Vec3 p = transform_point(camera.extrinsic, world_point);
  if (!(p.z() > 0.0)) return std::nullopt;
  const auto& k = camera.intrinsics;
  return PixelPoint{k.cx + k.fx * p.x() / p.z(), k.cy + k.fy * p.y() / p.z(), p.z()};
}

Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
  const Vec3 forward = target - eye;
  const double dist = forward.norm();
  if (!(dist > 1e-12)) throw InvalidArgument("look_at: eye and target coincide");
  const Vec3 z = forward / dist;
  const Vec3 right = z.cross(up);
  const double right_norm = right.norm();
  if (!(right_norm > 1e-9 * std::max(1.0, up.norm()))) {
    throw InvalidArgument("look_at: up vector is parallel to the view direction");
  }
  const Vec3 x = right / right_norm;
  const Vec3 y = z.cross(x);

  Pose pose;
  pose.rotation.row(0) = x.transpose();
  pose.rotation.row(1) = y.transpose();
  pose.rotation.row(2) = z.transpose();
  pose.translation = -(pose.rotation * eye);
  return pose;
}

Camera sample_hemisphere_camera(Rng& rng, const Vec3& center, const HemisphereParams& params,
                                const CameraIntrinsics& intrinsics) {
  const double half_pi = 0.5 * std::numbers::pi;
  if (!(params.r_min > 0.0 && params.r_min <= params.r_max)) {
    throw InvalidArgument("hemisphere: require 0 < r_min <= r_max");
  }
  if (!(params.elev_min >= 0.0 && params.elev_min <= params.elev_max &&
        params.elev_max <= half_pi && params.elev_max > 0.0)) {
    throw InvalidArgument("hemisphere: require 0 <= elev_min <= elev_max <= pi/2, elev_max > 0");
  }
  if (!intrinsics.valid()) throw InvalidArgument("hemisphere: invalid intrinsics");

  const double distance = rng.uniform(params.r_min, params.r_max);
  // (0, 1] keeps the eye strictly above the plane when elev_min == 0.
  const double elevation =
      params.elev_min + (params.elev_max - params.elev_min) * rng.uniform_open_closed();
  const double azimuth = 2.0 * std::numbers::pi * rng.uniform();

  const Vec3 dir(std::cos(elevation) * std::cos(azimuth), std::cos(elevation) * std::sin(azimuth),
                 std::sin(elevation));
  const Vec3 eye = center + distance * dir;

  // Near the pole world-up degenerates; image-up then points away from the
  // azimuth direction, which is the limit of the generic case.
  Vec3 up = Vec3::UnitZ();
  if (std::cos(elevation) < 1e-6) up = -Vec3(std::cos(azimuth), std::sin(azimuth), 0.0);

  return Camera{intrinsics, look_at(eye, center, up)};
}

}  // namespace graspme
