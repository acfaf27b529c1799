// Copyright 2026 The panofuse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PANOFUSE_GEOMETRY_HPP_
#define PANOFUSE_GEOMETRY_HPP_

#include <Eigen/Core>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "panofuse/error.hpp"

namespace panofuse
{

inline constexpr double kTwoPi = 2.0 * M_PI;

struct Point3
{
  double x{0.0};
  double y{0.0};
  double z{0.0};
  double intensity{0.0};

  Eigen::Vector3d xyz() const { return {x, y, z}; }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline Point3 make_point(const Eigen::Vector3d & v, double intensity = 0.0)
{
  return {v.x(), v.y(), v.z(), intensity};
}

inline double distance(const Point3 & a, const Point3 & b)
{
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

struct PolarCoord
{
  double rho{0.0};
  double theta{0.0};  // [0, 2*pi)
  double z{0.0};
};

// Maps any angle into [0, 2*pi).
inline double normalize_angle(double theta)
{
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) {
    t += kTwoPi;
  }
  // fmod + add can round up to exactly 2*pi for tiny negative inputs.
  if (t >= kTwoPi) {
    t = 0.0;
  }
  return t;
}

inline PolarCoord cart_to_polar(const Point3 & p)
{
  PolarCoord q;
  q.rho = std::hypot(p.x, p.y);
  q.theta = (p.x == 0.0 && p.y == 0.0) ? 0.0 : normalize_angle(std::atan2(p.y, p.x));
  q.z = p.z;
  return q;
}

inline Point3 polar_to_cart(const PolarCoord & q)
{
  return {q.rho * std::cos(q.theta), q.rho * std::sin(q.theta), q.z, 0.0};
}

/// Pinhole camera. T maps LiDAR-frame homogeneous points into the camera
/// frame; K maps camera-frame points to homogeneous pixels.
struct CameraModel
{
  Eigen::Matrix3d intrinsic{Eigen::Matrix3d::Identity()};
  Eigen::Matrix4d extrinsic{Eigen::Matrix4d::Identity()};
  int width{1};
  int height{1};

  bool contains_pixel(double u, double v) const
  {
    return u >= 0.0 && v >= 0.0 && u < static_cast<double>(width) &&
           v < static_cast<double>(height);
  }
};

/// Checks the calibration invariants: upper-triangular K with positive focal
/// lengths, proper rotation in T, positive image size. Augmented cameras may
/// carry scale or reflection in T and are not expected to pass.
inline void validate_camera(const CameraModel & cam)
{
  const auto & k = cam.intrinsic;
  if (k(1, 0) != 0.0 || k(2, 0) != 0.0 || k(2, 1) != 0.0 || !(k(0, 0) > 0.0) ||
      !(k(1, 1) > 0.0)) {
    throw Error(Errc::kBadConfig, "intrinsic matrix must be upper-triangular with positive focals");
  }
  const Eigen::Matrix3d r = cam.extrinsic.topLeftCorner<3, 3>();
  const double orth = (r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (orth > 1e-6 || std::abs(r.determinant() - 1.0) > 1e-6) {
    throw Error(Errc::kBadConfig, "extrinsic rotation block is not a proper rotation");
  }
  if (cam.width <= 0 || cam.height <= 0) {
    throw Error(Errc::kBadConfig, "image size must be positive");
  }
  if (!cam.intrinsic.allFinite() || !cam.extrinsic.allFinite()) {
    throw Error(Errc::kBadConfig, "calibration contains non-finite entries");
  }
}

struct PixelCoord
{
  double u{0.0};
  double v{0.0};
  double depth{0.0};
};

/// K * T * [x, y, z, 1]^T, without the perspective division.
inline Eigen::Vector3d project_homogeneous(const Point3 & p, const CameraModel & cam, double * depth)
{
  const Eigen::Vector4d cam_h = cam.extrinsic * Eigen::Vector4d(p.x, p.y, p.z, 1.0);
  if (depth != nullptr) {
    *depth = cam_h.z();
  }
  return cam.intrinsic * cam_h.head<3>();
}

inline PixelCoord dehomogenize(const Eigen::Vector3d & h, double depth)
{
  return {h.x() / h.z(), h.y() / h.z(), depth};
}

/// Projection that reports points at or behind the image plane as nullopt.
inline std::optional<PixelCoord> try_project(const Point3 & p, const CameraModel & cam)
{
  double depth = 0.0;
  const Eigen::Vector3d h = project_homogeneous(p, cam, &depth);
  if (!(depth > 0.0) || !(h.z() > 0.0)) {
    return std::nullopt;
  }
  return dehomogenize(h, depth);
}

inline PixelCoord project_point(const Point3 & p, const CameraModel & cam)
{
  auto px = try_project(p, cam);
  if (!px) {
    throw Error(Errc::kBehindCamera, "point has non-positive camera-frame depth");
  }
  return *px;
}

/// Projection that also requires the pixel to land inside the image.
inline std::optional<PixelCoord> project_visible(const Point3 & p, const CameraModel & cam)
{
  auto px = try_project(p, cam);
  if (px && cam.contains_pixel(px->u, px->v)) {
    return px;
  }
  return std::nullopt;
}

/// Inclusive integer pixel rectangle.
struct Rect
{
  int u_min{0};
  int v_min{0};
  int u_max{0};
  int v_max{0};

  int width() const { return u_max - u_min + 1; }
  int height() const { return v_max - v_min + 1; }
  bool contains(int u, int v) const
  {
    return u >= u_min && u <= u_max && v >= v_min && v <= v_max;
  }
  bool operator==(const Rect &) const = default;
};

inline int pixel_cell(double coord) { return static_cast<int>(std::floor(coord)); }

inline void extend_rect(Rect & r, int u, int v)
{
  r.u_min = std::min(r.u_min, u);
  r.v_min = std::min(r.v_min, v);
  r.u_max = std::max(r.u_max, u);
  r.v_max = std::max(r.v_max, v);
}

inline Rect bounding_rect(std::span<const PixelCoord> pixels)
{
  if (pixels.empty()) {
    throw Error(Errc::kEmptySet, "cannot bound an empty pixel set");
  }
  const int u0 = pixel_cell(pixels.front().u);
  const int v0 = pixel_cell(pixels.front().v);
  Rect r{u0, v0, u0, v0};
  for (const auto & px : pixels.subspan(1)) {
    extend_rect(r, pixel_cell(px.u), pixel_cell(px.v));
  }
  return r;
}

/// Clips to [0, width) x [0, height); nullopt when nothing remains.
inline std::optional<Rect> clip_rect(const Rect & r, int width, int height)
{
  Rect c{std::max(r.u_min, 0), std::max(r.v_min, 0), std::min(r.u_max, width - 1),
         std::min(r.v_max, height - 1)};
  if (c.u_min > c.u_max || c.v_min > c.v_max) {
    return std::nullopt;
  }
  return c;
}

struct InstanceTransform
{
  Eigen::Vector3d translation{Eigen::Vector3d::Zero()};
  double rot_z{0.0};
  double scale{1.0};
};

inline Point3 centroid(std::span<const Point3> points)
{
  Point3 c;
  if (points.empty()) {
    return c;
  }
  for (const auto & p : points) {
    c.x += p.x;
    c.y += p.y;
    c.z += p.z;
  }
  const double n = static_cast<double>(points.size());
  c.x /= n;
  c.y /= n;
  c.z /= n;
  return c;
}

/// Rotates about z and scales around the instance centroid, then translates.
/// Intensity is carried through unchanged.
inline std::vector<Point3> transform_instance(std::span<const Point3> points,
                                              const InstanceTransform & t)
{
  if (!(t.scale > 0.0)) {
    throw Error(Errc::kInvalidArgument, "instance scale must be positive");
  }
  std::vector<Point3> out;
  out.reserve(points.size());
  if (t.rot_z == 0.0 && t.scale == 1.0) {
    for (const auto & p : points) {
      out.push_back({p.x + t.translation.x(), p.y + t.translation.y(), p.z + t.translation.z(),
                     p.intensity});
    }
    return out;
  }
  const Point3 c = centroid(points);
  const double cs = std::cos(t.rot_z);
  const double sn = std::sin(t.rot_z);
  for (const auto & p : points) {
    const double dx = p.x - c.x;
    const double dy = p.y - c.y;
    const double dz = p.z - c.z;
    out.push_back({c.x + t.scale * (cs * dx - sn * dy) + t.translation.x(),
                   c.y + t.scale * (sn * dx + cs * dy) + t.translation.y(),
                   c.z + t.scale * dz + t.translation.z(), p.intensity});
  }
  return out;
}

}  // namespace panofuse

#endif  // PANOFUSE_GEOMETRY_HPP_
