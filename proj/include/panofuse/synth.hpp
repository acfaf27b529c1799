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

#ifndef PANOFUSE_SYNTH_HPP_
#define PANOFUSE_SYNTH_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "panofuse/error.hpp"
#include "panofuse/geometry.hpp"
#include "panofuse/image.hpp"
#include "panofuse/parallel.hpp"
#include "panofuse/pie_aug.hpp"
#include "panofuse/point_cloud.hpp"
#include "panofuse/query_gen.hpp"
#include "panofuse/rng.hpp"

namespace panofuse
{

enum class Archetype : std::uint8_t { kBox, kCylinder, kWall };

/// Placed object. Boxes and walls are oriented boxes with half extents
/// (length, width, height); cylinders use half.x as radius.
struct SceneObject
{
  Archetype kind{Archetype::kBox};
  std::uint16_t semantic{0};
  std::uint16_t instance{0};
  Eigen::Vector3d center{Eigen::Vector3d::Zero()};
  double yaw{0.0};
  Eigen::Vector3d half{Eigen::Vector3d::Ones()};

  Eigen::Vector3d to_local(const Eigen::Vector3d & p) const
  {
    const Eigen::Vector3d d = p - center;
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    return {c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z()};
  }

  Eigen::Vector3d to_world(const Eigen::Vector3d & l) const
  {
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    return center + Eigen::Vector3d(c * l.x() - s * l.y(), s * l.x() + c * l.y(), l.z());
  }

  bool contains(const Eigen::Vector3d & p, double margin) const
  {
    const Eigen::Vector3d l = to_local(p);
    if (std::abs(l.z()) > half.z() + margin) {
      return false;
    }
    if (kind == Archetype::kCylinder) {
      return std::hypot(l.x(), l.y()) <= half.x() + margin;
    }
    return std::abs(l.x()) <= half.x() + margin && std::abs(l.y()) <= half.y() + margin;
  }

  double footprint_radius() const
  {
    return kind == Archetype::kCylinder ? half.x() : std::hypot(half.x(), half.y());
  }
};

struct SizeRange
{
  Eigen::Vector3d lo;
  Eigen::Vector3d hi;
};

struct SceneConfig
{
  std::uint64_t rng_seed{0};
  std::uint8_t scan_id{1};
  int object_min{3};
  int object_max{8};
  bool use_box{true};
  bool use_cylinder{true};
  bool use_wall{true};
  // Full extents (length, width, height) in meters; cylinders read x as diameter.
  SizeRange box_size{{3.5, 1.6, 1.4}, {5.0, 2.0, 1.8}};
  SizeRange cylinder_size{{0.5, 0.5, 1.5}, {0.8, 0.8, 1.9}};
  SizeRange wall_size{{4.0, 0.2, 2.0}, {10.0, 0.4, 3.0}};
  std::size_t points_per_object{400};
  std::size_t ground_points{4000};
  double ground_radius{40.0};
  double ground_z{-1.8};
  double place_min{4.0};
  double place_max{30.0};
  int camera_count{6};
  int image_width{640};
  int image_height{360};
  double camera_hfov{70.0 * M_PI / 180.0};
  double camera_z{0.0};
  double splat_radius{0.06};  // meters
  double splat_max_px{16.0};
  bool provenance{true};      // false renders flat class colors
  std::uint16_t ground_class{11};
  std::uint16_t box_class{4};
  std::uint16_t cylinder_class{7};
  std::uint16_t wall_class{15};

  void validate() const
  {
    if (object_min < 0 || object_max < object_min) {
      throw Error(Errc::kBadConfig, "object count range must satisfy 0 <= min <= max");
    }
    if (object_max > 0 && !use_box && !use_cylinder && !use_wall) {
      throw Error(Errc::kBadConfig, "objects requested but no archetype enabled");
    }
    if (camera_count < 0 || image_width <= 0 || image_height <= 0 ||
        !(camera_hfov > 0.0 && camera_hfov < M_PI)) {
      throw Error(Errc::kBadConfig, "camera rig description is invalid");
    }
    if (!(ground_radius > 0.0) || !(place_min >= 0.0) || place_max < place_min ||
        !(splat_radius >= 0.0)) {
      throw Error(Errc::kBadConfig, "scene extents are invalid");
    }
    for (const auto * r : {&box_size, &cylinder_size, &wall_size}) {
      if (!(r->lo.array() > 0.0).all() || !(r->hi.array() >= r->lo.array()).all()) {
        throw Error(Errc::kBadConfig, "archetype size ranges must be positive and ordered");
      }
    }
  }
};

struct SynthSample
{
  MultiModalSample sample;
  std::vector<SceneObject> objects;
  std::vector<Mask2D> masks;  // per camera, per visible instance (ascending id)
  std::vector<std::vector<std::uint16_t>> instance_buffers;  // per camera, row-major
  std::vector<std::vector<double>> depth_buffers;            // inf where empty
  std::uint8_t scan_id{0};
};

/// Cameras at the LiDAR origin (raised by z), evenly spaced in yaw with the
/// first looking along +x. Camera axes: x right, y down, z forward.
inline std::vector<CameraModel> make_camera_rig(int count, int width, int height, double hfov,
                                                double z = 0.0)
{
  std::vector<CameraModel> cams;
  const double f = 0.5 * width / std::tan(0.5 * hfov);
  for (int k = 0; k < count; ++k) {
    const double yaw = kTwoPi * k / count;
    CameraModel cam;
    cam.width = width;
    cam.height = height;
    cam.intrinsic << f, 0.0, 0.5 * width, 0.0, f, 0.5 * height, 0.0, 0.0, 1.0;
    Eigen::Matrix3d r;
    r << std::sin(yaw), -std::cos(yaw), 0.0, 0.0, 0.0, -1.0, std::cos(yaw), std::sin(yaw), 0.0;
    cam.extrinsic = Eigen::Matrix4d::Identity();
    cam.extrinsic.topLeftCorner<3, 3>() = r;
    cam.extrinsic.topRightCorner<3, 1>() = -r * Eigen::Vector3d(0.0, 0.0, z);
    cams.push_back(cam);
  }
  return cams;
}

inline std::array<std::uint8_t, 3> class_color(std::uint16_t semantic)
{
  static constexpr std::array<std::array<std::uint8_t, 3>, 8> kBase{{{0, 0, 0},
                                                                     {255, 120, 50},
                                                                     {100, 150, 245},
                                                                     {80, 30, 180},
                                                                     {255, 0, 0},
                                                                     {30, 60, 150},
                                                                     {255, 200, 0},
                                                                     {255, 30, 30}}};
  if (semantic < kBase.size()) {
    return kBase[semantic];
  }
  // Knuth multiplicative hash spreads the remaining ids over the color cube.
  const std::uint32_t h = static_cast<std::uint32_t>(semantic) * 2654435761u;
  return {static_cast<std::uint8_t>(h >> 24), static_cast<std::uint8_t>(h >> 16),
          static_cast<std::uint8_t>(h >> 8)};
}

namespace detail
{
inline void sample_box_surface(const SceneObject & o, std::size_t n, Rng & rng,
                               std::vector<Eigen::Vector3d> & out)
{
  const Eigen::Vector3d e = 2.0 * o.half;
  // Top, +-x and +-y faces; the bottom rests on the ground and is not seen.
  const std::array<double, 5> area{e.x() * e.y(), e.y() * e.z(), e.y() * e.z(), e.x() * e.z(),
                                   e.x() * e.z()};
  double total = 0.0;
  for (double a : area) {
    total += a;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double pick = rng.uniform() * total;
    std::size_t face = 0;
    while (face + 1 < area.size() && pick >= area[face]) {
      pick -= area[face];
      ++face;
    }
    const double a = rng.uniform(-1.0, 1.0);
    const double b = rng.uniform(-1.0, 1.0);
    Eigen::Vector3d l;
    switch (face) {
      case 0: l = {a * o.half.x(), b * o.half.y(), o.half.z()}; break;
      case 1: l = {o.half.x(), a * o.half.y(), b * o.half.z()}; break;
      case 2: l = {-o.half.x(), a * o.half.y(), b * o.half.z()}; break;
      case 3: l = {a * o.half.x(), o.half.y(), b * o.half.z()}; break;
      default: l = {a * o.half.x(), -o.half.y(), b * o.half.z()}; break;
    }
    out.push_back(o.to_world(l));
  }
}

inline void sample_cylinder_surface(const SceneObject & o, std::size_t n, Rng & rng,
                                    std::vector<Eigen::Vector3d> & out)
{
  const double r = o.half.x();
  const double side = kTwoPi * r * 2.0 * o.half.z();
  const double top = M_PI * r * r;
  for (std::size_t i = 0; i < n; ++i) {
    const bool on_top = rng.uniform() * (side + top) >= side;
    const double phi = rng.uniform(0.0, kTwoPi);
    Eigen::Vector3d l;
    if (on_top) {
      const double rr = r * std::sqrt(rng.uniform());
      l = {rr * std::cos(phi), rr * std::sin(phi), o.half.z()};
    } else {
      l = {r * std::cos(phi), r * std::sin(phi), rng.uniform(-1.0, 1.0) * o.half.z()};
    }
    out.push_back(o.to_world(l));
  }
}

inline Eigen::Vector3d draw_size(const SizeRange & s, Rng & rng)
{
  return {rng.uniform(s.lo.x(), s.hi.x()), rng.uniform(s.lo.y(), s.hi.y()),
          rng.uniform(s.lo.z(), s.hi.z())};
}

// Camera-frame ray through the pixel centre, scaled to the given depth and
// mapped back to the LiDAR frame.
inline Eigen::Vector3d back_project(const CameraModel & cam, double u, double v, double depth)
{
  const Eigen::Vector3d ray = cam.intrinsic.inverse() * Eigen::Vector3d(u, v, 1.0);
  const Eigen::Vector3d pc = ray * (depth / ray.z());
  const Eigen::Matrix4d inv = cam.extrinsic.inverse();
  return (inv * pc.homogeneous()).head<3>();
}
}  // namespace detail

/// Pixel-centre back-projection used by the renderer's instance clipping.
inline Eigen::Vector3d back_project_pixel(const CameraModel & cam, int u, int v, double depth)
{
  return detail::back_project(cam, u + 0.5, v + 0.5, depth);
}

inline SynthSample generate_scene(const SceneConfig & cfg)
{
  cfg.validate();
  Rng rng(cfg.rng_seed);
  SynthSample out;
  out.scan_id = cfg.scan_id;
  PointCloud & cloud = out.sample.cloud;

  for (std::size_t i = 0; i < cfg.ground_points; ++i) {
    const double r = cfg.ground_radius * std::sqrt(rng.uniform());
    const double t = rng.uniform(0.0, kTwoPi);
    cloud.points.push_back(
      make_record({r * std::cos(t), r * std::sin(t), cfg.ground_z, 0.2}, cfg.ground_class, 0));
  }

  std::vector<Archetype> kinds;
  if (cfg.use_box) {
    kinds.push_back(Archetype::kBox);
  }
  if (cfg.use_cylinder) {
    kinds.push_back(Archetype::kCylinder);
  }
  if (cfg.use_wall) {
    kinds.push_back(Archetype::kWall);
  }
  const auto count = rng.uniform_int(cfg.object_min, cfg.object_max);
  std::uint16_t next_instance = 1;
  for (std::int64_t k = 0; k < count; ++k) {
    SceneObject o;
    o.kind = kinds[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(kinds.size()) - 1))];
    const auto & range = o.kind == Archetype::kBox        ? cfg.box_size
                         : o.kind == Archetype::kCylinder ? cfg.cylinder_size
                                                          : cfg.wall_size;
    o.half = 0.5 * detail::draw_size(range, rng);
    if (o.kind == Archetype::kCylinder) {
      o.half.y() = o.half.x();
    }
    o.yaw = rng.uniform(0.0, kTwoPi);
    // Rejection sampling on footprint circles; a fixed attempt budget keeps
    // the draw count bounded and the output deterministic.
    bool placed = false;
    for (int attempt = 0; attempt < 32 && !placed; ++attempt) {
      const double r = rng.uniform(cfg.place_min, cfg.place_max);
      const double t = rng.uniform(0.0, kTwoPi);
      o.center = {r * std::cos(t), r * std::sin(t), cfg.ground_z + o.half.z()};
      placed = std::all_of(out.objects.begin(), out.objects.end(), [&o](const SceneObject & p) {
        return (p.center - o.center).head<2>().norm() > p.footprint_radius() + o.footprint_radius();
      });
    }
    if (!placed) {
      continue;
    }
    std::vector<Eigen::Vector3d> pts;
    double intensity = 0.0;
    switch (o.kind) {
      case Archetype::kBox:
        o.semantic = cfg.box_class;
        o.instance = next_instance++;
        intensity = 0.8;
        detail::sample_box_surface(o, cfg.points_per_object, rng, pts);
        break;
      case Archetype::kCylinder:
        o.semantic = cfg.cylinder_class;
        o.instance = next_instance++;
        intensity = 0.5;
        detail::sample_cylinder_surface(o, cfg.points_per_object, rng, pts);
        break;
      case Archetype::kWall:
        o.semantic = cfg.wall_class;
        o.instance = 0;
        intensity = 0.3;
        detail::sample_box_surface(o, cfg.points_per_object, rng, pts);
        break;
    }
    for (const auto & p : pts) {
      cloud.points.push_back(make_record(make_point(p, intensity), o.semantic, o.instance));
    }
    out.objects.push_back(o);
  }

  out.sample.cameras = make_camera_rig(cfg.camera_count, cfg.image_width, cfg.image_height,
                                       cfg.camera_hfov, cfg.camera_z);
  const std::size_t ncam = out.sample.cameras.size();
  out.sample.images.assign(ncam, Image(cfg.image_width, cfg.image_height));
  out.instance_buffers.assign(ncam, {});
  out.depth_buffers.assign(ncam, {});
  std::vector<std::vector<Mask2D>> masks(ncam);

  // Instance object lookup for splat clipping.
  std::vector<const SceneObject *> by_instance(next_instance, nullptr);
  for (const auto & o : out.objects) {
    if (o.instance != 0) {
      by_instance[o.instance] = &o;
    }
  }

  parallel_for(ncam, [&](std::size_t c) {
    const auto & cam = out.sample.cameras[c];
    const int w = cam.width;
    const int h = cam.height;
    const std::size_t npix = static_cast<std::size_t>(w) * h;
    std::vector<double> depth(npix, std::numeric_limits<double>::infinity());
    std::vector<std::int64_t> owner(npix, -1);
    const double f = cam.intrinsic(0, 0);
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
      const auto & rec = cloud.points[i];
      double d = 0.0;
      const auto hom = project_homogeneous(rec.point(), cam, &d);
      if (!(d > 0.0)) {
        continue;
      }
      const auto px = dehomogenize(hom, d);
      const double rad = std::min(cfg.splat_max_px, f * cfg.splat_radius / d);
      if (!(px.u > -rad - 1.0 && px.u < w + rad + 1.0 && px.v > -rad - 1.0 &&
            px.v < h + rad + 1.0)) {
        continue;
      }
      const SceneObject * clip = rec.instance != 0 ? by_instance[rec.instance] : nullptr;
      const int cu = pixel_cell(px.u);
      const int cv = pixel_cell(px.v);
      const int u0 = std::max(0, std::min(cu, pixel_cell(px.u - rad)));
      const int u1 = std::min(w - 1, std::max(cu, pixel_cell(px.u + rad)));
      const int v0 = std::max(0, std::min(cv, pixel_cell(px.v - rad)));
      const int v1 = std::min(h - 1, std::max(cv, pixel_cell(px.v + rad)));
      for (int v = v0; v <= v1; ++v) {
        for (int u = u0; u <= u1; ++u) {
          const double du = u + 0.5 - px.u;
          const double dv = v + 0.5 - px.v;
          if (!(u == cu && v == cv) && du * du + dv * dv > rad * rad) {
            continue;
          }
          const std::size_t pix = static_cast<std::size_t>(v) * w + u;
          // Strict comparison: equal depths keep the lower point index.
          if (!(d < depth[pix])) {
            continue;
          }
          if (clip != nullptr && !clip->contains(back_project_pixel(cam, u, v, d), 0.01)) {
            continue;
          }
          depth[pix] = d;
          owner[pix] = static_cast<std::int64_t>(i);
        }
      }
    }

    Image & img = out.sample.images[c];
    auto & inst = out.instance_buffers[c];
    inst.assign(npix, 0);
    std::vector<std::size_t> pixel_count(by_instance.size(), 0);
    for (std::size_t pix = 0; pix < npix; ++pix) {
      std::array<std::uint8_t, 3> rgb{0, cfg.provenance ? cfg.scan_id : std::uint8_t{0}, 0};
      if (owner[pix] >= 0) {
        const auto & rec = cloud.points[static_cast<std::size_t>(owner[pix])];
        inst[pix] = rec.instance;
        ++pixel_count[rec.instance];
        rgb = cfg.provenance
                ? std::array<std::uint8_t, 3>{static_cast<std::uint8_t>(rec.semantic & 0xff),
                                              cfg.scan_id,
                                              static_cast<std::uint8_t>(rec.instance & 0xff)}
                : class_color(rec.semantic);
      }
      std::copy(rgb.begin(), rgb.end(), img.data.begin() + static_cast<std::ptrdiff_t>(3 * pix));
    }
    for (std::size_t id = 1; id < pixel_count.size(); ++id) {
      if (pixel_count[id] == 0) {
        continue;
      }
      Mask2D m(static_cast<std::uint32_t>(c), w, h);
      for (std::size_t pix = 0; pix < npix; ++pix) {
        m.bits[pix] = inst[pix] == id ? 1 : 0;
      }
      masks[c].push_back(std::move(m));
    }
    out.depth_buffers[c] = std::move(depth);
  });
  for (auto & m : masks) {
    std::move(m.begin(), m.end(), std::back_inserter(out.masks));
  }
  return out;
}

using Colormap = std::function<std::array<std::uint8_t, 3>(std::uint16_t)>;

/// Paints every point at the pixel containing its projection, in point order
/// (later points overwrite earlier ones). Points behind a camera or outside
/// its image are skipped.
inline std::vector<Image> render_overlay(const PointCloud & cloud, std::span<const Image> images,
                                         std::span<const CameraModel> cams,
                                         const Colormap & colormap = class_color)
{
  if (images.size() != cams.size()) {
    throw Error(Errc::kShapeMismatch, "image count must equal camera count");
  }
  std::vector<Image> out(images.begin(), images.end());
  for (std::size_t c = 0; c < cams.size(); ++c) {
    for (const auto & rec : cloud.points) {
      const auto px = project_visible(rec.point(), cams[c]);
      if (!px) {
        continue;
      }
      const auto rgb = colormap(rec.semantic);
      std::uint8_t * dst = out[c].at(pixel_cell(px->u), pixel_cell(px->v));
      std::copy(rgb.begin(), rgb.end(), dst);
    }
  }
  return out;
}

}  // namespace panofuse

#endif  // PANOFUSE_SYNTH_HPP_
