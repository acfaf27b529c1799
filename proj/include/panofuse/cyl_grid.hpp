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

#ifndef PANOFUSE_CYL_GRID_HPP_
#define PANOFUSE_CYL_GRID_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "panofuse/error.hpp"
#include "panofuse/geometry.hpp"
#include "panofuse/parallel.hpp"
#include "panofuse/point_cloud.hpp"

namespace panofuse
{

struct VoxelIndex
{
  int r{0};
  int theta{0};
  int z{0};

  auto operator<=>(const VoxelIndex &) const = default;
};

enum class Axis { kRadius, kAngle, kHeight };

/// Cylindrical partition: uniform bins in rho over [r_min, r_max], in theta
/// over [0, 2*pi), and in z over [z_min, z_max]. Each bin is half-open except
/// the last one along rho and z, which also includes its upper edge.
struct CylGridSpec
{
  int r_bins{480};
  int theta_bins{360};
  int z_bins{32};
  double r_min{0.0};
  double r_max{50.0};
  double z_min{-5.0};
  double z_max{3.0};

  static CylGridSpec nuscenes() { return {}; }
  static CylGridSpec semantic_kitti()
  {
    CylGridSpec s;
    s.z_min = -4.0;
    s.z_max = 2.0;
    return s;
  }

  bool operator==(const CylGridSpec &) const = default;

  void validate() const
  {
    if (r_bins < 1 || theta_bins < 1 || z_bins < 1) {
      throw Error(Errc::kBadConfig, "grid bin counts must be >= 1");
    }
    if (!(r_min >= 0.0) || !(r_min < r_max) || !(z_min < z_max)) {
      throw Error(Errc::kBadConfig, "grid ranges must satisfy 0 <= r_min < r_max, z_min < z_max");
    }
  }

  std::size_t voxel_count() const
  {
    return static_cast<std::size_t>(r_bins) * theta_bins * z_bins;
  }

  int bins(Axis a) const
  {
    switch (a) {
      case Axis::kRadius: return r_bins;
      case Axis::kAngle: return theta_bins;
      case Axis::kHeight: return z_bins;
    }
    return 0;
  }

  double r_edge(int k) const { return edge(r_min, r_max, r_bins, k); }
  double theta_edge(int k) const { return edge(0.0, kTwoPi, theta_bins, k); }
  double z_edge(int k) const { return edge(z_min, z_max, z_bins, k); }

  std::optional<int> r_bin(double rho) const { return bin_of(rho, r_min, r_max, r_bins, true); }
  std::optional<int> theta_bin(double theta) const
  {
    return bin_of(theta, 0.0, kTwoPi, theta_bins, false);
  }
  std::optional<int> z_bin(double z) const { return bin_of(z, z_min, z_max, z_bins, true); }

  std::optional<VoxelIndex> locate(const PolarCoord & q) const
  {
    auto r = r_bin(q.rho);
    auto t = theta_bin(q.theta);
    auto z = z_bin(q.z);
    if (!r || !t || !z) {
      return std::nullopt;
    }
    return VoxelIndex{*r, *t, *z};
  }

  std::optional<VoxelIndex> locate(const Point3 & p) const { return locate(cart_to_polar(p)); }

  bool contains(const VoxelIndex & v) const
  {
    return v.r >= 0 && v.r < r_bins && v.theta >= 0 && v.theta < theta_bins && v.z >= 0 &&
           v.z < z_bins;
  }

  void check(const VoxelIndex & v) const
  {
    if (!contains(v)) {
      throw Error(Errc::kIndexOutOfRange, "voxel index outside the grid");
    }
  }

  // Lexicographic (r, theta, z) order is preserved by the linear index.
  std::uint32_t linear(const VoxelIndex & v) const
  {
    return static_cast<std::uint32_t>((static_cast<std::size_t>(v.r) * theta_bins + v.theta) *
                                        z_bins + v.z);
  }

  VoxelIndex unlinear(std::uint32_t i) const
  {
    VoxelIndex v;
    v.z = static_cast<int>(i % z_bins);
    i /= z_bins;
    v.theta = static_cast<int>(i % theta_bins);
    v.r = static_cast<int>(i / theta_bins);
    return v;
  }

  static double edge(double lo, double hi, int bins, int k)
  {
    if (k >= bins) {
      return hi;
    }
    return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(bins);
  }

  // The bin is corrected against edge() so that membership agrees exactly
  // with comparisons against the values edge() returns.
  static std::optional<int> bin_of(double val, double lo, double hi, int bins, bool close_last)
  {
    if (!(val >= lo) || val > hi || (!close_last && val >= hi)) {
      return std::nullopt;
    }
    int k = static_cast<int>(std::floor((val - lo) / (hi - lo) * bins));
    k = std::clamp(k, 0, bins - 1);
    while (k > 0 && val < edge(lo, hi, bins, k)) {
      --k;
    }
    while (k < bins - 1 && val >= edge(lo, hi, bins, k + 1)) {
      ++k;
    }
    return k;
  }
};

inline constexpr std::uint8_t kSourceOrg = 0;
inline constexpr std::uint8_t kSourceNew = 1;
inline constexpr std::uint8_t kSourceMixed = 255;

struct CameraRect
{
  std::uint32_t camera{0};
  Rect rect;
  bool operator==(const CameraRect &) const = default;
};

struct Voxel
{
  VoxelIndex index;
  std::vector<std::uint32_t> points;  // ascending indices into CylGrid::cloud
  std::uint8_t source{kSourceOrg};
  std::vector<CameraRect> pairings;   // ascending camera id

  const Rect * pairing(std::uint32_t camera) const
  {
    for (const auto & p : pairings) {
      if (p.camera == camera) {
        return &p.rect;
      }
    }
    return nullptr;
  }
};

/// Voxelized scan. The grid owns its cloud; voxels are sorted by index and
/// every in-range point index appears in exactly one voxel.
struct CylGrid
{
  CylGridSpec spec;
  PointCloud cloud;
  std::vector<std::uint8_t> point_source;
  std::vector<Voxel> voxels;
  std::vector<std::uint32_t> dropped;

  std::size_t occupied() const { return voxels.size(); }

  const Voxel * find(const VoxelIndex & idx) const
  {
    auto it = std::lower_bound(voxels.begin(), voxels.end(), idx,
                               [](const Voxel & v, const VoxelIndex & i) { return v.index < i; });
    if (it == voxels.end() || it->index != idx) {
      return nullptr;
    }
    return &*it;
  }

  std::vector<Point3> voxel_points(const Voxel & v) const
  {
    std::vector<Point3> out;
    out.reserve(v.points.size());
    for (auto i : v.points) {
      out.push_back(cloud.points[i].point());
    }
    return out;
  }
};

namespace detail
{
inline std::vector<Voxel> group_points(const CylGridSpec & spec, const PointCloud & cloud,
                                       const std::vector<std::uint8_t> & point_source,
                                       std::vector<std::uint32_t> & dropped)
{
  std::vector<std::pair<std::uint32_t, std::uint32_t>> keyed;
  keyed.reserve(cloud.size());
  dropped.clear();
  for (std::uint32_t i = 0; i < cloud.size(); ++i) {
    auto idx = spec.locate(cloud.points[i].point());
    if (idx) {
      keyed.emplace_back(spec.linear(*idx), i);
    } else {
      dropped.push_back(i);
    }
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<Voxel> voxels;
  for (std::size_t i = 0; i < keyed.size();) {
    Voxel v;
    v.index = spec.unlinear(keyed[i].first);
    std::size_t j = i;
    for (; j < keyed.size() && keyed[j].first == keyed[i].first; ++j) {
      v.points.push_back(keyed[j].second);
    }
    v.source = point_source[v.points.front()];
    for (auto p : v.points) {
      if (point_source[p] != v.source) {
        v.source = kSourceMixed;
        break;
      }
    }
    voxels.push_back(std::move(v));
    i = j;
  }
  return voxels;
}
}  // namespace detail

/// Assigns every in-range point to its voxel; points outside the radial or
/// vertical range are listed in `dropped`.
inline CylGrid voxelize(const PointCloud & cloud, const CylGridSpec & spec,
                        std::uint8_t source = kSourceOrg)
{
  spec.validate();
  CylGrid grid;
  grid.spec = spec;
  grid.cloud = cloud;
  grid.point_source.assign(cloud.size(), source);
  grid.voxels = detail::group_points(spec, grid.cloud, grid.point_source, grid.dropped);
  return grid;
}

/// Re-voxelizes a cloud whose points carry individual source tags. Voxels
/// holding points of different origin are tagged kSourceMixed.
inline CylGrid voxelize_tagged(PointCloud cloud, std::vector<std::uint8_t> point_source,
                               const CylGridSpec & spec)
{
  spec.validate();
  if (point_source.size() != cloud.size()) {
    throw Error(Errc::kLengthMismatch, "source tags must match the cloud size");
  }
  CylGrid grid;
  grid.spec = spec;
  grid.cloud = std::move(cloud);
  grid.point_source = std::move(point_source);
  grid.voxels = detail::group_points(spec, grid.cloud, grid.point_source, grid.dropped);
  return grid;
}

/// Eight Cartesian corners; rho edge varies fastest, then theta, then z.
using ExtremePointSet = std::array<Point3, 8>;

inline ExtremePointSet voxel_extreme_points(const VoxelIndex & idx, const CylGridSpec & spec)
{
  spec.check(idx);
  const double rs[2] = {spec.r_edge(idx.r), spec.r_edge(idx.r + 1)};
  const double ts[2] = {spec.theta_edge(idx.theta), spec.theta_edge(idx.theta + 1)};
  const double zs[2] = {spec.z_edge(idx.z), spec.z_edge(idx.z + 1)};
  ExtremePointSet out;
  std::size_t k = 0;
  for (double z : zs) {
    for (double t : ts) {
      for (double r : rs) {
        out[k++] = polar_to_cart({r, t, z});
      }
    }
  }
  return out;
}

inline Point3 corner_mean(const ExtremePointSet & corners)
{
  return centroid(std::span<const Point3>(corners.data(), corners.size()));
}

inline Point3 voxel_centroid(const VoxelIndex & idx, const CylGridSpec & spec)
{
  return corner_mean(voxel_extreme_points(idx, spec));
}

/// Physical volume of a voxel: (dtheta / 2) * (r1^2 - r0^2) * dz.
inline double voxel_volume(const VoxelIndex & idx, const CylGridSpec & spec)
{
  spec.check(idx);
  const double r0 = spec.r_edge(idx.r);
  const double r1 = spec.r_edge(idx.r + 1);
  const double dt = spec.theta_edge(idx.theta + 1) - spec.theta_edge(idx.theta);
  const double dz = spec.z_edge(idx.z + 1) - spec.z_edge(idx.z);
  return 0.5 * dt * (r1 * r1 - r0 * r0) * dz;
}

/// Bounding rectangle of the voxel's physical points that project in front of
/// the camera and inside its image.
inline std::optional<Rect> voxel_image_rect(std::span<const Point3> points,
                                            const CameraModel & cam)
{
  std::optional<Rect> rect;
  for (const auto & p : points) {
    auto px = project_visible(p, cam);
    if (!px) {
      continue;
    }
    const int u = pixel_cell(px->u);
    const int v = pixel_cell(px->v);
    if (!rect) {
      rect = Rect{u, v, u, v};
    } else {
      extend_rect(*rect, u, v);
    }
  }
  return rect;
}

/// Recomputes every voxel's per-camera image pairing from its member points.
inline void pair_voxel_image_inplace(CylGrid & grid, std::span<const CameraModel> cams)
{
  parallel_for(grid.voxels.size(), [&](std::size_t i) {
    Voxel & v = grid.voxels[i];
    v.pairings.clear();
    const auto pts = grid.voxel_points(v);
    for (std::uint32_t c = 0; c < cams.size(); ++c) {
      if (auto r = voxel_image_rect(pts, cams[c])) {
        v.pairings.push_back({c, *r});
      }
    }
  });
}

inline CylGrid pair_voxel_image(CylGrid grid, std::span<const CameraModel> cams)
{
  pair_voxel_image_inplace(grid, cams);
  return grid;
}

/// Pairing from the projected voxel centroid alone. Kept for comparison
/// against the physical-point pairing; it misses voxels whose centroid falls
/// outside the image even when member points are visible.
inline CylGrid pair_voxel_image_by_centroid(CylGrid grid, std::span<const CameraModel> cams)
{
  for (auto & v : grid.voxels) {
    v.pairings.clear();
    const Point3 c = voxel_centroid(v.index, grid.spec);
    for (std::uint32_t k = 0; k < cams.size(); ++k) {
      if (auto px = project_visible(c, cams[k])) {
        const int u = pixel_cell(px->u);
        const int vv = pixel_cell(px->v);
        v.pairings.push_back({k, Rect{u, vv, u, vv}});
      }
    }
  }
  return grid;
}

}  // namespace panofuse

#endif  // PANOFUSE_CYL_GRID_HPP_
