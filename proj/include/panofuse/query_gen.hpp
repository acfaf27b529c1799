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

#ifndef PANOFUSE_QUERY_GEN_HPP_
#define PANOFUSE_QUERY_GEN_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <unordered_map>
#include <vector>

#include "panofuse/cyl_grid.hpp"
#include "panofuse/error.hpp"
#include "panofuse/geometry.hpp"
#include "panofuse/rng.hpp"
#include "panofuse/token_fusion.hpp"

namespace panofuse
{

/// Class-agnostic centre heatmap over the polar BEV plane (R x Theta).
struct BevHeatmap
{
  int r_bins{0};
  int theta_bins{0};
  std::vector<double> values;  // r-major

  BevHeatmap() = default;
  BevHeatmap(int r, int t) : r_bins(r), theta_bins(t), values(static_cast<std::size_t>(r) * t, 0.0)
  {
  }

  double & at(int r, int t) { return values[static_cast<std::size_t>(r) * theta_bins + t]; }
  double at(int r, int t) const { return values[static_cast<std::size_t>(r) * theta_bins + t]; }
};

enum class HeatmapMode { kGtGaussian, kDensity };

/// gt_gaussian splats a Gaussian (std `sigma` bins, angular wraparound) at the
/// bin of every ground-truth instance centre and keeps the per-cell maximum;
/// sigma <= 0 gives a unit delta. density is per-column point count divided by
/// the largest column count.
inline BevHeatmap build_bev_heatmap(const CylGrid & grid, HeatmapMode mode, double sigma)
{
  const auto & spec = grid.spec;
  BevHeatmap h(spec.r_bins, spec.theta_bins);
  if (mode == HeatmapMode::kDensity) {
    double peak = 0.0;
    for (const auto & v : grid.voxels) {
      double & c = h.at(v.index.r, v.index.theta);
      c += static_cast<double>(v.points.size());
      peak = std::max(peak, c);
    }
    if (peak > 0.0) {
      for (auto & c : h.values) {
        c /= peak;
      }
    }
    return h;
  }
  if (!grid.cloud.has_labels) {
    throw Error(Errc::kMissingLabels, "gt_gaussian heatmap needs instance labels");
  }
  std::map<std::uint16_t, std::array<double, 4>> sums;
  for (const auto & v : grid.voxels) {
    for (auto p : v.points) {
      const auto & r = grid.cloud.points[p];
      if (r.instance == 0) {
        continue;
      }
      auto & s = sums[r.instance];
      s[0] += r.x;
      s[1] += r.y;
      s[2] += r.z;
      s[3] += 1.0;
    }
  }
  for (const auto & [id, s] : sums) {
    const Point3 c{s[0] / s[3], s[1] / s[3], s[2] / s[3], 0.0};
    const PolarCoord q = cart_to_polar(c);
    auto rb = spec.r_bin(q.rho);
    auto tb = spec.theta_bin(q.theta);
    if (!rb || !tb) {
      continue;
    }
    if (!(sigma > 0.0)) {
      h.at(*rb, *tb) = 1.0;
      continue;
    }
    const int reach = static_cast<int>(std::ceil(4.0 * sigma));
    for (int dr = -reach; dr <= reach; ++dr) {
      const int r = *rb + dr;
      if (r < 0 || r >= spec.r_bins) {
        continue;
      }
      const int span = std::min(reach, spec.theta_bins / 2);
      for (int dt = -span; dt <= span; ++dt) {
        const int t = ((*tb + dt) % spec.theta_bins + spec.theta_bins) % spec.theta_bins;
        const double g = std::exp(-(dr * dr + dt * dt) / (2.0 * sigma * sigma));
        double & cell = h.at(r, t);
        cell = std::max(cell, g);
      }
    }
  }
  return h;
}

struct BevPeak
{
  int r{0};
  int theta{0};
  double confidence{0.0};
  bool operator==(const BevPeak &) const = default;
};

enum class RadiusUnit { kBins, kMeters };

struct NmsOptions
{
  double conf_thresh{0.1};
  double radius{4.0};
  std::size_t max_peaks{128};
  RadiusUnit unit{RadiusUnit::kBins};
};

/// Euclidean distance in (r, theta) bin units with angular wraparound.
inline double bev_bin_distance(int r0, int t0, int r1, int t1, int theta_bins)
{
  const int dr = r0 - r1;
  int dt = std::abs(t0 - t1);
  dt = std::min(dt, theta_bins - dt);
  return std::sqrt(static_cast<double>(dr * dr + dt * dt));
}

/// Distance in meters between the BEV cell centres.
inline double bev_metric_distance(int r0, int t0, int r1, int t1, const CylGridSpec & spec)
{
  auto centre = [&](int r, int t) {
    const double rho = 0.5 * (spec.r_edge(r) + spec.r_edge(r + 1));
    const double th = 0.5 * (spec.theta_edge(t) + spec.theta_edge(t + 1));
    return polar_to_cart({rho, th, 0.0});
  };
  return distance(centre(r0, t0), centre(r1, t1));
}

/// Greedy peak picking: cells at or above the threshold are visited by
/// descending confidence (ties by ascending (r, theta)); a cell is kept when
/// it lies farther than `radius` from every kept cell.
inline std::vector<BevPeak> nms_peaks(const BevHeatmap & h, const NmsOptions & opt,
                                      const CylGridSpec * spec = nullptr)
{
  if (opt.radius < 0.0) {
    throw Error(Errc::kInvalidArgument, "NMS radius must be non-negative");
  }
  if (opt.unit == RadiusUnit::kMeters && spec == nullptr) {
    throw Error(Errc::kInvalidArgument, "metric NMS radius needs the grid spec");
  }
  std::vector<BevPeak> cand;
  for (int r = 0; r < h.r_bins; ++r) {
    for (int t = 0; t < h.theta_bins; ++t) {
      if (h.at(r, t) >= opt.conf_thresh) {
        cand.push_back({r, t, h.at(r, t)});
      }
    }
  }
  std::stable_sort(cand.begin(), cand.end(),
                   [](const BevPeak & a, const BevPeak & b) { return a.confidence > b.confidence; });
  std::vector<BevPeak> kept;
  for (const auto & c : cand) {
    if (kept.size() >= opt.max_peaks) {
      break;
    }
    bool far = true;
    for (const auto & k : kept) {
      const double d = opt.unit == RadiusUnit::kBins
                         ? bev_bin_distance(c.r, c.theta, k.r, k.theta, h.theta_bins)
                         : bev_metric_distance(c.r, c.theta, k.r, k.theta, *spec);
      if (d <= opt.radius) {
        far = false;
        break;
      }
    }
    if (far) {
      kept.push_back(c);
    }
  }
  return kept;
}

enum class HintOrigin : std::uint8_t { kGeometric = 0, kTexture = 1 };

struct LocationHint
{
  Point3 position;
  double confidence{0.0};
  HintOrigin origin{HintOrigin::kGeometric};
};

/// Mean centroid of the occupied voxels in the peak's (r, theta) column.
inline LocationHint lift_peak_to_3d(const BevPeak & peak, const CylGrid & grid)
{
  const auto & spec = grid.spec;
  if (peak.r < 0 || peak.r >= spec.r_bins || peak.theta < 0 || peak.theta >= spec.theta_bins) {
    throw Error(Errc::kIndexOutOfRange, "peak outside the BEV grid");
  }
  auto first = std::lower_bound(
    grid.voxels.begin(), grid.voxels.end(), VoxelIndex{peak.r, peak.theta, 0},
    [](const Voxel & v, const VoxelIndex & i) { return v.index < i; });
  Point3 sum;
  int n = 0;
  for (auto it = first;
       it != grid.voxels.end() && it->index.r == peak.r && it->index.theta == peak.theta; ++it) {
    const Point3 c = voxel_centroid(it->index, spec);
    sum.x += c.x;
    sum.y += c.y;
    sum.z += c.z;
    ++n;
  }
  if (n == 0) {
    throw Error(Errc::kEmptyColumn, "no occupied voxel under the peak");
  }
  return {{sum.x / n, sum.y / n, sum.z / n, 0.0}, peak.confidence, HintOrigin::kGeometric};
}

/// Peaks lifted to 3D; peaks over empty columns are skipped.
inline std::vector<LocationHint> geometric_hints(const CylGrid & grid, const BevHeatmap & h,
                                                 const NmsOptions & opt)
{
  std::vector<LocationHint> hints;
  for (const auto & p : nms_peaks(h, opt, &grid.spec)) {
    try {
      hints.push_back(lift_peak_to_3d(p, grid));
    } catch (const Error & e) {
      if (e.code() != Errc::kEmptyColumn) {
        throw;
      }
    }
  }
  return hints;
}

/// Binary per-camera image mask, row-major.
struct Mask2D
{
  std::uint32_t camera{0};
  int width{0};
  int height{0};
  std::vector<std::uint8_t> bits;

  Mask2D() = default;
  Mask2D(std::uint32_t cam, int w, int h)
  : camera(cam), width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0)
  {
  }

  bool at(int u, int v) const { return bits[static_cast<std::size_t>(v) * width + u] != 0; }
  void set(int u, int v, bool value = true)
  {
    bits[static_cast<std::size_t>(v) * width + u] = value ? 1 : 0;
  }
  std::size_t popcount() const
  {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
  }
  bool operator==(const Mask2D &) const = default;
};

/// Indices of points in front of the camera whose pixel cell is set.
inline std::vector<std::uint32_t> frustum_points(const Mask2D & mask, const PointCloud & cloud,
                                                 const CameraModel & cam)
{
  if (mask.width != cam.width || mask.height != cam.height) {
    throw Error(Errc::kShapeMismatch, "mask size differs from the camera image");
  }
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < cloud.size(); ++i) {
    auto px = project_visible(cloud.points[i].point(), cam);
    if (px && mask.at(pixel_cell(px->u), pixel_cell(px->v))) {
      out.push_back(i);
    }
  }
  return out;
}

inline constexpr int kNoise = -1;

namespace detail
{
// Uniform hash grid with cell size eps; neighbour lists come back sorted.
class NeighborGrid
{
public:
  NeighborGrid(std::span<const Point3> pts, double eps) : pts_(pts), eps_(eps)
  {
    for (std::uint32_t i = 0; i < pts.size(); ++i) {
      cells_[key(cell(pts[i].x), cell(pts[i].y), cell(pts[i].z))].push_back(i);
    }
  }

  std::vector<std::uint32_t> query(std::uint32_t i) const
  {
    std::vector<std::uint32_t> out;
    const auto & p = pts_[i];
    const auto cx = cell(p.x);
    const auto cy = cell(p.y);
    const auto cz = cell(p.z);
    const double eps2 = eps_ * eps_;
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = cells_.find(key(cx + dx, cy + dy, cz + dz));
          if (it == cells_.end()) {
            continue;
          }
          for (auto j : it->second) {
            const double ddx = pts_[j].x - p.x;
            const double ddy = pts_[j].y - p.y;
            const double ddz = pts_[j].z - p.z;
            if (ddx * ddx + ddy * ddy + ddz * ddz <= eps2) {
              out.push_back(j);
            }
          }
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

private:
  std::int64_t cell(double v) const { return static_cast<std::int64_t>(std::floor(v / eps_)); }
  static std::uint64_t key(std::int64_t x, std::int64_t y, std::int64_t z)
  {
    const auto h = static_cast<std::uint64_t>(x) * 0x9E3779B97F4A7C15ULL ^
                   static_cast<std::uint64_t>(y) * 0xC2B2AE3D27D4EB4FULL ^
                   static_cast<std::uint64_t>(z) * 0x165667B19E3779F9ULL;
    return h;
  }

  std::span<const Point3> pts_;
  double eps_;
  // Collisions only add candidates; the distance test filters them.
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
};
}  // namespace detail

/// DBSCAN over 3D Euclidean distance (neighbourhoods include the point and
/// use distance <= eps). Seeds are expanded in index order; returns cluster
/// ids 0..C-1 or kNoise.
inline std::vector<int> dbscan(std::span<const Point3> pts, double eps, std::size_t min_pts)
{
  if (!(eps > 0.0) || min_pts < 1) {
    throw Error(Errc::kInvalidArgument, "dbscan needs eps > 0 and min_pts >= 1");
  }
  constexpr int kUnvisited = -2;
  std::vector<int> label(pts.size(), kUnvisited);
  const detail::NeighborGrid index(pts, eps);
  int cluster = 0;
  for (std::uint32_t i = 0; i < pts.size(); ++i) {
    if (label[i] != kUnvisited) {
      continue;
    }
    auto seeds = index.query(i);
    if (seeds.size() < min_pts) {
      label[i] = kNoise;
      continue;
    }
    label[i] = cluster;
    std::deque<std::uint32_t> queue(seeds.begin(), seeds.end());
    while (!queue.empty()) {
      const auto q = queue.front();
      queue.pop_front();
      if (label[q] == kNoise) {
        label[q] = cluster;
      }
      if (label[q] != kUnvisited) {
        continue;
      }
      label[q] = cluster;
      auto more = index.query(q);
      if (more.size() >= min_pts) {
        queue.insert(queue.end(), more.begin(), more.end());
      }
    }
    ++cluster;
  }
  return label;
}

enum class FpsStart { kMaxConfidence, kFirstIndex };

/// Farthest point sampling. Starts at the most confident point (lowest index
/// on ties, index 0 without confidences) and then repeatedly takes the point
/// with the largest distance to the selected set, lowest index on ties.
/// Returns indices in pick order; all points when k >= n.
inline std::vector<std::size_t> fps(std::span<const Point3> pts, std::size_t k,
                                    std::span<const double> confidences = {},
                                    FpsStart start = FpsStart::kMaxConfidence)
{
  if (k < 1) {
    throw Error(Errc::kInvalidArgument, "fps needs k >= 1");
  }
  if (!confidences.empty() && confidences.size() != pts.size()) {
    throw Error(Errc::kLengthMismatch, "one confidence per point is required");
  }
  const std::size_t n = pts.size();
  std::vector<std::size_t> picked;
  if (n == 0) {
    return picked;
  }
  k = std::min(k, n);
  std::size_t first = 0;
  if (start == FpsStart::kMaxConfidence && !confidences.empty()) {
    first = static_cast<std::size_t>(
      std::max_element(confidences.begin(), confidences.end()) - confidences.begin());
  }
  std::vector<double> gap(n, std::numeric_limits<double>::infinity());
  std::size_t cur = first;
  for (;;) {
    picked.push_back(cur);
    gap[cur] = -1.0;
    if (picked.size() == k) {
      break;
    }
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (gap[i] < 0.0) {
        continue;
      }
      gap[i] = std::min(gap[i], distance(pts[i], pts[cur]));
      if (best == n || gap[i] > gap[best]) {
        best = i;
      }
    }
    cur = best;
  }
  return picked;
}

/// Lifts each mask into its camera frustum, clusters the captured points and
/// returns one hint per cluster centroid. Confidence is the cluster's share
/// of the frustum points.
inline std::vector<LocationHint> texture_hints(std::span<const Mask2D> masks,
                                               const PointCloud & cloud,
                                               std::span<const CameraModel> cams, double eps,
                                               std::size_t min_pts)
{
  std::vector<LocationHint> hints;
  for (const auto & m : masks) {
    if (m.camera >= cams.size()) {
      throw Error(Errc::kIndexOutOfRange, "mask refers to a missing camera");
    }
    const auto idx = frustum_points(m, cloud, cams[m.camera]);
    if (idx.empty()) {
      continue;
    }
    std::vector<Point3> pts;
    pts.reserve(idx.size());
    for (auto i : idx) {
      pts.push_back(cloud.points[i].point());
    }
    const auto label = dbscan(pts, eps, min_pts);
    const int clusters = label.empty() ? 0 : *std::max_element(label.begin(), label.end()) + 1;
    std::vector<std::array<double, 4>> sums(static_cast<std::size_t>(std::max(clusters, 0)));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (label[i] == kNoise) {
        continue;
      }
      auto & s = sums[static_cast<std::size_t>(label[i])];
      s[0] += pts[i].x;
      s[1] += pts[i].y;
      s[2] += pts[i].z;
      s[3] += 1.0;
    }
    for (const auto & s : sums) {
      hints.push_back({{s[0] / s[3], s[1] / s[3], s[2] / s[3], 0.0},
                       s[3] / static_cast<double>(pts.size()), HintOrigin::kTexture});
    }
  }
  return hints;
}

struct PriorQuery
{
  LocationHint hint;
  VoxelIndex voxel;
  Embedding content;  // token content of the indexed voxel; already carries the SPE in both halves
  Embedding spe;      // that voxel's SPE, D
};

struct QuerySet
{
  std::size_t dim{0};
  std::vector<PriorQuery> prior;
  std::vector<Embedding> no_prior;
  std::vector<Embedding> semantic;
};

inline std::vector<Embedding> placeholder_vectors(std::size_t count, std::size_t dim,
                                                  std::uint64_t seed)
{
  Rng rng(seed);
  std::vector<Embedding> out(count, Embedding(dim));
  for (auto & v : out) {
    for (auto & x : v) {
      x = 0.02 * rng.normal();
    }
  }
  return out;
}

/// Merges hints, reduces them to at most l_pr by FPS, and indexes each
/// survivor into the fused token of the voxel containing it (or the occupied
/// voxel with the nearest centroid). No-prior and semantic queries are
/// deterministic placeholders derived from the SPE seed.
inline QuerySet assemble_queries(std::span<const LocationHint> geo,
                                 std::span<const LocationHint> tex, const CylGrid & grid,
                                 std::span<const FusedToken> tokens, const SpeParams & params,
                                 std::size_t l_pr, std::size_t l_lt, std::size_t num_classes)
{
  QuerySet qs;
  qs.dim = params.dim;
  qs.no_prior = placeholder_vectors(l_lt, params.dim, params.seed ^ 0x9e37'0001ULL);
  qs.semantic = placeholder_vectors(num_classes, params.dim, params.seed ^ 0x9e37'0002ULL);

  std::vector<LocationHint> merged(geo.begin(), geo.end());
  merged.insert(merged.end(), tex.begin(), tex.end());
  if (merged.empty() || l_pr == 0) {
    return qs;
  }
  if (tokens.empty()) {
    throw Error(Errc::kEmptySet, "hints given but no tokens to index");
  }
  std::vector<std::size_t> keep(merged.size());
  std::iota(keep.begin(), keep.end(), 0);
  if (merged.size() > l_pr) {
    std::vector<Point3> pos;
    std::vector<double> conf;
    for (const auto & h : merged) {
      pos.push_back(h.position);
      conf.push_back(h.confidence);
    }
    keep = fps(pos, l_pr, conf);
  }

  std::vector<Point3> centres;
  centres.reserve(tokens.size());
  for (const auto & t : tokens) {
    centres.push_back(voxel_centroid(t.voxel, grid.spec));
  }
  auto token_at = [&](const VoxelIndex & idx) -> const FusedToken * {
    auto it = std::lower_bound(tokens.begin(), tokens.end(), idx,
                               [](const FusedToken & t, const VoxelIndex & i) { return t.voxel < i; });
    return (it != tokens.end() && it->voxel == idx) ? &*it : nullptr;
  };
  for (auto k : keep) {
    const auto & h = merged[k];
    const FusedToken * tok = nullptr;
    if (auto idx = grid.spec.locate(h.position)) {
      tok = token_at(*idx);
    }
    if (tok == nullptr) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < centres.size(); ++i) {
        const double d = distance(centres[i], h.position);
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      tok = &tokens[best];
    }
    qs.prior.push_back({h, tok->voxel, tok->content, tok->spe});
  }
  return qs;
}

}  // namespace panofuse

#endif  // PANOFUSE_QUERY_GEN_HPP_
