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

#ifndef PANOFUSE_TOKEN_FUSION_HPP_
#define PANOFUSE_TOKEN_FUSION_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "panofuse/cyl_grid.hpp"
#include "panofuse/error.hpp"
#include "panofuse/geometry.hpp"
#include "panofuse/image.hpp"
#include "panofuse/parallel.hpp"
#include "panofuse/rng.hpp"

namespace panofuse
{

using Embedding = std::vector<double>;

/// Dense H' x W' x D image feature grid for one camera. A pixel (u, v) falls
/// into cell (floor(v * scale), floor(u * scale)).
struct FeatureMap
{
  int height{0};
  int width{0};
  int dim{0};
  double scale{1.0};
  std::vector<float> data;  // row-major, D innermost

  FeatureMap() = default;
  FeatureMap(int h, int w, int d, double s)
  : height(h), width(w), dim(d), scale(s), data(static_cast<std::size_t>(h) * w * d, 0.f)
  {
    if (d <= 0 || !(s > 0.0)) {
      throw Error(Errc::kShapeMismatch, "feature map needs D > 0 and a positive scale");
    }
  }

  const float * cell(int row, int col) const
  {
    return data.data() + (static_cast<std::size_t>(row) * width + col) * dim;
  }
  float * cell(int row, int col)
  {
    return data.data() + (static_cast<std::size_t>(row) * width + col) * dim;
  }
  bool operator==(const FeatureMap &) const = default;
};

enum class Sampling { kNearest, kBilinear };

namespace detail
{
// Adds the sampled feature at pixel (u, v) to `sum`; false if off the map.
inline bool sample_feature(const FeatureMap & f, double u, double v, Sampling mode,
                           std::span<double> sum)
{
  const double fu = u * f.scale;
  const double fv = v * f.scale;
  if (mode == Sampling::kNearest) {
    const int col = static_cast<int>(std::floor(fu));
    const int row = static_cast<int>(std::floor(fv));
    if (col < 0 || row < 0 || col >= f.width || row >= f.height) {
      return false;
    }
    const float * c = f.cell(row, col);
    for (int d = 0; d < f.dim; ++d) {
      sum[d] += c[d];
    }
    return true;
  }
  // Bilinear over cell centres, clamped at the border.
  if (fu < 0.0 || fv < 0.0 || fu >= f.width || fv >= f.height) {
    return false;
  }
  const double x = std::clamp(fu - 0.5, 0.0, static_cast<double>(f.width - 1));
  const double y = std::clamp(fv - 0.5, 0.0, static_cast<double>(f.height - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, f.width - 1);
  const int y1 = std::min(y0 + 1, f.height - 1);
  const double ax = x - x0;
  const double ay = y - y0;
  const float * c00 = f.cell(y0, x0);
  const float * c01 = f.cell(y0, x1);
  const float * c10 = f.cell(y1, x0);
  const float * c11 = f.cell(y1, x1);
  for (int d = 0; d < f.dim; ++d) {
    sum[d] += (1 - ay) * ((1 - ax) * c00[d] + ax * c01[d]) + ay * ((1 - ax) * c10[d] + ax * c11[d]);
  }
  return true;
}
}  // namespace detail

/// Adds the features under every valid projection of `points` to `sum` and
/// returns how many points contributed. Points behind the camera or outside
/// the image or feature map are skipped.
inline std::size_t accumulate_image_feature(std::span<const Point3> points, const FeatureMap & feat,
                                            const CameraModel & cam, std::span<double> sum,
                                            Sampling mode = Sampling::kNearest)
{
  if (sum.size() != static_cast<std::size_t>(feat.dim)) {
    throw Error(Errc::kDimensionMismatch, "accumulator length differs from feature dim");
  }
  std::size_t n = 0;
  for (const auto & p : points) {
    auto px = project_visible(p, cam);
    if (px && detail::sample_feature(feat, px->u, px->v, mode, sum)) {
      ++n;
    }
  }
  return n;
}

/// Mean image feature over the voxel's physical points.
inline Embedding aggregate_image_feature(std::span<const Point3> points, const FeatureMap & feat,
                                         const CameraModel & cam,
                                         Sampling mode = Sampling::kNearest)
{
  Embedding sum(static_cast<std::size_t>(feat.dim), 0.0);
  const std::size_t n = accumulate_image_feature(points, feat, cam, sum, mode);
  if (n == 0) {
    throw Error(Errc::kNoValidProjection, "no point of the voxel projects into this camera");
  }
  for (auto & v : sum) {
    v /= static_cast<double>(n);
  }
  return sum;
}

/// Feature sampled at the projected voxel centroid only. Used to contrast the
/// physical-point aggregation; fails for voxels whose centroid leaves the image.
inline Embedding aggregate_image_feature_at_centroid(const VoxelIndex & idx,
                                                     const CylGridSpec & spec,
                                                     const FeatureMap & feat,
                                                     const CameraModel & cam)
{
  const Point3 c = voxel_centroid(idx, spec);
  return aggregate_image_feature(std::span<const Point3>(&c, 1), feat, cam);
}

/// Weights for the scale-aware positional embedding. psi projects sinusoidal
/// encodings of the centroid's (x, y, z, rho, theta) to D; phi is an
/// 8 -> hidden -> D MLP with tanh applied to the corner-distance vector.
struct SpeParams
{
  std::size_t dim{128};
  std::size_t bands{6};
  std::size_t hidden{32};
  std::uint64_t seed{0};
  double radial_extent{50.0};
  double z_min{-5.0};
  double z_max{3.0};
  std::vector<float> psi_w;   // dim x input_dim
  std::vector<float> psi_b;   // dim
  std::vector<float> phi_w1;  // hidden x 8
  std::vector<float> phi_b1;  // hidden
  std::vector<float> phi_w2;  // dim x hidden
  std::vector<float> phi_b2;  // dim

  std::size_t input_dim() const { return 5 * bands * 2; }

  static SpeParams make(std::size_t dim, std::uint64_t seed, const CylGridSpec & spec,
                        std::size_t bands = 6, std::size_t hidden = 32)
  {
    if (dim == 0 || bands == 0 || hidden == 0) {
      throw Error(Errc::kBadConfig, "SPE dimensions must be positive");
    }
    SpeParams p;
    p.dim = dim;
    p.bands = bands;
    p.hidden = hidden;
    p.seed = seed;
    p.radial_extent = spec.r_max;
    p.z_min = spec.z_min;
    p.z_max = spec.z_max;
    Rng rng(seed);
    auto fill = [&rng](std::vector<float> & w, std::size_t n, std::size_t fan_in) {
      const double a = 1.0 / std::sqrt(static_cast<double>(fan_in));
      w.resize(n);
      for (auto & x : w) {
        x = static_cast<float>(rng.uniform(-a, a));
      }
    };
    fill(p.psi_w, dim * p.input_dim(), p.input_dim());
    fill(p.psi_b, dim, p.input_dim());
    fill(p.phi_w1, hidden * 8, 8);
    fill(p.phi_b1, hidden, 8);
    fill(p.phi_w2, dim * hidden, hidden);
    fill(p.phi_b2, dim, hidden);
    return p;
  }

  void validate() const
  {
    if (psi_w.size() != dim * input_dim() || psi_b.size() != dim || phi_w1.size() != hidden * 8 ||
        phi_b1.size() != hidden || phi_w2.size() != dim * hidden || phi_b2.size() != dim) {
      throw Error(Errc::kShapeMismatch, "SPE weight shapes are inconsistent with D");
    }
    if (!(radial_extent > 0.0) || !(z_min < z_max)) {
      throw Error(Errc::kBadConfig, "SPE normalisation ranges are invalid");
    }
  }

  bool operator==(const SpeParams &) const = default;
};

/// Sinusoidal encoding of a centroid in Cartesian and polar form. Band k uses
/// frequency 2^k relative to the coordinate's range; theta wraps with period 2*pi.
inline std::vector<double> centroid_encoding(const Point3 & c, const SpeParams & params)
{
  const PolarCoord q = cart_to_polar(c);
  const double coords[5] = {c.x / params.radial_extent, c.y / params.radial_extent,
                            (c.z - params.z_min) / (params.z_max - params.z_min),
                            q.rho / params.radial_extent, q.theta / kTwoPi};
  std::vector<double> enc;
  enc.reserve(params.input_dim());
  for (int i = 0; i < 5; ++i) {
    const double base = i == 4 ? kTwoPi : M_PI;
    for (std::size_t k = 0; k < params.bands; ++k) {
      const double a = base * std::ldexp(1.0, static_cast<int>(k)) * coords[i];
      enc.push_back(std::sin(a));
      enc.push_back(std::cos(a));
    }
  }
  return enc;
}

/// Distances from each corner to the corner mean, in corner order.
inline std::array<double, 8> corner_distances(const ExtremePointSet & corners)
{
  const Point3 c = corner_mean(corners);
  std::array<double, 8> d{};
  for (std::size_t j = 0; j < 8; ++j) {
    d[j] = distance(corners[j], c);
  }
  return d;
}

inline Embedding spe_position_term(const Point3 & center, const SpeParams & params)
{
  const auto enc = centroid_encoding(center, params);
  const std::size_t in = params.input_dim();
  Embedding out(params.dim);
  for (std::size_t o = 0; o < params.dim; ++o) {
    const float * w = params.psi_w.data() + o * in;
    double acc = params.psi_b[o];
    for (std::size_t i = 0; i < in; ++i) {
      acc += static_cast<double>(w[i]) * enc[i];
    }
    out[o] = acc;
  }
  return out;
}

inline Embedding spe_scale_term(const std::array<double, 8> & d, const SpeParams & params)
{
  std::vector<double> h(params.hidden);
  for (std::size_t j = 0; j < params.hidden; ++j) {
    double acc = params.phi_b1[j];
    for (std::size_t i = 0; i < 8; ++i) {
      acc += static_cast<double>(params.phi_w1[j * 8 + i]) * d[i];
    }
    h[j] = std::tanh(acc);
  }
  Embedding out(params.dim);
  for (std::size_t o = 0; o < params.dim; ++o) {
    const float * w = params.phi_w2.data() + o * params.hidden;
    double acc = params.phi_b2[o];
    for (std::size_t j = 0; j < params.hidden; ++j) {
      acc += static_cast<double>(w[j]) * h[j];
    }
    out[o] = acc;
  }
  return out;
}

/// Scale-aware positional embedding: psi(mean corner) + phi(corner distances).
inline Embedding spe(const ExtremePointSet & corners, const SpeParams & params)
{
  auto out = spe_position_term(corner_mean(corners), params);
  const auto scale = spe_scale_term(corner_distances(corners), params);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] += scale[i];
  }
  return out;
}

struct FusedToken
{
  VoxelIndex voxel;
  Embedding content;  // [f3d + s, f2d + s], length 2 * D
  Embedding spe;      // s, length D
  bool image_valid{true};
};

inline FusedToken fuse_token(std::span<const double> f3d, std::span<const double> f2d,
                             std::span<const double> s)
{
  if (f3d.size() != s.size() || f2d.size() != s.size()) {
    throw Error(Errc::kDimensionMismatch, "token parts must share one feature length");
  }
  const std::size_t d = s.size();
  FusedToken t;
  t.content.resize(2 * d);
  for (std::size_t i = 0; i < d; ++i) {
    t.content[i] = f3d[i] + s[i];
    t.content[d + i] = f2d[i] + s[i];
  }
  t.spe.assign(s.begin(), s.end());
  return t;
}

/// Per-voxel LiDAR features aligned with a sorted voxel list.
struct VoxelFeatures
{
  std::size_t dim{0};
  std::vector<VoxelIndex> voxels;  // ascending
  std::vector<double> values;      // voxels.size() x dim

  std::span<const double> find(const VoxelIndex & idx) const
  {
    auto it = std::lower_bound(voxels.begin(), voxels.end(), idx);
    if (it == voxels.end() || *it != idx) {
      return {};
    }
    return {values.data() + static_cast<std::size_t>(it - voxels.begin()) * dim, dim};
  }
};

/// Deterministic stand-in for a learned voxel encoder: a fixed random
/// projection of simple per-voxel point statistics squashed by tanh.
inline VoxelFeatures point_statistics_features(const CylGrid & grid, std::size_t dim,
                                               std::uint64_t seed)
{
  constexpr std::size_t kStats = 8;
  Rng rng(seed ^ 0x5eed'f3d0ULL);
  std::vector<double> proj(dim * kStats);
  for (auto & w : proj) {
    w = rng.uniform(-1.0, 1.0);
  }
  VoxelFeatures f;
  f.dim = dim;
  f.voxels.reserve(grid.voxels.size());
  f.values.assign(grid.voxels.size() * dim, 0.0);
  const double ext = grid.spec.r_max;
  for (std::size_t i = 0; i < grid.voxels.size(); ++i) {
    const auto & v = grid.voxels[i];
    f.voxels.push_back(v.index);
    double sx = 0, sy = 0, sz = 0, si = 0, zmin = 1e300, zmax = -1e300;
    for (auto p : v.points) {
      const auto & r = grid.cloud.points[p];
      sx += r.x;
      sy += r.y;
      sz += r.z;
      si += r.intensity;
      zmin = std::min<double>(zmin, r.z);
      zmax = std::max<double>(zmax, r.z);
    }
    const double n = static_cast<double>(v.points.size());
    const double stats[kStats] = {sx / n / ext, sy / n / ext, sz / n, si / n, std::log1p(n),
                                  zmax - zmin, static_cast<double>(v.index.r) / grid.spec.r_bins,
                                  1.0};
    for (std::size_t d = 0; d < dim; ++d) {
      double acc = 0.0;
      for (std::size_t k = 0; k < kStats; ++k) {
        acc += proj[d * kStats + k] * stats[k];
      }
      f.values[i * dim + d] = std::tanh(acc);
    }
  }
  return f;
}

/// Deterministic stand-in for a learned image encoder: cells of `stride`
/// pixels, mean colour and cell position projected to D and squashed by tanh.
inline FeatureMap image_feature_map(const Image & img, int stride, int dim, std::uint64_t seed)
{
  if (stride < 1) {
    throw Error(Errc::kInvalidArgument, "stride must be >= 1");
  }
  const int h = (img.height + stride - 1) / stride;
  const int w = (img.width + stride - 1) / stride;
  FeatureMap f(h, w, dim, 1.0 / stride);
  constexpr int kStats = 6;
  Rng rng(seed ^ 0x5eed'f2d0ULL);
  std::vector<double> proj(static_cast<std::size_t>(dim) * kStats);
  for (auto & x : proj) {
    x = rng.uniform(-1.0, 1.0);
  }
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      double rgb[3] = {0, 0, 0};
      int n = 0;
      for (int v = row * stride; v < std::min(img.height, (row + 1) * stride); ++v) {
        for (int u = col * stride; u < std::min(img.width, (col + 1) * stride); ++u) {
          const auto * px = img.at(u, v);
          rgb[0] += px[0];
          rgb[1] += px[1];
          rgb[2] += px[2];
          ++n;
        }
      }
      const double stats[kStats] = {rgb[0] / n / 255.0, rgb[1] / n / 255.0, rgb[2] / n / 255.0,
                                    (col + 0.5) / w, (row + 0.5) / h, 1.0};
      float * out = f.cell(row, col);
      for (int d = 0; d < dim; ++d) {
        double acc = 0.0;
        for (int k = 0; k < kStats; ++k) {
          acc += proj[static_cast<std::size_t>(d) * kStats + k] * stats[k];
        }
        out[d] = static_cast<float>(std::tanh(acc));
      }
    }
  }
  return f;
}

/// One fused token per occupied voxel, in voxel order. The image half is the
/// mean over every valid (point, camera) projection; voxels seen by no camera
/// get a zero image half and image_valid = false.
inline std::vector<FusedToken> build_tokens(const CylGrid & grid, const VoxelFeatures & f3d,
                                            std::span<const FeatureMap> feats,
                                            std::span<const CameraModel> cams,
                                            const SpeParams & params,
                                            Sampling mode = Sampling::kNearest)
{
  params.validate();
  if (feats.size() != cams.size()) {
    throw Error(Errc::kDimensionMismatch, "one feature map per camera is required");
  }
  if (f3d.dim != params.dim) {
    throw Error(Errc::kDimensionMismatch, "voxel feature length differs from SPE dim");
  }
  for (const auto & f : feats) {
    if (static_cast<std::size_t>(f.dim) != params.dim) {
      throw Error(Errc::kDimensionMismatch, "image feature length differs from SPE dim");
    }
  }
  std::vector<FusedToken> tokens(grid.voxels.size());
  parallel_for(grid.voxels.size(), [&](std::size_t i) {
    const auto & v = grid.voxels[i];
    const auto lidar = f3d.find(v.index);
    if (lidar.empty()) {
      throw Error(Errc::kIndexOutOfRange, "voxel features do not cover every occupied voxel");
    }
    const auto pts = grid.voxel_points(v);
    Embedding image(params.dim, 0.0);
    std::size_t n = 0;
    for (std::size_t c = 0; c < cams.size(); ++c) {
      n += accumulate_image_feature(pts, feats[c], cams[c], image, mode);
    }
    if (n > 0) {
      for (auto & x : image) {
        x /= static_cast<double>(n);
      }
    }
    const auto s = spe(voxel_extreme_points(v.index, grid.spec), params);
    tokens[i] = fuse_token(lidar, image, s);
    tokens[i].voxel = v.index;
    tokens[i].image_valid = n > 0;
  });
  return tokens;
}

}  // namespace panofuse

#endif  // PANOFUSE_TOKEN_FUSION_HPP_
