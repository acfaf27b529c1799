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

#ifndef PANOFUSE_PIE_AUG_HPP_
#define PANOFUSE_PIE_AUG_HPP_

#include <Eigen/Geometry>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "panofuse/cyl_grid.hpp"
#include "panofuse/error.hpp"
#include "panofuse/image.hpp"
#include "panofuse/point_cloud.hpp"
#include "panofuse/rng.hpp"

namespace panofuse
{

/// Dense binary selection over the R x Theta x Z voxel grid. A set entry
/// means the voxel is taken from the new scan.
class PieMask
{
public:
  PieMask() = default;
  explicit PieMask(const CylGridSpec & spec) : spec_(spec), bits_(spec.voxel_count(), 0) {}

  const CylGridSpec & spec() const { return spec_; }
  std::span<const std::uint8_t> bits() const { return bits_; }

  bool get(const VoxelIndex & v) const { return bits_[spec_.linear(v)] != 0; }
  bool get_linear(std::uint32_t i) const { return bits_[i] != 0; }

  void set(const VoxelIndex & v, bool value = true)
  {
    spec_.check(v);
    bits_[spec_.linear(v)] = value ? 1 : 0;
  }

  std::size_t popcount() const
  {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
  }

  PieMask complement() const
  {
    PieMask m = *this;
    for (auto & b : m.bits_) {
      b = b ? 0 : 1;
    }
    return m;
  }

  PieMask & operator|=(const PieMask & o)
  {
    if (!(o.spec_ == spec_)) {
      throw Error(Errc::kSpecMismatch, "mask shapes differ");
    }
    for (std::size_t i = 0; i < bits_.size(); ++i) {
      bits_[i] = static_cast<std::uint8_t>(bits_[i] | o.bits_[i]);
    }
    return *this;
  }

  bool operator==(const PieMask &) const = default;

private:
  CylGridSpec spec_;
  std::vector<std::uint8_t> bits_;
};

/// Union of the voxels covered by the pasted instances.
inline PieMask instance_paste_mask(std::span<const std::vector<VoxelIndex>> instances,
                                   const CylGridSpec & spec)
{
  PieMask mask(spec);
  for (const auto & inst : instances) {
    for (const auto & v : inst) {
      mask.set(v);
    }
  }
  return mask;
}

/// Selects whole slices along one axis; the other two axes are fully selected.
inline PieMask scene_swap_mask(Axis axis, std::span<const int> selected, const CylGridSpec & spec)
{
  const int bins = spec.bins(axis);
  std::vector<std::uint8_t> pick(static_cast<std::size_t>(bins), 0);
  for (int s : selected) {
    if (s < 0 || s >= bins) {
      throw Error(Errc::kIndexOutOfRange, "selected slice outside the axis");
    }
    pick[static_cast<std::size_t>(s)] = 1;
  }
  PieMask mask(spec);
  for (int r = 0; r < spec.r_bins; ++r) {
    for (int t = 0; t < spec.theta_bins; ++t) {
      for (int z = 0; z < spec.z_bins; ++z) {
        const int coord = axis == Axis::kRadius ? r : (axis == Axis::kAngle ? t : z);
        if (pick[static_cast<std::size_t>(coord)]) {
          mask.set({r, t, z});
        }
      }
    }
  }
  return mask;
}

/// Splits [0, bins) into `splits` near-equal contiguous slices and returns the
/// bins of every slice whose ordinal has the given parity.
inline std::vector<int> alternating_slices(int bins, int splits, int parity)
{
  if (splits < 1 || bins < 1) {
    throw Error(Errc::kInvalidArgument, "split count and bin count must be positive");
  }
  splits = std::min(splits, bins);
  std::vector<int> out;
  for (int s = 0; s < splits; ++s) {
    if (s % 2 != parity % 2) {
      continue;
    }
    const int begin = static_cast<int>(static_cast<long>(s) * bins / splits);
    const int end = static_cast<int>(static_cast<long>(s + 1) * bins / splits);
    for (int b = begin; b < end; ++b) {
      out.push_back(b);
    }
  }
  return out;
}

/// Voxel-wise mix: each voxel comes from `fresh` where the mask is set and
/// from `org` elsewhere, together with its points, labels, source tag and
/// pairings. The output cloud lists surviving org points (including org's
/// out-of-range points) in their original order, followed by the taken points
/// of `fresh` in their original order.
inline CylGrid apply_mix(const CylGrid & org, const CylGrid & fresh, const PieMask & mask)
{
  if (!(org.spec == fresh.spec) || !(mask.spec() == org.spec)) {
    throw Error(Errc::kSpecMismatch, "grids and mask must share one grid spec");
  }
  const auto & spec = org.spec;
  constexpr auto kGone = std::numeric_limits<std::uint32_t>::max();

  std::vector<std::uint32_t> org_map(org.cloud.size(), 0);
  for (const auto & v : org.voxels) {
    if (mask.get_linear(spec.linear(v.index))) {
      for (auto p : v.points) {
        org_map[p] = kGone;
      }
    }
  }
  std::vector<std::uint32_t> new_map(fresh.cloud.size(), kGone);
  for (const auto & v : fresh.voxels) {
    if (mask.get_linear(spec.linear(v.index))) {
      for (auto p : v.points) {
        new_map[p] = 0;
      }
    }
  }

  CylGrid out;
  out.spec = spec;
  out.cloud.has_labels = org.cloud.has_labels && fresh.cloud.has_labels;
  for (std::uint32_t i = 0; i < org.cloud.size(); ++i) {
    if (org_map[i] != kGone) {
      org_map[i] = static_cast<std::uint32_t>(out.cloud.points.size());
      out.cloud.points.push_back(org.cloud.points[i]);
      out.point_source.push_back(org.point_source[i]);
    }
  }
  for (std::uint32_t i = 0; i < fresh.cloud.size(); ++i) {
    if (new_map[i] != kGone) {
      new_map[i] = static_cast<std::uint32_t>(out.cloud.points.size());
      out.cloud.points.push_back(fresh.cloud.points[i]);
      out.point_source.push_back(fresh.point_source[i]);
    }
  }
  for (auto d : org.dropped) {
    out.dropped.push_back(org_map[d]);
  }

  auto remapped = [](const Voxel & v, const std::vector<std::uint32_t> & map) {
    Voxel r = v;
    for (auto & p : r.points) {
      p = map[p];
    }
    return r;
  };
  auto a = org.voxels.begin();
  auto b = fresh.voxels.begin();
  while (a != org.voxels.end() || b != fresh.voxels.end()) {
    const bool take_a = b == fresh.voxels.end() || (a != org.voxels.end() && a->index <= b->index);
    const Voxel & v = take_a ? *a : *b;
    const bool masked = mask.get_linear(spec.linear(v.index));
    if (take_a && !masked) {
      out.voxels.push_back(remapped(v, org_map));
    } else if (!take_a && masked) {
      out.voxels.push_back(remapped(v, new_map));
    }
    if (take_a) {
      ++a;
    } else {
      ++b;
    }
  }
  return out;
}

namespace detail
{
inline void check_image_sets(std::span<const Image> a, std::span<const Image> b)
{
  if (a.size() != b.size()) {
    throw Error(Errc::kSpecMismatch, "image sets have different camera counts");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].same_shape(b[i])) {
      throw Error(Errc::kSpecMismatch, "image sizes differ between scans");
    }
  }
}

inline void copy_rect(const Image & src, Image & dst, const Rect & r)
{
  auto c = clip_rect(r, dst.width, dst.height);
  if (!c) {
    return;
  }
  for (int v = c->v_min; v <= c->v_max; ++v) {
    std::copy_n(src.at(c->u_min, v), static_cast<std::size_t>(c->width()) * 3,
                dst.at(c->u_min, v));
  }
}

// Nearest-neighbour resample of src_rect in src onto dst_rect in dst.
inline void copy_rect_scaled(const Image & src, const Rect & src_rect, Image & dst,
                             const Rect & dst_rect)
{
  auto sc = clip_rect(src_rect, src.width, src.height);
  auto dc = clip_rect(dst_rect, dst.width, dst.height);
  if (!sc || !dc) {
    return;
  }
  for (int v = dc->v_min; v <= dc->v_max; ++v) {
    const double fv = (v - dst_rect.v_min + 0.5) / dst_rect.height();
    const int sv = std::clamp(src_rect.v_min + static_cast<int>(fv * src_rect.height()),
                              sc->v_min, sc->v_max);
    for (int u = dc->u_min; u <= dc->u_max; ++u) {
      const double fu = (u - dst_rect.u_min + 0.5) / dst_rect.width();
      const int su = std::clamp(src_rect.u_min + static_cast<int>(fu * src_rect.width()),
                                sc->u_min, sc->u_max);
      std::copy_n(src.at(su, sv), 3, dst.at(u, v));
    }
  }
}
}  // namespace detail

/// Copies, for every masked voxel of the new scan, its paired rectangle in
/// each camera from the new images onto the org images. Voxels are visited in
/// lexicographic index order, so later voxels overwrite earlier overlaps.
/// When `copied` is non-null the written rectangles are appended per camera.
inline std::vector<Image> sync_image_swap(std::span<const Image> org_imgs,
                                          std::span<const Image> new_imgs, const PieMask & mask,
                                          const CylGrid & new_grid,
                                          std::vector<std::vector<Rect>> * copied = nullptr)
{
  detail::check_image_sets(org_imgs, new_imgs);
  if (!(mask.spec() == new_grid.spec)) {
    throw Error(Errc::kSpecMismatch, "mask does not match the grid spec");
  }
  std::vector<Image> out(org_imgs.begin(), org_imgs.end());
  if (copied != nullptr) {
    copied->resize(out.size());
  }
  for (const auto & v : new_grid.voxels) {
    if (!mask.get(v.index)) {
      continue;
    }
    for (const auto & p : v.pairings) {
      if (p.camera >= out.size()) {
        throw Error(Errc::kSpecMismatch, "pairing refers to a missing camera");
      }
      detail::copy_rect(new_imgs[p.camera], out[p.camera], p.rect);
      if (copied != nullptr) {
        (*copied)[p.camera].push_back(p.rect);
      }
    }
  }
  return out;
}

/// LiDAR scan with its K camera views.
struct MultiModalSample
{
  PointCloud cloud;
  std::vector<Image> images;
  std::vector<CameraModel> cameras;

  void validate() const
  {
    if (images.size() != cameras.size()) {
      throw Error(Errc::kShapeMismatch, "image count must equal camera count");
    }
    for (std::size_t i = 0; i < images.size(); ++i) {
      if (images[i].width != cameras[i].width || images[i].height != cameras[i].height) {
        throw Error(Errc::kShapeMismatch, "image size disagrees with its camera");
      }
    }
  }
};

struct PasteResult
{
  CylGrid grid;                             // mixed grid, pairings from org cameras
  std::vector<Image> images;
  PieMask mask;
  CylGrid pasted;                           // voxelized transformed instances
  std::vector<std::uint16_t> donor_ids;     // selected donor instances
  std::vector<std::uint16_t> assigned_ids;  // their ids in the output
  std::vector<std::vector<Rect>> copied_rects;
};

/// Donor instance ids whose points carry one of the given semantic classes.
inline std::vector<std::uint16_t> select_instances_by_label(const PointCloud & cloud,
                                                            std::span<const std::uint16_t> classes)
{
  std::vector<std::uint16_t> ids;
  for (const auto & r : cloud.points) {
    if (r.instance != 0 && std::find(classes.begin(), classes.end(), r.semantic) != classes.end()) {
      ids.push_back(r.instance);
    }
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

/// Pastes the listed donor instances into an already voxelized and paired org
/// grid. Each instance is transformed, voxelized, and its voxels replace the
/// org voxels at the same indices. Image patches follow the points: the
/// rectangle of each pasted voxel's pre-transform points in the donor view is
/// resampled onto the rectangle of its transformed points in the org view.
/// Pasted instances get fresh ids above the org scan's largest id.
inline PasteResult paste_instances(const CylGrid & org_grid, std::span<const Image> org_images,
                                   std::span<const CameraModel> org_cams,
                                   const MultiModalSample & donor,
                                   std::span<const std::uint16_t> instance_ids,
                                   std::span<const InstanceTransform> transforms)
{
  const auto & spec = org_grid.spec;
  if (!transforms.empty() && transforms.size() != instance_ids.size()) {
    throw Error(Errc::kLengthMismatch, "one transform per pasted instance is required");
  }
  detail::check_image_sets(org_images, donor.images);
  const auto available = donor.cloud.instance_ids();
  for (auto id : instance_ids) {
    if (!std::binary_search(available.begin(), available.end(), id)) {
      throw Error(Errc::kInsufficientInstances, "donor lacks instance " + std::to_string(id));
    }
  }
  const std::uint32_t base = org_grid.cloud.max_instance();
  if (base + instance_ids.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw Error(Errc::kInvalidArgument, "instance id space exhausted");
  }

  PasteResult res;
  PointCloud pasted_cloud;
  std::vector<Point3> original;
  for (std::size_t k = 0; k < instance_ids.size(); ++k) {
    std::vector<Point3> pts;
    std::vector<std::uint16_t> sems;
    for (const auto & r : donor.cloud.points) {
      if (r.instance == instance_ids[k]) {
        pts.push_back(r.point());
        sems.push_back(r.semantic);
      }
    }
    const auto moved =
      transform_instance(pts, transforms.empty() ? InstanceTransform{} : transforms[k]);
    const auto new_id = static_cast<std::uint16_t>(base + 1 + k);
    for (std::size_t i = 0; i < moved.size(); ++i) {
      pasted_cloud.points.push_back(make_record(moved[i], sems[i], new_id));
      original.push_back(pts[i]);
    }
    res.donor_ids.push_back(instance_ids[k]);
    res.assigned_ids.push_back(new_id);
  }

  res.pasted = pair_voxel_image(voxelize(pasted_cloud, spec, kSourceNew), org_cams);
  std::vector<std::vector<VoxelIndex>> covered(instance_ids.size());
  for (const auto & v : res.pasted.voxels) {
    for (auto p : v.points) {
      const auto id = res.pasted.cloud.points[p].instance;
      auto & list = covered[id - base - 1];
      if (list.empty() || list.back() != v.index) {
        list.push_back(v.index);
      }
    }
  }
  res.mask = instance_paste_mask(covered, spec);
  res.grid = apply_mix(org_grid, res.pasted, res.mask);

  res.images.assign(org_images.begin(), org_images.end());
  res.copied_rects.resize(res.images.size());
  for (const auto & v : res.pasted.voxels) {
    std::vector<Point3> before;
    before.reserve(v.points.size());
    for (auto p : v.points) {
      before.push_back(original[p]);
    }
    for (const auto & pr : v.pairings) {
      if (pr.camera >= donor.cameras.size()) {
        continue;
      }
      if (auto src = voxel_image_rect(before, donor.cameras[pr.camera])) {
        detail::copy_rect_scaled(donor.images[pr.camera], *src, res.images[pr.camera], pr.rect);
        res.copied_rects[pr.camera].push_back(pr.rect);
      }
    }
  }
  return res;
}

/// Convenience form: voxelizes the org sample and pastes the first `count`
/// donor instances (ascending id).
inline PasteResult paste_instances(const MultiModalSample & org, const MultiModalSample & donor,
                                   std::size_t count, std::span<const InstanceTransform> transforms,
                                   const CylGridSpec & spec)
{
  auto ids = donor.cloud.instance_ids();
  if (ids.size() < count) {
    throw Error(Errc::kInsufficientInstances, "donor has fewer instances than requested");
  }
  ids.resize(count);
  const auto org_grid = pair_voxel_image(voxelize(org.cloud, spec, kSourceOrg), org.cameras);
  return paste_instances(org_grid, org.images, org.cameras, donor, ids, transforms);
}

struct AugConfig
{
  double p_instance{0.4};
  double p_height_swap{0.05};
  double p_angle_swap{0.05};
  // false: the three strategies are drawn independently; true: at most one is
  // applied, chosen with the probabilities above and no-op for the remainder.
  bool categorical{false};
  std::vector<int> split_choices{3, 4, 5};
  int instance_min{1};
  int instance_max{3};
  double paste_translation{2.0};  // meters, uniform in +-value on x and y
  double paste_rotation{M_PI};    // radians, uniform in +-value
  double paste_scale_min{0.9};
  double paste_scale_max{1.1};
  bool basic_enabled{true};
  double basic_rotation{M_PI};
  bool basic_flip{true};
  double basic_scale_min{0.95};
  double basic_scale_max{1.05};
  std::uint64_t rng_seed{0};

  void validate() const
  {
    for (double p : {p_instance, p_height_swap, p_angle_swap}) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(Errc::kBadConfig, "augmentation probabilities must lie in [0, 1]");
      }
    }
    if (categorical && p_instance + p_height_swap + p_angle_swap > 1.0 + 1e-12) {
      throw Error(Errc::kBadConfig, "categorical probabilities must sum to at most 1");
    }
    if (split_choices.empty()) {
      throw Error(Errc::kBadConfig, "split_choices must not be empty");
    }
    for (int s : split_choices) {
      if (s < 1) {
        throw Error(Errc::kBadConfig, "split counts must be positive");
      }
    }
    if (instance_min < 0 || instance_max < instance_min) {
      throw Error(Errc::kBadConfig, "instance_count_range must satisfy 0 <= min <= max");
    }
    if (!(paste_scale_min > 0.0) || paste_scale_max < paste_scale_min ||
        !(basic_scale_min > 0.0) || basic_scale_max < basic_scale_min) {
      throw Error(Errc::kBadConfig, "scale ranges must be positive and ordered");
    }
  }
};

enum class AugStep { kInstancePaste, kHeightSwap, kAngleSwap };

struct AppliedStep
{
  AugStep kind;
  int splits{0};
  int parity{0};
  std::vector<std::uint16_t> instances;
  PieMask mask;
};

struct AugmentResult
{
  MultiModalSample sample;   // final cloud, images and (adjusted) cameras
  CylGrid grid;              // mixed grid before the global transform
  std::vector<AppliedStep> steps;
  std::vector<std::vector<Rect>> copied_rects;  // per camera, in write order
  Eigen::Matrix4d global_transform{Eigen::Matrix4d::Identity()};
};

/// Seeded mixing of two multi-modal samples followed by a global rigid/scale
/// transform applied to the merged cloud, with camera extrinsics compensated
/// so projections stay consistent. Deterministic given cfg.rng_seed.
inline AugmentResult augment(const MultiModalSample & org, const MultiModalSample & fresh,
                             const AugConfig & cfg, const CylGridSpec & spec)
{
  cfg.validate();
  org.validate();
  fresh.validate();
  Rng rng(cfg.rng_seed);

  bool do_paste = false;
  bool do_height = false;
  bool do_angle = false;
  if (cfg.categorical) {
    const double u = rng.uniform();
    do_paste = u < cfg.p_instance;
    do_height = !do_paste && u < cfg.p_instance + cfg.p_height_swap;
    do_angle = !do_paste && !do_height && u < cfg.p_instance + cfg.p_height_swap + cfg.p_angle_swap;
  } else {
    do_paste = rng.bernoulli(cfg.p_instance);
    do_height = rng.bernoulli(cfg.p_height_swap);
    do_angle = rng.bernoulli(cfg.p_angle_swap);
  }

  AugmentResult res;
  CylGrid grid = pair_voxel_image(voxelize(org.cloud, spec, kSourceOrg), org.cameras);
  std::vector<Image> images = org.images;
  res.copied_rects.resize(images.size());
  auto append_rects = [&](const std::vector<std::vector<Rect>> & rects) {
    for (std::size_t c = 0; c < rects.size() && c < res.copied_rects.size(); ++c) {
      res.copied_rects[c].insert(res.copied_rects[c].end(), rects[c].begin(), rects[c].end());
    }
  };

  if (do_paste) {
    auto ids = fresh.cloud.instance_ids();
    const auto hi = std::min<std::int64_t>(cfg.instance_max, static_cast<std::int64_t>(ids.size()));
    const auto lo = std::min<std::int64_t>(cfg.instance_min, hi);
    const auto count = static_cast<std::size_t>(rng.uniform_int(lo, hi));
    // Partial Fisher-Yates keeps the draw count independent of the id values.
    for (std::size_t i = 0; i < count; ++i) {
      const auto j = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(ids.size()) - 1));
      std::swap(ids[i], ids[j]);
    }
    ids.resize(count);
    std::vector<InstanceTransform> transforms(count);
    for (auto & t : transforms) {
      t.translation = {rng.uniform(-cfg.paste_translation, cfg.paste_translation),
                       rng.uniform(-cfg.paste_translation, cfg.paste_translation), 0.0};
      t.rot_z = rng.uniform(-cfg.paste_rotation, cfg.paste_rotation);
      t.scale = rng.uniform(cfg.paste_scale_min, cfg.paste_scale_max);
    }
    if (count > 0) {
      auto pasted = paste_instances(grid, images, org.cameras, fresh, ids, transforms);
      grid = std::move(pasted.grid);
      images = std::move(pasted.images);
      append_rects(pasted.copied_rects);
      res.steps.push_back({AugStep::kInstancePaste, 0, 0, pasted.assigned_ids, pasted.mask});
    }
  }

  if (do_height || do_angle) {
    const CylGrid fresh_grid =
      pair_voxel_image(voxelize(fresh.cloud, spec, kSourceNew), fresh.cameras);
    auto swap = [&](Axis axis, AugStep kind) {
      const auto pick = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(cfg.split_choices.size()) - 1));
      const int splits = cfg.split_choices[pick];
      const int parity = static_cast<int>(rng.uniform_int(0, 1));
      const auto slices = alternating_slices(spec.bins(axis), splits, parity);
      PieMask mask = scene_swap_mask(axis, slices, spec);
      std::vector<std::vector<Rect>> rects;
      images = sync_image_swap(images, fresh.images, mask, fresh_grid, &rects);
      grid = apply_mix(grid, fresh_grid, mask);
      append_rects(rects);
      res.steps.push_back({kind, splits, parity, {}, std::move(mask)});
    };
    if (do_height) {
      swap(Axis::kHeight, AugStep::kHeightSwap);
    }
    if (do_angle) {
      swap(Axis::kAngle, AugStep::kAngleSwap);
    }
  }

  res.sample.cloud = grid.cloud;
  res.sample.images = std::move(images);
  res.sample.cameras = org.cameras;

  if (cfg.basic_enabled) {
    const double angle = rng.uniform(-cfg.basic_rotation, cfg.basic_rotation);
    const bool flip_x = cfg.basic_flip && rng.bernoulli(0.5);
    const bool flip_y = cfg.basic_flip && rng.bernoulli(0.5);
    const double scale = rng.uniform(cfg.basic_scale_min, cfg.basic_scale_max);
    Eigen::Matrix3d lin = Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
    if (flip_x) {
      flip(0, 0) = -1.0;
    }
    if (flip_y) {
      flip(1, 1) = -1.0;
    }
    lin = scale * flip * lin;
    Eigen::Matrix4d a = Eigen::Matrix4d::Identity();
    a.topLeftCorner<3, 3>() = lin;
    res.global_transform = a;
    for (auto & r : res.sample.cloud.points) {
      const Eigen::Vector3d p = lin * Eigen::Vector3d(r.x, r.y, r.z);
      r.x = static_cast<float>(p.x());
      r.y = static_cast<float>(p.y());
      r.z = static_cast<float>(p.z());
    }
    const Eigen::Matrix4d inv = a.inverse();
    for (auto & cam : res.sample.cameras) {
      cam.extrinsic = cam.extrinsic * inv;
    }
  }
  res.grid = std::move(grid);
  return res;
}

}  // namespace panofuse

#endif  // PANOFUSE_PIE_AUG_HPP_
