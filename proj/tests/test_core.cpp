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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "panofuse/cyl_grid.hpp"
#include "panofuse/geometry.hpp"
#include "panofuse/parallel.hpp"
#include "panofuse/pie_aug.hpp"
#include "panofuse/rng.hpp"
#include "panofuse/synth.hpp"

namespace
{
using namespace panofuse;

CameraModel pinhole(double f, double cx, double cy, int w, int h)
{
  CameraModel c;
  c.intrinsic << f, 0, cx, 0, f, cy, 0, 0, 1;
  c.width = w;
  c.height = h;
  return c;
}

template <typename Fn>
Errc error_of(Fn && fn)
{
  try {
    fn();
  } catch (const Error & e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::kInvalidArgument;
}

// ---- geometry -------------------------------------------------------------

TEST(Polar, AxisAlignedPoints)
{
  auto a = cart_to_polar({1, 0, 0, 0});
  EXPECT_EQ(a.rho, 1.0);
  EXPECT_EQ(a.theta, 0.0);
  auto b = cart_to_polar({0, 2, 5, 0});
  EXPECT_DOUBLE_EQ(b.rho, 2.0);
  EXPECT_DOUBLE_EQ(b.theta, M_PI / 2);
  EXPECT_EQ(b.z, 5.0);
  auto c = cart_to_polar({-1, -1, 0, 0});
  EXPECT_DOUBLE_EQ(c.rho, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(c.theta, 5 * M_PI / 4);
}

TEST(Polar, ThetaStaysInHalfOpenRange)
{
  EXPECT_EQ(normalize_angle(-1e-300), 0.0);
  EXPECT_EQ(normalize_angle(kTwoPi), 0.0);
  EXPECT_LT(normalize_angle(-1e-17), kTwoPi);
  EXPECT_GE(cart_to_polar({1.0, -1e-18, 0, 0}).theta, 0.0);
}

TEST(Polar, InverseExamplesAndRoundTrip)
{
  auto p = polar_to_cart({1, 0, 0});
  EXPECT_EQ(p.x, 1.0);
  EXPECT_EQ(p.y, 0.0);
  auto q = polar_to_cart({2, M_PI / 2, 5});
  EXPECT_NEAR(q.x, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(q.y, 2.0);
  EXPECT_EQ(q.z, 5.0);
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    Point3 a{rng.uniform(-60, 60), rng.uniform(-60, 60), rng.uniform(-5, 5), 0};
    auto b = polar_to_cart(cart_to_polar(a));
    EXPECT_NEAR(a.x, b.x, 1e-9);
    EXPECT_NEAR(a.y, b.y, 1e-9);
    EXPECT_NEAR(a.z, b.z, 1e-9);
  }
}

TEST(Projection, PrincipalPointAndHandExample)
{
  CameraModel id;
  auto a = project_point({0, 0, 2, 0}, id);
  EXPECT_EQ(a.u, 0.0);
  EXPECT_EQ(a.v, 0.0);
  EXPECT_EQ(a.depth, 2.0);
  auto cam = pinhole(100, 320, 180, 640, 360);
  auto b = project_point({1, 0, 2, 0}, cam);
  EXPECT_DOUBLE_EQ(b.u, 370.0);
  EXPECT_DOUBLE_EQ(b.v, 180.0);
  EXPECT_DOUBLE_EQ(b.depth, 2.0);
  EXPECT_EQ(error_of([&] { project_point({0, 0, -1, 0}, id); }), Errc::kBehindCamera);
}

TEST(Projection, VisibilityUsesImageBounds)
{
  auto cam = pinhole(100, 320, 180, 640, 360);
  EXPECT_TRUE(project_visible({0, 0, 1, 0}, cam));
  EXPECT_FALSE(project_visible({10, 0, 1, 0}, cam));
  EXPECT_FALSE(project_visible({0, 0, -1, 0}, cam));
}

TEST(Projection, MatchesComponentOracle)
{
  Rng rng(2);
  const auto cams = make_camera_rig(6, 640, 360, 1.2, 0.3);
  for (int i = 0; i < 500; ++i) {
    Point3 p{rng.uniform(-30, 30), rng.uniform(-30, 30), rng.uniform(-3, 3), 0};
    const auto & cam = cams[static_cast<std::size_t>(i % 6)];
    double u = 0, v = 0;
    const bool vis = oracle::project(p, cam, u, v);
    auto px = project_visible(p, cam);
    ASSERT_EQ(vis, px.has_value());
    if (vis) {
      EXPECT_NEAR(px->u, u, 1e-9);
      EXPECT_NEAR(px->v, v, 1e-9);
    }
  }
}

TEST(Rects, BoundingRectExamples)
{
  std::vector<PixelCoord> one{{5.2, 7.9, 1.0}};
  EXPECT_EQ(bounding_rect(one), (Rect{5, 7, 5, 7}));
  std::vector<PixelCoord> two{{0, 0, 1}, {3, 4, 1}};
  EXPECT_EQ(bounding_rect(two), (Rect{0, 0, 3, 4}));
  EXPECT_EQ(error_of([] { bounding_rect({}); }), Errc::kEmptySet);
}

TEST(InstanceTransform, Examples)
{
  std::vector<Point3> pts{{1, 2, 3, 0.5}, {4, 5, 6, 0.25}};
  auto same = transform_instance(pts, {});
  EXPECT_EQ(same[0].x, 1.0);
  EXPECT_EQ(same[1].z, 6.0);
  EXPECT_EQ(same[1].intensity, 0.25);

  std::vector<Point3> single{{3, -2, 1, 0}};
  InstanceTransform t;
  t.rot_z = 1.1;
  t.scale = 1.7;
  auto fixed = transform_instance(single, t);
  EXPECT_EQ(fixed[0].x, 3.0);
  EXPECT_EQ(fixed[0].y, -2.0);

  std::vector<Point3> pair{{6, 5, 0, 0}, {4, 5, 0, 0}};
  InstanceTransform r;
  r.rot_z = M_PI / 2;
  auto rot = transform_instance(pair, r);
  EXPECT_NEAR(rot[0].x, 5.0, 1e-12);
  EXPECT_NEAR(rot[0].y, 6.0, 1e-12);
  EXPECT_NEAR(rot[1].x, 5.0, 1e-12);
  EXPECT_NEAR(rot[1].y, 4.0, 1e-12);

  InstanceTransform bad;
  bad.scale = 0.0;
  EXPECT_EQ(error_of([&] { transform_instance(pts, bad); }), Errc::kInvalidArgument);
}

// ---- cylindrical grid -----------------------------------------------------

TEST(CylGrid, NuscenesHandExample)
{
  const CylGridSpec spec;
  auto v = spec.locate(Point3{25, 0, -1, 0});
  ASSERT_TRUE(v);
  EXPECT_EQ(*v, (VoxelIndex{240, 0, 16}));
}

TEST(CylGrid, OutOfRangeDroppedAndEmptyCloud)
{
  const CylGridSpec spec;
  PointCloud c;
  EXPECT_EQ(voxelize(c, spec).occupied(), 0u);
  c.points.push_back(make_record({60, 0, 0, 0}, 1, 0));
  c.points.push_back(make_record({1, 0, 4, 0}, 1, 0));
  c.points.push_back(make_record({1, 0, 0, 0}, 1, 0));
  auto g = voxelize(c, spec);
  EXPECT_EQ(g.occupied(), 1u);
  EXPECT_EQ(g.dropped, (std::vector<std::uint32_t>{0, 1}));
}

TEST(CylGrid, LastRadialAndHeightBinsAreClosed)
{
  const CylGridSpec spec;
  auto v = spec.locate(Point3{50, 0, 3, 0});
  ASSERT_TRUE(v);
  EXPECT_EQ(v->r, spec.r_bins - 1);
  EXPECT_EQ(v->z, spec.z_bins - 1);
  EXPECT_FALSE(spec.theta_bin(kTwoPi));
}

TEST(CylGrid, BinsAgreeWithEdgeValues)
{
  const CylGridSpec spec;
  for (int k = 0; k <= spec.theta_bins; ++k) {
    const double e = spec.theta_edge(k);
    if (k < spec.theta_bins) {
      EXPECT_EQ(*spec.theta_bin(e), k);
    }
    if (k > 0) {
      EXPECT_EQ(*spec.theta_bin(std::nextafter(e, 0.0)), k - 1);
    }
  }
  for (int k = 0; k < spec.r_bins; ++k) {
    EXPECT_EQ(*spec.r_bin(spec.r_edge(k)), k);
  }
  for (int k = 0; k < spec.z_bins; ++k) {
    EXPECT_EQ(*spec.z_bin(spec.z_edge(k)), k);
  }
}

TEST(CylGrid, EveryInRangePointInExactlyOneVoxel)
{
  Rng rng(3);
  CylGridSpec spec;
  spec.r_bins = 20;
  spec.theta_bins = 16;
  spec.z_bins = 4;
  PointCloud c;
  for (int i = 0; i < 2000; ++i) {
    c.points.push_back(make_record(
      {rng.uniform(-55, 55), rng.uniform(-55, 55), rng.uniform(-6, 4), 0}, 1, 0));
  }
  auto g = voxelize(c, spec);
  std::vector<int> seen(c.size(), 0);
  for (const auto & v : g.voxels) {
    for (auto p : v.points) {
      ++seen[p];
      EXPECT_EQ(*spec.locate(c.points[p].point()), v.index);
    }
  }
  for (auto d : g.dropped) {
    ++seen[d];
    EXPECT_FALSE(spec.locate(c.points[d].point()));
  }
  EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
  EXPECT_TRUE(std::is_sorted(g.voxels.begin(), g.voxels.end(),
                             [](const Voxel & a, const Voxel & b) { return a.index < b.index; }));
}

TEST(CylGrid, ExtremePointsAndCentroidHandExample)
{
  CylGridSpec spec;
  spec.r_min = 0.0;
  spec.r_max = 2.0;
  spec.r_bins = 2;
  spec.theta_bins = 4;
  spec.z_min = 0.0;
  spec.z_max = 1.0;
  spec.z_bins = 1;
  const VoxelIndex idx{1, 0, 0};
  auto corners = voxel_extreme_points(idx, spec);
  std::multiset<std::array<long, 3>> got;
  for (const auto & c : corners) {
    got.insert({std::lround(c.x * 1e9), std::lround(c.y * 1e9), std::lround(c.z * 1e9)});
  }
  std::multiset<std::array<long, 3>> want;
  for (auto [x, y, z] : std::vector<std::array<double, 3>>{{1, 0, 0}, {2, 0, 0}, {0, 1, 0}, {0, 2, 0},
                                                           {1, 0, 1}, {2, 0, 1}, {0, 1, 1}, {0, 2, 1}}) {
    want.insert({std::lround(x * 1e9), std::lround(y * 1e9), std::lround(z * 1e9)});
  }
  EXPECT_EQ(got, want);
  auto c = voxel_centroid(idx, spec);
  EXPECT_NEAR(c.x, 0.75, 1e-12);
  EXPECT_NEAR(c.y, 0.75, 1e-12);
  EXPECT_NEAR(c.z, 0.5, 1e-12);
}

TEST(CylGrid, PairingRectsAndBehindCamera)
{
  CylGridSpec spec;
  PointCloud c;
  c.points.push_back(make_record({10.0, 0.0, 0.0, 0}, 1, 0));
  c.points.push_back(make_record({10.001, 0.0, 0.0, 0}, 1, 0));
  c.points.push_back(make_record({-10.0, 0.0, 0.0, 0}, 1, 0));
  auto cams = make_camera_rig(1, 640, 360, 1.2, 0.0);  // faces +x
  auto g = pair_voxel_image(voxelize(c, spec), cams);
  ASSERT_EQ(g.occupied(), 2u);
  const Voxel * front = g.find(*spec.locate(Point3{10, 0, 0, 0}));
  const Voxel * back = g.find(*spec.locate(Point3{-10, 0, 0, 0}));
  ASSERT_TRUE(front && back);
  const Rect * r = front->pairing(0);
  ASSERT_NE(r, nullptr);
  EXPECT_EQ(r->u_min, r->u_max);
  EXPECT_EQ(r->v_min, r->v_max);
  EXPECT_EQ(back->pairing(0), nullptr);
}

TEST(CylGrid, SpecValidation)
{
  CylGridSpec s;
  s.r_bins = 0;
  EXPECT_EQ(error_of([&] { s.validate(); }), Errc::kBadConfig);
  CylGridSpec t;
  EXPECT_EQ(error_of([&] { voxel_extreme_points({480, 0, 0}, t); }), Errc::kIndexOutOfRange);
}

// ---- PieAug ---------------------------------------------------------------

CylGridSpec small_spec()
{
  CylGridSpec s;
  s.r_bins = 10;
  s.theta_bins = 8;
  s.z_bins = 4;
  s.r_max = 20.0;
  s.z_min = -2.0;
  s.z_max = 2.0;
  return s;
}

PointCloud scatter(Rng & rng, const CylGridSpec & spec, int n, std::uint16_t sem)
{
  PointCloud c;
  for (int i = 0; i < n; ++i) {
    const double r = rng.uniform(0.1, spec.r_max);
    const double t = rng.uniform(0, kTwoPi);
    c.points.push_back(
      make_record({r * std::cos(t), r * std::sin(t), rng.uniform(spec.z_min, spec.z_max), 0}, sem,
                  static_cast<std::uint16_t>(i % 5)));
  }
  return c;
}

TEST(PieMask, InstanceMaskExamples)
{
  const auto spec = small_spec();
  std::vector<std::vector<VoxelIndex>> none;
  EXPECT_EQ(instance_paste_mask(none, spec).popcount(), 0u);
  std::vector<std::vector<VoxelIndex>> one{{{0, 0, 0}}};
  EXPECT_EQ(instance_paste_mask(one, spec).popcount(), 1u);
  std::vector<std::vector<VoxelIndex>> two{{{0, 0, 0}, {1, 2, 3}}, {{1, 2, 3}, {4, 4, 0}}};
  EXPECT_EQ(instance_paste_mask(two, spec).popcount(), 3u);
}

TEST(PieMask, SceneSwapExamples)
{
  auto spec = small_spec();
  spec.theta_bins = 4;
  std::vector<int> sel{0, 2};
  auto m = scene_swap_mask(Axis::kAngle, sel, spec);
  EXPECT_EQ(m.popcount(), static_cast<std::size_t>(spec.r_bins * spec.z_bins * 2));
  EXPECT_TRUE(m.get({3, 2, 1}));
  EXPECT_FALSE(m.get({3, 1, 1}));
  std::vector<int> all{0, 1, 2, 3};
  EXPECT_EQ(scene_swap_mask(Axis::kAngle, all, spec).popcount(), spec.voxel_count());

  CylGridSpec nu;
  nu.r_bins = 48;
  nu.theta_bins = 36;
  std::vector<int> z0{0};
  EXPECT_EQ(scene_swap_mask(Axis::kHeight, z0, nu).popcount(),
            static_cast<std::size_t>(nu.r_bins * nu.theta_bins));
  std::vector<int> bad{4};
  EXPECT_EQ(error_of([&] { scene_swap_mask(Axis::kAngle, bad, spec); }), Errc::kIndexOutOfRange);
}

TEST(PieMask, AlternatingSlices)
{
  EXPECT_EQ(alternating_slices(8, 4, 0), (std::vector<int>{0, 1, 4, 5}));
  EXPECT_EQ(alternating_slices(8, 4, 1), (std::vector<int>{2, 3, 6, 7}));
  EXPECT_EQ(alternating_slices(10, 3, 0), (std::vector<int>{0, 1, 2, 6, 7, 8, 9}));
  EXPECT_EQ(alternating_slices(2, 5, 1), (std::vector<int>{1}));
  auto a = alternating_slices(32, 5, 0);
  auto b = alternating_slices(32, 5, 1);
  std::vector<int> u(a);
  u.insert(u.end(), b.begin(), b.end());
  std::sort(u.begin(), u.end());
  ASSERT_EQ(u.size(), 32u);
  for (int i = 0; i < 32; ++i) {
    EXPECT_EQ(u[static_cast<std::size_t>(i)], i);
  }
}

TEST(ApplyMix, AllZeroAllOneAndRandomMask)
{
  Rng rng(4);
  const auto spec = small_spec();
  auto org = voxelize(scatter(rng, spec, 500, 1), spec, kSourceOrg);
  auto fresh = voxelize(scatter(rng, spec, 500, 2), spec, kSourceNew);

  auto zero = apply_mix(org, fresh, PieMask(spec));
  EXPECT_EQ(zero.cloud, org.cloud);
  EXPECT_EQ(zero.occupied(), org.occupied());

  auto ones = apply_mix(org, fresh, PieMask(spec).complement());
  EXPECT_EQ(ones.occupied(), fresh.occupied());
  for (const auto & v : ones.voxels) {
    EXPECT_EQ(v.source, kSourceNew);
  }

  PieMask m(spec);
  for (std::uint32_t i = 0; i < spec.voxel_count(); ++i) {
    if (rng.bernoulli(0.5)) {
      m.set(spec.unlinear(i));
    }
  }
  auto mixed = apply_mix(org, fresh, m);
  for (const auto & v : mixed.voxels) {
    EXPECT_EQ(v.source, m.get(v.index) ? kSourceNew : kSourceOrg);
    for (auto p : v.points) {
      EXPECT_EQ(mixed.cloud.points[p].semantic, m.get(v.index) ? 2 : 1);
      EXPECT_EQ(mixed.point_source[p], v.source);
    }
  }
  EXPECT_EQ(error_of([&] { apply_mix(org, fresh, PieMask(CylGridSpec{})); }), Errc::kSpecMismatch);
}

TEST(SyncImageSwap, ZeroAndFullMasks)
{
  const auto spec = small_spec();
  auto cams = make_camera_rig(2, 64, 48, 1.4, 0.0);
  std::vector<Image> a{Image(64, 48, {1, 1, 1}), Image(64, 48, {1, 1, 1})};
  std::vector<Image> b{Image(64, 48, {2, 2, 2}), Image(64, 48, {2, 2, 2})};
  // A voxel pairing that spans each full image.
  CylGrid g = voxelize(PointCloud{}, spec);
  Voxel v;
  v.index = {1, 1, 1};
  v.pairings = {{0, Rect{0, 0, 63, 47}}, {1, Rect{0, 0, 63, 47}}};
  g.voxels.push_back(v);
  EXPECT_EQ(sync_image_swap(a, b, PieMask(spec), g), a);
  EXPECT_EQ(sync_image_swap(a, b, PieMask(spec).complement(), g), b);
}

MultiModalSample scene(std::uint64_t seed, std::uint8_t scan)
{
  SceneConfig sc;
  sc.rng_seed = seed;
  sc.scan_id = scan;
  sc.camera_count = 2;
  sc.image_width = 160;
  sc.image_height = 90;
  sc.ground_points = 1500;
  sc.points_per_object = 200;
  return generate_scene(sc).sample;
}

TEST(PasteInstances, EmptySelectionLeavesOrgUnchanged)
{
  auto org = scene(1, 1);
  auto donor = scene(2, 2);
  const CylGridSpec spec;
  auto grid = pair_voxel_image(voxelize(org.cloud, spec), org.cameras);
  auto res = paste_instances(grid, org.images, org.cameras, donor, {}, {});
  EXPECT_EQ(res.grid.cloud, grid.cloud);
  EXPECT_EQ(res.images, org.images);
}

TEST(PasteInstances, IdentityIntoEmptyRegionCopiesDonorRecords)
{
  const CylGridSpec spec;
  auto donor = scene(3, 2);
  MultiModalSample org;
  org.cameras = donor.cameras;
  for (const auto & img : donor.images) {
    org.images.emplace_back(img.width, img.height);
  }
  auto grid = pair_voxel_image(voxelize(org.cloud, spec), org.cameras);
  const auto ids = donor.cloud.instance_ids();
  ASSERT_FALSE(ids.empty());
  std::vector<std::uint16_t> pick{ids[0]};
  auto res = paste_instances(grid, org.images, org.cameras, donor, pick, {});
  std::multiset<std::array<float, 4>> want;
  for (const auto & r : donor.cloud.points) {
    if (r.instance == ids[0] && spec.locate(r.point())) {
      want.insert({r.x, r.y, r.z, static_cast<float>(r.semantic)});
    }
  }
  std::multiset<std::array<float, 4>> got;
  for (const auto & r : res.grid.cloud.points) {
    got.insert({r.x, r.y, r.z, static_cast<float>(r.semantic)});
    EXPECT_EQ(r.instance, 1);
  }
  EXPECT_EQ(got, want);
  EXPECT_EQ(error_of([&] {
              std::vector<std::uint16_t> missing{999};
              paste_instances(grid, org.images, org.cameras, donor, missing, {});
            }),
            Errc::kInsufficientInstances);
}

TEST(Augment, ZeroProbabilitiesWithoutBasicIsIdentity)
{
  auto org = scene(5, 1);
  auto fresh = scene(6, 2);
  AugConfig c;
  c.p_instance = c.p_height_swap = c.p_angle_swap = 0.0;
  c.basic_enabled = false;
  auto res = augment(org, fresh, c, CylGridSpec{});
  EXPECT_EQ(res.sample.cloud, org.cloud);
  EXPECT_EQ(res.sample.images, org.images);
  EXPECT_TRUE(res.steps.empty());
}

TEST(Augment, SameSeedIsBitIdenticalAcrossThreadCounts)
{
  auto org = scene(7, 1);
  auto fresh = scene(8, 2);
  AugConfig c;
  c.p_instance = c.p_height_swap = c.p_angle_swap = 1.0;
  c.rng_seed = 99;
  set_num_threads(1);
  auto a = augment(org, fresh, c, CylGridSpec{});
  set_num_threads(4);
  auto b = augment(org, fresh, c, CylGridSpec{});
  set_num_threads(0);
  EXPECT_EQ(a.sample.cloud, b.sample.cloud);
  EXPECT_EQ(a.sample.images, b.sample.images);
  EXPECT_EQ(a.global_transform, b.global_transform);
}

TEST(Augment, AngleSwapWithFourSplitsAlternatesSectors)
{
  auto org = scene(9, 1);
  auto fresh = scene(10, 2);
  AugConfig c;
  c.p_instance = c.p_height_swap = 0.0;
  c.p_angle_swap = 1.0;
  c.split_choices = {4};
  c.basic_enabled = false;
  const CylGridSpec spec;
  auto res = augment(org, fresh, c, spec);
  ASSERT_EQ(res.steps.size(), 1u);
  const int parity = res.steps[0].parity;
  std::array<std::set<std::uint8_t>, 4> sources;
  for (const auto & v : res.grid.voxels) {
    sources[static_cast<std::size_t>(v.index.theta / 90)].insert(v.source);
  }
  for (int s = 0; s < 4; ++s) {
    const auto want = (s % 2 == parity) ? kSourceNew : kSourceOrg;
    EXPECT_EQ(sources[static_cast<std::size_t>(s)], (std::set<std::uint8_t>{want})) << "sector " << s;
  }
}

TEST(Augment, GlobalTransformKeepsProjectionsConsistent)
{
  auto org = scene(11, 1);
  auto fresh = scene(12, 2);
  AugConfig c;
  c.p_instance = c.p_height_swap = c.p_angle_swap = 0.0;
  c.rng_seed = 3;
  auto res = augment(org, fresh, c, CylGridSpec{});
  ASSERT_EQ(res.sample.cloud.size(), org.cloud.size());
  for (std::size_t i = 0; i < org.cloud.size(); i += 97) {
    for (std::size_t k = 0; k < org.cameras.size(); ++k) {
      auto a = try_project(org.cloud.points[i].point(), org.cameras[k]);
      auto b = try_project(res.sample.cloud.points[i].point(), res.sample.cameras[k]);
      ASSERT_EQ(a.has_value(), b.has_value());
      if (a) {
        EXPECT_NEAR(a->u, b->u, 1e-3);
        EXPECT_NEAR(a->v, b->v, 1e-3);
      }
    }
  }
}

TEST(Augment, RejectsBadConfig)
{
  auto org = scene(13, 1);
  AugConfig c;
  c.p_instance = 1.5;
  EXPECT_EQ(error_of([&] { augment(org, org, c, CylGridSpec{}); }), Errc::kBadConfig);
}

}  // namespace
