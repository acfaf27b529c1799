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
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "panofuse/config.hpp"
#include "panofuse/io.hpp"
#include "panofuse/rng.hpp"
#include "panofuse/synth.hpp"

namespace
{
using namespace panofuse;
namespace fs = std::filesystem;

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

SceneConfig small_scene(std::uint64_t seed)
{
  SceneConfig sc;
  sc.rng_seed = seed;
  sc.camera_count = 3;
  sc.image_width = 200;
  sc.image_height = 120;
  sc.ground_points = 2000;
  sc.points_per_object = 300;
  return sc;
}

// ---- synthetic scenes -----------------------------------------------------

TEST(Synth, ZeroObjectsIsGroundOnly)
{
  auto sc = small_scene(1);
  sc.object_min = sc.object_max = 0;
  auto s = generate_scene(sc);
  EXPECT_TRUE(s.objects.empty());
  EXPECT_TRUE(s.masks.empty());
  EXPECT_EQ(s.sample.cloud.size(), sc.ground_points);
  const auto table = ClassTable::nuscenes();
  for (const auto & r : s.sample.cloud.points) {
    EXPECT_EQ(table.kind(r.semantic), ClassKind::kStuff);
    EXPECT_EQ(r.instance, 0);
  }
}

TEST(Synth, SameSeedIsBitIdentical)
{
  auto a = generate_scene(small_scene(2));
  auto b = generate_scene(small_scene(2));
  EXPECT_EQ(a.sample.cloud, b.sample.cloud);
  EXPECT_EQ(a.sample.images, b.sample.images);
  EXPECT_EQ(a.masks, b.masks);
  auto c = generate_scene(small_scene(3));
  EXPECT_NE(a.sample.cloud, c.sample.cloud);
}

TEST(Synth, MasksEqualInstanceProvenance)
{
  auto s = generate_scene(small_scene(4));
  ASSERT_FALSE(s.masks.empty());
  for (const auto & m : s.masks) {
    const auto & img = s.sample.images[m.camera];
    std::set<std::uint8_t> ids;
    for (int v = 0; v < m.height; ++v) {
      for (int u = 0; u < m.width; ++u) {
        if (m.at(u, v)) {
          ids.insert(img.at(u, v)[2]);
        }
      }
    }
    ASSERT_EQ(ids.size(), 1u);
    const std::uint8_t id = *ids.begin();
    for (int v = 0; v < m.height; ++v) {
      for (int u = 0; u < m.width; ++u) {
        EXPECT_EQ(m.at(u, v), img.at(u, v)[2] == id);
      }
    }
  }
}

TEST(Synth, ProvenanceChannels)
{
  auto sc = small_scene(5);
  sc.scan_id = 7;
  auto s = generate_scene(sc);
  for (std::size_t c = 0; c < s.sample.images.size(); ++c) {
    const auto & img = s.sample.images[c];
    for (int v = 0; v < img.height; v += 3) {
      for (int u = 0; u < img.width; u += 3) {
        EXPECT_EQ(img.at(u, v)[1], 7);
        const auto inst = s.instance_buffers[c][static_cast<std::size_t>(v) * img.width + u];
        EXPECT_EQ(img.at(u, v)[2], inst & 0xff);
      }
    }
  }
}

TEST(Synth, VisibilitySoundness)
{
  auto s = generate_scene(small_scene(6));
  std::size_t checked = 0;
  for (std::size_t c = 0; c < s.sample.cameras.size(); ++c) {
    const auto & cam = s.sample.cameras[c];
    for (int v = 0; v < cam.height; ++v) {
      for (int u = 0; u < cam.width; ++u) {
        const std::size_t pix = static_cast<std::size_t>(v) * cam.width + u;
        const auto inst = s.instance_buffers[c][pix];
        if (inst == 0) {
          continue;
        }
        const auto it = std::find_if(s.objects.begin(), s.objects.end(),
                                     [&](const SceneObject & o) { return o.instance == inst; });
        ASSERT_NE(it, s.objects.end());
        const auto p = back_project_pixel(cam, u, v, s.depth_buffers[c][pix]);
        EXPECT_TRUE(it->contains(p, 0.01));
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 0u);
}

TEST(Synth, ConfigValidation)
{
  auto sc = small_scene(7);
  sc.object_max = -1;
  EXPECT_EQ(error_of([&] { generate_scene(sc); }), Errc::kBadConfig);
}

TEST(Overlay, EmptyCloudAndOpticalAxis)
{
  auto cams = make_camera_rig(1, 64, 48, 1.0, 0.0);
  std::vector<Image> imgs{Image(64, 48, {9, 9, 9})};
  EXPECT_EQ(render_overlay(PointCloud{}, imgs, cams), imgs);
  PointCloud one;
  one.points.push_back(make_record({10, 0, 0, 0}, 4, 1));
  auto out = render_overlay(one, imgs, cams);
  const auto col = class_color(4);
  const std::uint8_t * px = out[0].at(32, 24);
  EXPECT_TRUE(std::equal(col.begin(), col.end(), px));
}

TEST(Overlay, PaintedPixelsMatchProjection)
{
  Rng rng(8);
  auto cams = make_camera_rig(2, 64, 48, 1.0, 0.0);
  std::vector<Image> imgs{Image(64, 48), Image(64, 48)};
  PointCloud c;
  for (int i = 0; i < 300; ++i) {
    c.points.push_back(make_record({rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-2, 2), 0}, 1, 0));
  }
  auto out = render_overlay(c, imgs, cams, [](std::uint16_t) { return std::array<std::uint8_t, 3>{255, 255, 255}; });
  for (std::size_t k = 0; k < 2; ++k) {
    std::set<std::pair<int, int>> want;
    for (const auto & r : c.points) {
      if (auto px = project_visible(r.point(), cams[k])) {
        want.insert({pixel_cell(px->u), pixel_cell(px->v)});
      }
    }
    std::set<std::pair<int, int>> got;
    for (int v = 0; v < 48; ++v) {
      for (int u = 0; u < 64; ++u) {
        if (out[k].at(u, v)[0] == 255) {
          got.insert({u, v});
        }
      }
    }
    EXPECT_EQ(got, want);
  }
}

// ---- codecs ---------------------------------------------------------------

TEST(Codecs, EmptyCloudRoundTrips)
{
  PointCloud c;
  EXPECT_EQ(decode_cloud(encode_cloud(c)), c);
}

TEST(Codecs, CloudLayoutIsLittleEndian)
{
  PointCloud c;
  c.points.push_back({1.0f, 0, 0, 0, 0x0102, 0x0304});
  auto b = encode_cloud(c);
  // magic 4 + version 4 + flag 1 + count 8, then 20 bytes per point.
  ASSERT_EQ(b.size(), 17u + 20u);
  EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "PLCD");
  EXPECT_EQ(b[17 + 3], 0x3f);  // 1.0f = 0x3f800000
  EXPECT_EQ(b[17 + 16], 0x02);
  EXPECT_EQ(b[17 + 18], 0x04);
}

TEST(Codecs, MalformedInputsAreRejected)
{
  PointCloud c;
  c.points.resize(3);
  auto b = encode_cloud(c);
  auto bad = b;
  bad[0] = 'X';
  EXPECT_EQ(error_of([&] { decode_cloud(bad); }), Errc::kBadMagic);
  auto cut = b;
  cut.resize(b.size() - 1);
  EXPECT_EQ(error_of([&] { decode_cloud(cut); }), Errc::kTruncatedFile);
  auto extra = b;
  extra.push_back(0);
  EXPECT_EQ(error_of([&] { decode_cloud(extra); }), Errc::kShapeMismatch);
  // A huge declared count must not allocate.
  auto huge = b;
  for (int i = 9; i < 17; ++i) {
    huge[static_cast<std::size_t>(i)] = 0xff;
  }
  EXPECT_EQ(error_of([&] { decode_cloud(huge); }), Errc::kTruncatedFile);
  EXPECT_EQ(error_of([&] { decode_feature_map(b); }), Errc::kBadMagic);
  EXPECT_EQ(error_of([&] { decode_tokens(b); }), Errc::kBadMagic);
  EXPECT_EQ(error_of([&] { decode_queries(b); }), Errc::kBadMagic);
  EXPECT_EQ(error_of([&] { decode_masks(b); }), Errc::kBadMagic);
  EXPECT_EQ(error_of([&] { decode_grid(b); }), Errc::kBadMagic);
}

TEST(Codecs, TokensRejectWrongLength)
{
  FusedToken t;
  t.content = {1, 2, 3};
  t.spe = {1};
  std::vector<FusedToken> toks{t};
  EXPECT_EQ(error_of([&] { encode_tokens(toks, 1); }), Errc::kShapeMismatch);
}

TEST(Codecs, MasksConcatenate)
{
  Mask2D a(0, 3, 2), b(2, 4, 1);
  a.set(1, 1);
  b.set(3, 0);
  auto ba = encode_masks(std::vector<Mask2D>{a});
  auto bb = encode_masks(std::vector<Mask2D>{b});
  Bytes both(ba);
  both.insert(both.end(), bb.begin(), bb.end());
  EXPECT_EQ(decode_masks(both), (std::vector<Mask2D>{a, b}));
}

TEST(Codecs, PpmWithCommentsAndBadMaxval)
{
  std::string text = "P6\n# a comment\n2 1\n255\n";
  Bytes b(text.begin(), text.end());
  for (int i = 0; i < 6; ++i) {
    b.push_back(static_cast<std::uint8_t>(i));
  }
  auto img = decode_ppm(b);
  EXPECT_EQ(img.width, 2);
  EXPECT_EQ(img.at(1, 0)[2], 5);
  std::string bad = "P6 1 1 65535\n";
  Bytes bb(bad.begin(), bad.end());
  bb.resize(bb.size() + 6);
  EXPECT_THROW(decode_ppm(bb), Error);
  std::string p3 = "P3 1 1 255\n0 0 0";
  EXPECT_EQ(error_of([&] { decode_ppm(Bytes(p3.begin(), p3.end())); }), Errc::kBadMagic);
}

TEST(Codecs, CalibrationValidation)
{
  auto cams = make_camera_rig(2, 64, 48, 1.0, 0.5);
  auto back = decode_calibration(encode_calibration(cams));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].extrinsic, cams[1].extrinsic);
  cams[0].extrinsic.row(0) *= 2.0;  // no longer a rotation
  EXPECT_EQ(error_of([&] { decode_calibration(encode_calibration(cams)); }), Errc::kBadConfig);
  EXPECT_NO_THROW(decode_calibration(encode_calibration(cams, true)));
  EXPECT_EQ(error_of([&] { decode_calibration("{"); }), Errc::kBadConfig);
}

TEST(Codecs, ClassTableText)
{
  auto t = decode_class_table("# id kind name\n0 ignore void\n\n3 thing car  # inline\n9 stuff road\n");
  ASSERT_EQ(t.classes.size(), 3u);
  EXPECT_EQ(t.kind(3), ClassKind::kThing);
  EXPECT_EQ(t.name(9), "road");
  EXPECT_EQ(decode_class_table(encode_class_table(t)).classes.size(), 3u);
  EXPECT_THROW(decode_class_table("1 blob x\n"), Error);
  EXPECT_THROW(decode_class_table("1 thing a\n1 stuff b\n"), Error);
}

// ---- config ---------------------------------------------------------------

TEST(Config, DefaultValues)
{
  const PipelineConfig c;
  EXPECT_EQ(c.grid.r_bins, 480);
  EXPECT_EQ(c.grid.theta_bins, 360);
  EXPECT_EQ(c.grid.z_bins, 32);
  EXPECT_EQ(c.grid.r_max, 50.0);
  EXPECT_EQ(c.grid.z_min, -5.0);
  EXPECT_EQ(c.grid.z_max, 3.0);
  EXPECT_EQ(c.queries.l_pr, 128u);
  EXPECT_EQ(c.queries.l_lt, 128u);
  EXPECT_EQ(c.augment.p_instance, 0.4);
  EXPECT_EQ(c.augment.p_height_swap, 0.05);
  EXPECT_EQ(c.augment.p_angle_swap, 0.05);
  EXPECT_EQ(c.augment.split_choices, (std::vector<int>{3, 4, 5}));
  EXPECT_EQ(c.synth.image_width, 640);
  EXPECT_EQ(c.synth.image_height, 360);
  EXPECT_EQ(c.spe.dim, 128u);
}

TEST(Config, RoundTripAndPartialFiles)
{
  PipelineConfig c;
  c.grid.r_bins = 100;
  c.augment.split_choices = {2, 7};
  c.queries.nms.unit = RadiusUnit::kMeters;
  c.fuse.sampling = Sampling::kBilinear;
  const auto text = encode_config(c);
  const auto back = config_from_json(nlohmann::json::parse(text));
  EXPECT_EQ(back.grid.r_bins, 100);
  EXPECT_EQ(back.augment.split_choices, (std::vector<int>{2, 7}));
  EXPECT_EQ(back.queries.nms.unit, RadiusUnit::kMeters);
  EXPECT_EQ(encode_config(back), text);

  auto partial = config_from_json(nlohmann::json::parse(R"({"version": 1, "grid": {"z_bins": 8}})"));
  EXPECT_EQ(partial.grid.z_bins, 8);
  EXPECT_EQ(partial.grid.r_bins, 480);
}

TEST(Config, RejectsUnknownKeysVersionsAndBadValues)
{
  using nlohmann::json;
  EXPECT_EQ(error_of([] { config_from_json(json::parse(R"({"version": 1, "grid": {"rbins": 3}})")); }),
            Errc::kBadConfig);
  EXPECT_EQ(error_of([] { config_from_json(json::parse(R"({"version": 1, "gird": {}})")); }),
            Errc::kBadConfig);
  EXPECT_EQ(error_of([] { config_from_json(json::parse(R"({"version": 2})")); }), Errc::kBadConfig);
  EXPECT_EQ(error_of([] { config_from_json(json::parse(R"({"grid": {}})")); }), Errc::kBadConfig);
  EXPECT_EQ(error_of([] { config_from_json(json::parse(R"({"version": 1, "augment": {"p_instance": 2}})")); }),
            Errc::kBadConfig);
  EXPECT_EQ(error_of([] { config_from_json(json::parse(R"({"version": 1, "grid": {"r_bins": "x"}})")); }),
            Errc::kBadConfig);
}

TEST(Config, MissingReferencedFileIsIoError)
{
  using nlohmann::json;
  EXPECT_EQ(error_of([] {
              config_from_json(json::parse(R"({"version": 1, "eval": {"classes": "nope.txt"}})"),
                               fs::temp_directory_path());
            }),
            Errc::kIoError);
  const auto dir = fs::temp_directory_path() / "panofuse_cfg_test";
  fs::create_directories(dir);
  write_text(dir / "classes.txt", "0 ignore void\n1 thing car\n");
  write_text(dir / "cfg.json", R"({"version": 1, "eval": {"classes": "classes.txt"}})");
  auto c = load_config(dir / "cfg.json");
  EXPECT_EQ(c.class_table().kind(1), ClassKind::kThing);
  fs::remove_all(dir);
  EXPECT_EQ(error_of([] { load_config("/nonexistent/cfg.json"); }), Errc::kIoError);
}

}  // namespace
