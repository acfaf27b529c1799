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

#ifndef PANOFUSE_CONFIG_HPP_
#define PANOFUSE_CONFIG_HPP_

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

#include "json.hpp"
#include "panofuse/cyl_grid.hpp"
#include "panofuse/error.hpp"
#include "panofuse/io.hpp"
#include "panofuse/metrics.hpp"
#include "panofuse/pie_aug.hpp"
#include "panofuse/query_gen.hpp"
#include "panofuse/synth.hpp"
#include "panofuse/token_fusion.hpp"

namespace panofuse
{

struct SpeConfig
{
  std::size_t dim{128};
  std::size_t bands{6};
  std::size_t hidden{32};
  std::uint64_t seed{7};
  std::string weights;  // SPEW file; empty = derive from seed
};

struct FuseConfig
{
  int feature_stride{8};
  Sampling sampling{Sampling::kNearest};
  std::uint64_t encoder_seed{11};
};

struct QueryConfig
{
  std::size_t l_pr{128};
  std::size_t l_lt{128};
  HeatmapMode heatmap{HeatmapMode::kGtGaussian};
  // bins; small enough that the Gaussian tail stays under nms_conf beyond
  // nms_radius, so one instance yields one peak
  double heatmap_sigma{1.5};
  NmsOptions nms{};
  double dbscan_eps{0.8};     // meters
  std::size_t dbscan_min_pts{5};
};

struct EvalConfig
{
  std::string classes{"nuscenes"};  // builtin name or path to a class table file
  std::size_t min_segment_points{0};
};

struct PipelineConfig
{
  static constexpr int kVersion = 1;
  CylGridSpec grid{};
  AugConfig augment{};
  SpeConfig spe{};
  FuseConfig fuse{};
  QueryConfig queries{};
  EvalConfig eval{};
  SceneConfig synth{};
  std::filesystem::path base_dir;  // resolves relative paths; not serialised

  void validate() const
  {
    grid.validate();
    augment.validate();
    synth.validate();
    if (spe.dim == 0 || spe.bands == 0 || spe.hidden == 0 || fuse.feature_stride <= 0) {
      throw Error(Errc::kBadConfig, "spe and fuse sizes must be positive");
    }
    if (!(queries.dbscan_eps > 0.0) || queries.dbscan_min_pts == 0 ||
        !(queries.nms.radius >= 0.0)) {
      throw Error(Errc::kBadConfig, "query thresholds are invalid");
    }
    for (const auto & p : {spe.weights, eval.classes}) {
      if (!p.empty() && p != "nuscenes" && p != "semantic_kitti" &&
          !std::filesystem::exists(resolve(p))) {
        throw Error(Errc::kIoError, "referenced file does not exist: " + p);
      }
    }
  }

  std::filesystem::path resolve(const std::string & p) const
  {
    const std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  }

  ClassTable class_table() const
  {
    if (eval.classes == "nuscenes") {
      return ClassTable::nuscenes();
    }
    if (eval.classes == "semantic_kitti") {
      return ClassTable::semantic_kitti();
    }
    return decode_class_table(read_text(resolve(eval.classes)));
  }

  SpeParams spe_params() const
  {
    if (!spe.weights.empty()) {
      auto p = decode_spe_params(read_file(resolve(spe.weights)));
      if (p.dim != spe.dim) {
        throw Error(Errc::kBadConfig, "SPE weight file dim disagrees with the config");
      }
      return p;
    }
    return SpeParams::make(spe.dim, spe.seed, grid, spe.bands, spe.hidden);
  }
};

namespace detail
{
using nlohmann::json;

inline void check_keys(const json & j, std::string_view section,
                       std::initializer_list<std::string_view> keys)
{
  if (!j.is_object()) {
    throw Error(Errc::kBadConfig, "section '" + std::string(section) + "' must be an object");
  }
  for (const auto & [k, v] : j.items()) {
    bool known = false;
    for (auto key : keys) {
      known = known || k == key;
    }
    if (!known) {
      throw Error(Errc::kBadConfig, "unknown key '" + k + "' in '" + std::string(section) + "'");
    }
  }
}

template <typename T>
void read_opt(const json & j, const char * key, T & out)
{
  if (j.contains(key)) {
    out = j.at(key).get<T>();
  }
}

inline void read_vec3(const json & j, const char * key, Eigen::Vector3d & out)
{
  if (j.contains(key)) {
    const auto v = j.at(key).get<std::vector<double>>();
    if (v.size() != 3) {
      throw Error(Errc::kBadConfig, std::string(key) + " must hold three numbers");
    }
    out = {v[0], v[1], v[2]};
  }
}

inline std::vector<double> vec3(const Eigen::Vector3d & v) { return {v.x(), v.y(), v.z()}; }
}  // namespace detail

inline nlohmann::json config_to_json(const PipelineConfig & c)
{
  using nlohmann::json;
  json j;
  j["format"] = "panofuse-config";
  j["version"] = PipelineConfig::kVersion;
  j["grid"] = {{"r_bins", c.grid.r_bins},   {"theta_bins", c.grid.theta_bins},
               {"z_bins", c.grid.z_bins},   {"r_min", c.grid.r_min},
               {"r_max", c.grid.r_max},     {"z_min", c.grid.z_min},
               {"z_max", c.grid.z_max}};
  const auto & a = c.augment;
  j["augment"] = {{"p_instance", a.p_instance},
                  {"p_height_swap", a.p_height_swap},
                  {"p_angle_swap", a.p_angle_swap},
                  {"categorical", a.categorical},
                  {"split_choices", a.split_choices},
                  {"instance_min", a.instance_min},
                  {"instance_max", a.instance_max},
                  {"paste_translation", a.paste_translation},
                  {"paste_rotation", a.paste_rotation},
                  {"paste_scale_min", a.paste_scale_min},
                  {"paste_scale_max", a.paste_scale_max},
                  {"basic_enabled", a.basic_enabled},
                  {"basic_rotation", a.basic_rotation},
                  {"basic_flip", a.basic_flip},
                  {"basic_scale_min", a.basic_scale_min},
                  {"basic_scale_max", a.basic_scale_max},
                  {"seed", a.rng_seed}};
  j["spe"] = {{"dim", c.spe.dim},
              {"bands", c.spe.bands},
              {"hidden", c.spe.hidden},
              {"seed", c.spe.seed},
              {"weights", c.spe.weights}};
  j["fuse"] = {{"feature_stride", c.fuse.feature_stride},
               {"sampling", c.fuse.sampling == Sampling::kNearest ? "nearest" : "bilinear"},
               {"encoder_seed", c.fuse.encoder_seed}};
  const auto & q = c.queries;
  j["queries"] = {{"l_pr", q.l_pr},
                  {"l_lt", q.l_lt},
                  {"heatmap", q.heatmap == HeatmapMode::kGtGaussian ? "gt_gaussian" : "density"},
                  {"heatmap_sigma", q.heatmap_sigma},
                  {"nms_conf", q.nms.conf_thresh},
                  {"nms_radius", q.nms.radius},
                  {"nms_unit", q.nms.unit == RadiusUnit::kBins ? "bins" : "meters"},
                  {"max_peaks", q.nms.max_peaks},
                  {"dbscan_eps", q.dbscan_eps},
                  {"dbscan_min_pts", q.dbscan_min_pts}};
  j["eval"] = {{"classes", c.eval.classes}, {"min_segment_points", c.eval.min_segment_points}};
  const auto & s = c.synth;
  j["synth"] = {{"seed", s.rng_seed},
                {"scan_id", s.scan_id},
                {"object_min", s.object_min},
                {"object_max", s.object_max},
                {"use_box", s.use_box},
                {"use_cylinder", s.use_cylinder},
                {"use_wall", s.use_wall},
                {"box_size_min", detail::vec3(s.box_size.lo)},
                {"box_size_max", detail::vec3(s.box_size.hi)},
                {"cylinder_size_min", detail::vec3(s.cylinder_size.lo)},
                {"cylinder_size_max", detail::vec3(s.cylinder_size.hi)},
                {"wall_size_min", detail::vec3(s.wall_size.lo)},
                {"wall_size_max", detail::vec3(s.wall_size.hi)},
                {"points_per_object", s.points_per_object},
                {"ground_points", s.ground_points},
                {"ground_radius", s.ground_radius},
                {"ground_z", s.ground_z},
                {"place_min", s.place_min},
                {"place_max", s.place_max},
                {"camera_count", s.camera_count},
                {"image_width", s.image_width},
                {"image_height", s.image_height},
                {"camera_hfov", s.camera_hfov},
                {"camera_z", s.camera_z},
                {"splat_radius", s.splat_radius},
                {"splat_max_px", s.splat_max_px},
                {"provenance", s.provenance},
                {"ground_class", s.ground_class},
                {"box_class", s.box_class},
                {"cylinder_class", s.cylinder_class},
                {"wall_class", s.wall_class}};
  return j;
}

/// Missing keys keep their defaults; unknown keys and sections are rejected
/// so that typos surface as BadConfig.
inline PipelineConfig config_from_json(const nlohmann::json & j,
                                       const std::filesystem::path & base_dir = {})
{
  using detail::read_opt;
  PipelineConfig c;
  c.base_dir = base_dir;
  try {
    detail::check_keys(j, "config",
                       {"format", "version", "grid", "augment", "spe", "fuse", "queries", "eval",
                        "synth"});
    if (j.value("format", std::string("panofuse-config")) != "panofuse-config") {
      throw Error(Errc::kBadConfig, "unrecognised config format tag");
    }
    if (j.at("version").get<int>() != PipelineConfig::kVersion) {
      throw Error(Errc::kBadConfig, "unsupported config version");
    }
    if (j.contains("grid")) {
      const auto & g = j["grid"];
      detail::check_keys(g, "grid",
                         {"r_bins", "theta_bins", "z_bins", "r_min", "r_max", "z_min", "z_max"});
      read_opt(g, "r_bins", c.grid.r_bins);
      read_opt(g, "theta_bins", c.grid.theta_bins);
      read_opt(g, "z_bins", c.grid.z_bins);
      read_opt(g, "r_min", c.grid.r_min);
      read_opt(g, "r_max", c.grid.r_max);
      read_opt(g, "z_min", c.grid.z_min);
      read_opt(g, "z_max", c.grid.z_max);
    }
    if (j.contains("augment")) {
      const auto & a = j["augment"];
      auto & o = c.augment;
      detail::check_keys(a, "augment",
                         {"p_instance", "p_height_swap", "p_angle_swap", "categorical",
                          "split_choices", "instance_min", "instance_max", "paste_translation",
                          "paste_rotation", "paste_scale_min", "paste_scale_max", "basic_enabled",
                          "basic_rotation", "basic_flip", "basic_scale_min", "basic_scale_max",
                          "seed"});
      read_opt(a, "p_instance", o.p_instance);
      read_opt(a, "p_height_swap", o.p_height_swap);
      read_opt(a, "p_angle_swap", o.p_angle_swap);
      read_opt(a, "categorical", o.categorical);
      read_opt(a, "split_choices", o.split_choices);
      read_opt(a, "instance_min", o.instance_min);
      read_opt(a, "instance_max", o.instance_max);
      read_opt(a, "paste_translation", o.paste_translation);
      read_opt(a, "paste_rotation", o.paste_rotation);
      read_opt(a, "paste_scale_min", o.paste_scale_min);
      read_opt(a, "paste_scale_max", o.paste_scale_max);
      read_opt(a, "basic_enabled", o.basic_enabled);
      read_opt(a, "basic_rotation", o.basic_rotation);
      read_opt(a, "basic_flip", o.basic_flip);
      read_opt(a, "basic_scale_min", o.basic_scale_min);
      read_opt(a, "basic_scale_max", o.basic_scale_max);
      read_opt(a, "seed", o.rng_seed);
    }
    if (j.contains("spe")) {
      const auto & s = j["spe"];
      detail::check_keys(s, "spe", {"dim", "bands", "hidden", "seed", "weights"});
      read_opt(s, "dim", c.spe.dim);
      read_opt(s, "bands", c.spe.bands);
      read_opt(s, "hidden", c.spe.hidden);
      read_opt(s, "seed", c.spe.seed);
      read_opt(s, "weights", c.spe.weights);
    }
    if (j.contains("fuse")) {
      const auto & f = j["fuse"];
      detail::check_keys(f, "fuse", {"feature_stride", "sampling", "encoder_seed"});
      read_opt(f, "feature_stride", c.fuse.feature_stride);
      read_opt(f, "encoder_seed", c.fuse.encoder_seed);
      if (f.contains("sampling")) {
        const auto m = f["sampling"].get<std::string>();
        if (m != "nearest" && m != "bilinear") {
          throw Error(Errc::kBadConfig, "fuse.sampling must be nearest or bilinear");
        }
        c.fuse.sampling = m == "nearest" ? Sampling::kNearest : Sampling::kBilinear;
      }
    }
    if (j.contains("queries")) {
      const auto & q = j["queries"];
      auto & o = c.queries;
      detail::check_keys(q, "queries",
                         {"l_pr", "l_lt", "heatmap", "heatmap_sigma", "nms_conf", "nms_radius",
                          "nms_unit", "max_peaks", "dbscan_eps", "dbscan_min_pts"});
      read_opt(q, "l_pr", o.l_pr);
      read_opt(q, "l_lt", o.l_lt);
      read_opt(q, "heatmap_sigma", o.heatmap_sigma);
      read_opt(q, "nms_conf", o.nms.conf_thresh);
      read_opt(q, "nms_radius", o.nms.radius);
      read_opt(q, "max_peaks", o.nms.max_peaks);
      read_opt(q, "dbscan_eps", o.dbscan_eps);
      read_opt(q, "dbscan_min_pts", o.dbscan_min_pts);
      if (q.contains("heatmap")) {
        const auto m = q["heatmap"].get<std::string>();
        if (m != "gt_gaussian" && m != "density") {
          throw Error(Errc::kBadConfig, "queries.heatmap must be gt_gaussian or density");
        }
        o.heatmap = m == "density" ? HeatmapMode::kDensity : HeatmapMode::kGtGaussian;
      }
      if (q.contains("nms_unit")) {
        const auto m = q["nms_unit"].get<std::string>();
        if (m != "bins" && m != "meters") {
          throw Error(Errc::kBadConfig, "queries.nms_unit must be bins or meters");
        }
        o.nms.unit = m == "meters" ? RadiusUnit::kMeters : RadiusUnit::kBins;
      }
    }
    if (j.contains("eval")) {
      const auto & e = j["eval"];
      detail::check_keys(e, "eval", {"classes", "min_segment_points"});
      read_opt(e, "classes", c.eval.classes);
      read_opt(e, "min_segment_points", c.eval.min_segment_points);
    }
    if (j.contains("synth")) {
      const auto & s = j["synth"];
      auto & o = c.synth;
      detail::check_keys(
        s, "synth",
        {"seed", "scan_id", "object_min", "object_max", "use_box", "use_cylinder", "use_wall",
         "box_size_min", "box_size_max", "cylinder_size_min", "cylinder_size_max",
         "wall_size_min", "wall_size_max", "points_per_object", "ground_points",
         "ground_radius", "ground_z", "place_min", "place_max", "camera_count", "image_width",
         "image_height", "camera_hfov", "camera_z", "splat_radius", "splat_max_px",
         "provenance", "ground_class", "box_class", "cylinder_class", "wall_class"});
      read_opt(s, "seed", o.rng_seed);
      read_opt(s, "scan_id", o.scan_id);
      read_opt(s, "object_min", o.object_min);
      read_opt(s, "object_max", o.object_max);
      read_opt(s, "use_box", o.use_box);
      read_opt(s, "use_cylinder", o.use_cylinder);
      read_opt(s, "use_wall", o.use_wall);
      detail::read_vec3(s, "box_size_min", o.box_size.lo);
      detail::read_vec3(s, "box_size_max", o.box_size.hi);
      detail::read_vec3(s, "cylinder_size_min", o.cylinder_size.lo);
      detail::read_vec3(s, "cylinder_size_max", o.cylinder_size.hi);
      detail::read_vec3(s, "wall_size_min", o.wall_size.lo);
      detail::read_vec3(s, "wall_size_max", o.wall_size.hi);
      read_opt(s, "points_per_object", o.points_per_object);
      read_opt(s, "ground_points", o.ground_points);
      read_opt(s, "ground_radius", o.ground_radius);
      read_opt(s, "ground_z", o.ground_z);
      read_opt(s, "place_min", o.place_min);
      read_opt(s, "place_max", o.place_max);
      read_opt(s, "camera_count", o.camera_count);
      read_opt(s, "image_width", o.image_width);
      read_opt(s, "image_height", o.image_height);
      read_opt(s, "camera_hfov", o.camera_hfov);
      read_opt(s, "camera_z", o.camera_z);
      read_opt(s, "splat_radius", o.splat_radius);
      read_opt(s, "splat_max_px", o.splat_max_px);
      read_opt(s, "provenance", o.provenance);
      read_opt(s, "ground_class", o.ground_class);
      read_opt(s, "box_class", o.box_class);
      read_opt(s, "cylinder_class", o.cylinder_class);
      read_opt(s, "wall_class", o.wall_class);
    }
  } catch (const nlohmann::json::exception & e) {
    throw Error(Errc::kBadConfig, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline PipelineConfig load_config(const std::filesystem::path & path)
{
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception & e) {
    throw Error(Errc::kBadConfig, std::string("config: ") + e.what());
  }
  return config_from_json(j, path.parent_path());
}

inline std::string encode_config(const PipelineConfig & c) { return config_to_json(c).dump(2) + "\n"; }

}  // namespace panofuse

#endif  // PANOFUSE_CONFIG_HPP_
