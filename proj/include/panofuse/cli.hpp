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

#ifndef PANOFUSE_CLI_HPP_
#define PANOFUSE_CLI_HPP_

#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "panofuse/config.hpp"
#include "panofuse/cyl_grid.hpp"
#include "panofuse/error.hpp"
#include "panofuse/io.hpp"
#include "panofuse/metrics.hpp"
#include "panofuse/parallel.hpp"
#include "panofuse/pie_aug.hpp"
#include "panofuse/query_gen.hpp"
#include "panofuse/synth.hpp"
#include "panofuse/token_fusion.hpp"

namespace panofuse
{

namespace fs = std::filesystem;

// ---- sample directories ---------------------------------------------------
// cloud.plcd, calib.json, cam<k>.ppm for every camera, optional masks.msk2.

struct SampleDir
{
  MultiModalSample sample;
  std::vector<Mask2D> masks;
  bool augmented{false};
};

inline fs::path camera_image_path(const fs::path & dir, std::size_t k)
{
  return dir / ("cam" + std::to_string(k) + ".ppm");
}

inline std::vector<fs::path> write_sample_dir(const fs::path & dir, const MultiModalSample & s,
                                              const std::vector<Mask2D> * masks, bool augmented)
{
  fs::create_directories(dir);
  std::vector<fs::path> written;
  write_file(dir / "cloud.plcd", encode_cloud(s.cloud));
  written.push_back(dir / "cloud.plcd");
  write_text(dir / "calib.json", encode_calibration(s.cameras, augmented));
  written.push_back(dir / "calib.json");
  for (std::size_t k = 0; k < s.images.size(); ++k) {
    write_file(camera_image_path(dir, k), encode_ppm(s.images[k]));
    written.push_back(camera_image_path(dir, k));
  }
  if (masks != nullptr) {
    write_file(dir / "masks.msk2", encode_masks(*masks));
    written.push_back(dir / "masks.msk2");
  }
  return written;
}

inline SampleDir read_sample_dir(const fs::path & dir, std::vector<fs::path> * inputs = nullptr)
{
  SampleDir sd;
  auto track = [&](const fs::path & p) {
    if (inputs != nullptr) {
      inputs->push_back(p);
    }
  };
  sd.sample.cloud = decode_cloud(read_file(dir / "cloud.plcd"));
  track(dir / "cloud.plcd");
  const auto calib = read_text(dir / "calib.json");
  track(dir / "calib.json");
  sd.sample.cameras = decode_calibration(calib);
  try {
    sd.augmented = nlohmann::json::parse(calib).value("augmented", false);
  } catch (const nlohmann::json::exception &) {
    sd.augmented = false;
  }
  for (std::size_t k = 0; k < sd.sample.cameras.size(); ++k) {
    sd.sample.images.push_back(decode_ppm(read_file(camera_image_path(dir, k))));
    track(camera_image_path(dir, k));
  }
  if (fs::exists(dir / "masks.msk2")) {
    sd.masks = decode_masks(read_file(dir / "masks.msk2"));
    track(dir / "masks.msk2");
  }
  sd.sample.validate();
  return sd;
}

// ---- run manifest ---------------------------------------------------------

class Manifest
{
public:
  Manifest(std::string command, const PipelineConfig & cfg, std::optional<std::uint64_t> seed)
  {
    j_["tool"] = "panofuse";
    j_["command"] = std::move(command);
    j_["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
    j_["threads"] = num_threads();
    j_["config"] = config_to_json(cfg);
    j_["inputs"] = nlohmann::json::array();
    j_["outputs"] = nlohmann::json::array();
    j_["timings_ms"] = nlohmann::json::object();
  }

  void input(const fs::path & p) { j_["inputs"].push_back(entry(p)); }
  void output(const fs::path & p) { j_["outputs"].push_back(entry(p)); }

  template <typename F>
  auto time(const std::string & stage, F && fn)
  {
    const auto t0 = std::chrono::steady_clock::now();
    struct Record
    {
      nlohmann::json & j;
      std::string stage;
      std::chrono::steady_clock::time_point t0;
      ~Record()
      {
        j[stage] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                     .count();
      }
    } rec{j_["timings_ms"], stage, t0};
    return fn();
  }

  void write(const fs::path & dir) const
  {
    fs::create_directories(dir);
    write_text(dir / "manifest.json", j_.dump(2) + "\n");
  }

  const nlohmann::json & json() const { return j_; }

private:
  static nlohmann::json entry(const fs::path & p)
  {
    return {{"path", p.generic_string()}, {"fnv1a64", hex64(fnv1a(read_file(p)))}};
  }
  nlohmann::json j_;
};

// ---- command runner -------------------------------------------------------

namespace detail
{
inline const std::vector<std::string> & cli_commands()
{
  static const std::vector<std::string> kCommands{"synth",   "voxelize", "augment",
                                                  "fuse",    "queries",  "eval",
                                                  "render-overlay"};
  return kCommands;
}
}  // namespace detail

/// Runs one CLI invocation. args excludes the program name. Returns the exit
/// status; stage failures print "error: <ErrorName>: detail" to `err`.
inline int run_cli(const std::vector<std::string> & args, std::ostream & out = std::cout,
                   std::ostream & err = std::cerr)
{
  CLI::App app{"panofuse: LiDAR-camera panoptic pipeline core"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  unsigned threads = 0;
  app.add_option("--config", config_path, "Pipeline config (JSON)");
  app.add_option("--seed", seed, "Seed for the command's random draws");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--threads", threads, "Worker threads (0 = auto)");

  std::string sample_dir;
  std::string org_dir;
  std::string new_dir;
  std::string tokens_path;
  std::string masks_path;
  std::string pred_path;
  std::string gt_path;
  std::string classes_path;
  std::string report_path;

  app.add_subcommand("synth", "Generate a synthetic multi-modal scene");
  auto * voxelize_cmd = app.add_subcommand("voxelize", "Voxelize a sample and pair voxels to images");
  voxelize_cmd->add_option("--sample", sample_dir, "Sample directory")->required();
  auto * augment_cmd = app.add_subcommand("augment", "Mix two samples with synchronized images");
  augment_cmd->add_option("--org", org_dir, "Original sample directory")->required();
  augment_cmd->add_option("--new", new_dir, "Donor sample directory")->required();
  auto * fuse = app.add_subcommand("fuse", "Build fused voxel tokens");
  fuse->add_option("--sample", sample_dir, "Sample directory")->required();
  auto * queries = app.add_subcommand("queries", "Generate prior-based queries");
  queries->add_option("--sample", sample_dir, "Sample directory")->required();
  queries->add_option("--tokens", tokens_path, "Token file (TOKS)")->required();
  queries->add_option("--masks", masks_path, "2D instance masks (MSK2); default: sample masks");
  auto * eval = app.add_subcommand("eval", "Panoptic evaluation");
  eval->add_option("--pred", pred_path, "Predicted labels (PLCD)")->required();
  eval->add_option("--gt", gt_path, "Ground-truth labels (PLCD)")->required();
  eval->add_option("--classes", classes_path, "Class table file");
  eval->add_option("--report", report_path, "Report path (JSON)");
  auto * overlay = app.add_subcommand("render-overlay", "Paint projected labels onto images");
  overlay->add_option("--sample", sample_dir, "Sample directory")->required();
  for (auto * sub : app.get_subcommands({})) {
    sub->fallthrough();
  }

  // Reject unknown subcommands by name before CLI11 reports a generic error.
  for (const auto & a : args) {
    if (a.empty() || a[0] == '-') {
      continue;
    }
    const auto & cmds = detail::cli_commands();
    if (std::find(cmds.begin(), cmds.end(), a) == cmds.end()) {
      // Values of global options are skipped by checking the previous token.
      const auto pos = static_cast<std::size_t>(&a - args.data());
      if (pos > 0 && args[pos - 1].rfind("--", 0) == 0 && args[pos - 1].find('=') == std::string::npos) {
        continue;
      }
      err << "error: " << errc_name(Errc::kUnknownCommand) << ": '" << a << "'\n";
      return 2;
    }
    break;
  }

  std::vector<std::string> argv_store{"panofuse"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char *> argv;
  for (auto & s : argv_store) {
    argv.push_back(s.data());
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp & e) {
    return app.exit(e, out, err);
  } catch (const CLI::RequiredError & e) {
    if (app.get_subcommands().empty()) {
      err << "error: " << errc_name(Errc::kUnknownCommand) << ": no command given\n";
      return 2;
    }
    err << "error: " << errc_name(Errc::kBadConfig) << ": " << e.what() << "\n";
    return 2;
  } catch (const CLI::ParseError & e) {
    err << "error: " << errc_name(Errc::kBadConfig) << ": " << e.what() << "\n";
    return 2;
  }

  try {
    set_num_threads(threads);
    PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    cfg.validate();
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (out_dir.empty()) {
      if (cmd == "eval" && !report_path.empty()) {
        out_dir = fs::path(report_path).parent_path().string();
      }
      if (out_dir.empty()) {
        throw Error(Errc::kBadConfig, "--out is required");
      }
    }
    const fs::path odir(out_dir);
    fs::create_directories(odir);
    Manifest man(cmd, cfg, seed);
    if (!config_path.empty()) {
      man.input(config_path);
    }

    if (cmd == "synth") {
      SceneConfig sc = cfg.synth;
      if (seed) {
        sc.rng_seed = *seed;
      }
      const auto scene = man.time("synth", [&] { return generate_scene(sc); });
      for (const auto & p : write_sample_dir(odir, scene.sample, &scene.masks, false)) {
        man.output(p);
      }
      nlohmann::json objs = nlohmann::json::array();
      for (const auto & o : scene.objects) {
        objs.push_back({{"kind", o.kind == Archetype::kBox        ? "box"
                                 : o.kind == Archetype::kCylinder ? "cylinder"
                                                                  : "wall"},
                        {"semantic", o.semantic},
                        {"instance", o.instance},
                        {"center", detail::vec3(o.center)},
                        {"yaw", o.yaw},
                        {"half_extent", detail::vec3(o.half)}});
      }
      write_text(odir / "objects.json",
                 nlohmann::json{{"scan_id", scene.scan_id}, {"objects", objs}}.dump(2) + "\n");
      man.output(odir / "objects.json");
      out << "synth: " << scene.sample.cloud.size() << " points, " << scene.objects.size()
          << " objects, " << scene.masks.size() << " masks\n";
    } else if (cmd == "voxelize") {
      std::vector<fs::path> ins;
      const auto sd = read_sample_dir(sample_dir, &ins);
      for (const auto & p : ins) {
        man.input(p);
      }
      const auto grid = man.time("voxelize", [&] {
        return pair_voxel_image(voxelize(sd.sample.cloud, cfg.grid), sd.sample.cameras);
      });
      write_file(odir / "grid.voxl", encode_grid(grid));
      man.output(odir / "grid.voxl");
      out << "voxelize: " << grid.occupied() << " occupied voxels, " << grid.dropped.size()
          << " dropped points\n";
    } else if (cmd == "augment") {
      std::vector<fs::path> ins;
      const auto org = read_sample_dir(org_dir, &ins);
      const auto fresh = read_sample_dir(new_dir, &ins);
      for (const auto & p : ins) {
        man.input(p);
      }
      AugConfig ac = cfg.augment;
      if (seed) {
        ac.rng_seed = *seed;
      }
      const auto res =
        man.time("augment", [&] { return augment(org.sample, fresh.sample, ac, cfg.grid); });
      const bool augmented = org.augmented || ac.basic_enabled;
      for (const auto & p : write_sample_dir(odir, res.sample, nullptr, augmented)) {
        man.output(p);
      }
      nlohmann::json steps = nlohmann::json::array();
      for (const auto & s : res.steps) {
        steps.push_back({{"kind", s.kind == AugStep::kInstancePaste ? "instance_paste"
                                  : s.kind == AugStep::kHeightSwap  ? "height_swap"
                                                                    : "angle_swap"},
                         {"splits", s.splits},
                         {"parity", s.parity},
                         {"instances", s.instances},
                         {"voxels", s.mask.popcount()}});
      }
      std::vector<double> gt;
      for (int i = 0; i < 4; ++i) {
        for (int k = 0; k < 4; ++k) {
          gt.push_back(res.global_transform(i, k));
        }
      }
      write_text(odir / "steps.json",
                 nlohmann::json{{"steps", steps}, {"global_transform", gt}}.dump(2) + "\n");
      man.output(odir / "steps.json");
      out << "augment: " << res.steps.size() << " steps, " << res.sample.cloud.size()
          << " points\n";
    } else if (cmd == "fuse") {
      std::vector<fs::path> ins;
      const auto sd = read_sample_dir(sample_dir, &ins);
      for (const auto & p : ins) {
        man.input(p);
      }
      if (seed) {
        cfg.spe.seed = *seed;
      }
      const auto params = cfg.spe_params();
      const auto grid = man.time("voxelize", [&] { return voxelize(sd.sample.cloud, cfg.grid); });
      const auto f3d = man.time(
        "lidar_features", [&] { return point_statistics_features(grid, params.dim, cfg.fuse.encoder_seed); });
      std::vector<FeatureMap> feats;
      man.time("image_features", [&] {
        for (const auto & img : sd.sample.images) {
          feats.push_back(image_feature_map(img, cfg.fuse.feature_stride,
                                            static_cast<int>(params.dim),
                                            cfg.fuse.encoder_seed ^ 0x5bd1e995ULL));
        }
        return 0;
      });
      const auto tokens = man.time("tokens", [&] {
        return build_tokens(grid, f3d, feats, sd.sample.cameras, params, cfg.fuse.sampling);
      });
      write_file(odir / "tokens.toks", encode_tokens(tokens, params.dim));
      man.output(odir / "tokens.toks");
      write_file(odir / "spe.spew", encode_spe_params(params));
      man.output(odir / "spe.spew");
      for (std::size_t k = 0; k < feats.size(); ++k) {
        const auto p = odir / ("cam" + std::to_string(k) + ".fmap");
        write_file(p, encode_feature_map(feats[k]));
        man.output(p);
      }
      out << "fuse: " << tokens.size() << " tokens, D = " << params.dim << "\n";
    } else if (cmd == "queries") {
      std::vector<fs::path> ins;
      const auto sd = read_sample_dir(sample_dir, &ins);
      for (const auto & p : ins) {
        man.input(p);
      }
      if (seed) {
        cfg.spe.seed = *seed;
      }
      const auto tf = decode_tokens(read_file(tokens_path));
      man.input(tokens_path);
      std::vector<Mask2D> masks = sd.masks;
      if (!masks_path.empty()) {
        masks = decode_masks(read_file(masks_path));
        man.input(masks_path);
      }
      auto params = cfg.spe_params();
      if (tf.dim != params.dim) {
        throw Error(Errc::kDimensionMismatch, "token file D differs from the configured SPE dim");
      }
      const auto grid = voxelize(sd.sample.cloud, cfg.grid);
      const auto heat = man.time("heatmap", [&] {
        return build_bev_heatmap(grid, cfg.queries.heatmap, cfg.queries.heatmap_sigma);
      });
      const auto geo =
        man.time("geometric_hints", [&] { return geometric_hints(grid, heat, cfg.queries.nms); });
      const auto tex = man.time("texture_hints", [&] {
        return texture_hints(masks, sd.sample.cloud, sd.sample.cameras, cfg.queries.dbscan_eps,
                             cfg.queries.dbscan_min_pts);
      });
      const auto table = cfg.class_table();
      const auto qs = man.time("assemble", [&] {
        return assemble_queries(geo, tex, grid, tf.tokens, params, cfg.queries.l_pr,
                                cfg.queries.l_lt, table.classes.size());
      });
      write_file(odir / "queries.qrys", encode_queries(qs));
      man.output(odir / "queries.qrys");
      out << "queries: " << geo.size() << " geometric + " << tex.size() << " texture hints -> "
          << qs.prior.size() << " prior, " << qs.no_prior.size() << " no-prior\n";
    } else if (cmd == "eval") {
      const auto pred = decode_cloud(read_file(pred_path));
      man.input(pred_path);
      const auto gt = decode_cloud(read_file(gt_path));
      man.input(gt_path);
      if (!pred.has_labels || !gt.has_labels) {
        throw Error(Errc::kMissingLabels, "eval needs labelled point clouds");
      }
      ClassTable table;
      if (!classes_path.empty()) {
        table = decode_class_table(read_text(classes_path));
        man.input(classes_path);
      } else {
        table = cfg.class_table();
      }
      MatchOptions mo;
      mo.min_segment_points = cfg.eval.min_segment_points;
      const auto rep = man.time("eval", [&] {
        return evaluate_panoptic(SegLabeling::from_cloud(pred), SegLabeling::from_cloud(gt), table,
                                 mo);
      });
      const fs::path rpath = report_path.empty() ? odir / "report.json" : fs::path(report_path);
      write_text(rpath, report_to_json(rep).dump(2) + "\n");
      man.output(rpath);
      out << "eval: PQ " << rep.pq << " SQ " << rep.sq << " RQ " << rep.rq << " mIoU " << rep.miou
          << "\n";
    } else if (cmd == "render-overlay") {
      std::vector<fs::path> ins;
      const auto sd = read_sample_dir(sample_dir, &ins);
      for (const auto & p : ins) {
        man.input(p);
      }
      const auto imgs = man.time("overlay", [&] {
        return render_overlay(sd.sample.cloud, sd.sample.images, sd.sample.cameras);
      });
      for (std::size_t k = 0; k < imgs.size(); ++k) {
        const auto p = odir / ("overlay" + std::to_string(k) + ".ppm");
        write_file(p, encode_ppm(imgs[k]));
        man.output(p);
      }
      out << "render-overlay: " << imgs.size() << " images\n";
    }
    man.write(odir);
    return 0;
  } catch (const Error & e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error & e) {
    err << "error: " << errc_name(Errc::kIoError) << ": " << e.what() << "\n";
    return 1;
  }
}

}  // namespace panofuse

#endif  // PANOFUSE_CLI_HPP_
