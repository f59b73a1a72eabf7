// Copyright 2026 The roadloc Authors. All Rights Reserved.
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

// Command-line frontend: calibration, projection, target encoding, losses,
// evaluation, synthetic data, augmentation and the annotation service.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roadloc/dataio.hpp"
#include "roadloc/error.hpp"
#include "roadloc/fileio.hpp"
#include "roadloc/losses.hpp"
#include "roadloc/pipeline.hpp"
#include "roadloc/service.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace roadloc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

constexpr const char* kMapNames[] = {"mc", "mco", "mv", "ms"};

// Writes to --out when given, stdout otherwise.
void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    write_file_atomic(out, text);
  }
}

json read_json(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

// A scene argument is a reference id (A..E) or a scene JSON file.
SceneMeta resolve_scene(const std::string& arg) {
  for (const auto& s : reference_scenes()) {
    if (s.id == arg) return s;
  }
  if (!fs::exists(arg)) throw Error(ErrorCode::kIoError, "scene '" + arg + "' is neither a reference id nor a file");
  return load_scene(arg);
}

std::map<std::string, SceneMeta> scene_table(const std::vector<std::string>& extra, const std::string& dir) {
  std::map<std::string, SceneMeta> out;
  for (const auto& s : reference_scenes()) out[s.id] = s;
  if (!dir.empty()) {
    if (!fs::is_directory(dir)) throw Error(ErrorCode::kIoError, "not a directory: " + dir);
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.path().extension() == ".json") {
        SceneMeta s = load_scene(e.path());
        out[s.id] = s;
      }
    }
  }
  for (const auto& arg : extra) {
    SceneMeta s = resolve_scene(arg);
    out[s.id] = s;
  }
  return out;
}

std::vector<std::array<double, 2>> pairs_at(const json& doc, const std::string& key) {
  if (!doc.contains(key) || !doc[key].is_array()) throw Error(ErrorCode::kParseError, key + ": expected an array");
  std::vector<std::array<double, 2>> out;
  for (const auto& p : doc[key]) {
    if (!p.is_array() || p.size() < 2) throw Error(ErrorCode::kParseError, key + ": expected [u, v] pairs");
    out.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return out;
}

void save_maps(const fs::path& dir, const TargetMaps& maps, GridDType dtype) {
  fs::create_directories(dir);
  const Grid* grids[] = {&maps.mc, &maps.mco, &maps.mv, &maps.ms};
  for (int i = 0; i < 4; ++i) save_grid(dir / kMapNames[i], *grids[i], maps.stride, dtype);
  json peaks = json::array();
  for (const auto& p : maps.peaks) {
    json j{{"row", p.row}, {"col", p.col}, {"class", p.class_id}};
    if (p.anchor_p2) j["anchor_p2"] = {p.anchor_p2->x, p.anchor_p2->y, p.anchor_p2->z};
    peaks.push_back(j);
  }
  write_file_atomic(dir / "peaks.json", json{{"peaks", peaks}, {"collisions", maps.collisions}}.dump(2));
}

TargetMaps load_maps(const fs::path& dir) {
  TargetMaps maps;
  Grid* grids[] = {&maps.mc, &maps.mco, &maps.mv, &maps.ms};
  for (int i = 0; i < 4; ++i) *grids[i] = load_grid(dir / kMapNames[i], &maps.stride);
  maps.num_classes = maps.mc.channels();
  if (fs::exists(dir / "peaks.json")) {
    const json doc = read_json(dir / "peaks.json");
    for (const auto& j : doc.at("peaks")) {
      PeakTarget p{j.at("row").get<int>(), j.at("col").get<int>(), j.at("class").get<int>(), std::nullopt};
      if (j.contains("anchor_p2")) {
        const auto& a = j["anchor_p2"];
        p.anchor_p2 = WorldPoint{a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
      }
      maps.peaks.push_back(p);
    }
  }
  maps.check_shapes();
  return maps;
}

// Prediction-style center heatmap: 1 at every peak, 0 elsewhere.
void binarize_heatmap(TargetMaps& maps) {
  std::fill(maps.mc.data().begin(), maps.mc.data().end(), 0.0);
  for (const auto& p : maps.peaks) maps.mc.at(p.row, p.col, p.class_id) = 1.0;
}

std::uint64_t frame_seed(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Roadside monocular 3D vehicle localization toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out;
  std::uint64_t seed = 0;
  app.add_option("--out,-o", out, "Output file or directory (default stdout)");
  app.add_option("--seed", seed, "Random seed");

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "Solve camera parameters from a vanishing point and ground marks");
  std::string calib_in;
  double calib_tol = VwlOptions{}.tolerance;
  std::string calib_id;
  calibrate->add_option("--in", calib_in, "Marks JSON {vp, image_width, image_height, marks}")->required();
  calibrate->add_option("--tolerance", calib_tol, "Largest accepted RMS relative length error");
  calibrate->add_option("--scene-id", calib_id, "Identifier written to the scene file");

  // project / backproject
  auto* project = app.add_subcommand("project", "World points to pixels");
  auto* backproject = app.add_subcommand("backproject", "Pixels to world points at a given height");
  std::string scene_arg, points_in;
  double back_z = 0.0;
  for (auto* sub : {project, backproject}) {
    sub->add_option("--scene", scene_arg, "Reference id (A..E) or scene JSON")->required();
    sub->add_option("--in", points_in, "Points JSON")->required()->check(CLI::ExistingFile);
  }
  backproject->add_option("--z", back_z, "World height of the points");

  // encode / decode
  auto* encode_cmd = app.add_subcommand("encode", "Annotations to target grids");
  std::string ann_in;
  int stride = 4;
  bool peak_heatmap = false;
  encode_cmd->add_option("--scene", scene_arg, "Reference id (A..E) or scene JSON")->required();
  encode_cmd->add_option("--in", ann_in, "Annotation JSON")->required();
  encode_cmd->add_option("--stride", stride, "Output stride")->check(CLI::PositiveNumber);
  encode_cmd->add_flag("--peak-heatmap", peak_heatmap, "Write the center heatmap as a 0/1 peak indicator");
  GridDType dtype = GridDType::kFloat32;
  encode_cmd->add_option("--dtype", dtype, "Grid value type: float32 or float64")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, GridDType>{{"float32", GridDType::kFloat32}, {"float64", GridDType::kFloat64}}));

  auto* decode_cmd = app.add_subcommand("decode", "Grids to detections with world positions");
  std::string grids_in;
  DecodeOptions dec;
  std::string frame_id = "frame";
  decode_cmd->add_option("--scene", scene_arg, "Reference id (A..E) or scene JSON")->required();
  decode_cmd->add_option("--in", grids_in, "Grid directory")->required()->check(CLI::ExistingDirectory);
  decode_cmd->add_option("--threshold", dec.threshold, "Peak confidence threshold")->check(CLI::Range(0.0, 1.0));
  decode_cmd->add_option("--max-objects", dec.max_objects, "Detection cap")->check(CLI::PositiveNumber);
  decode_cmd->add_option("--frame-id", frame_id, "Frame id of the prediction file");

  // fuse
  auto* fuse_cmd = app.add_subcommand("fuse", "Weighted fusion of five stage outputs");
  std::vector<std::string> fuse_in;
  std::vector<double> fuse_weights;
  fuse_cmd->add_option("--in", fuse_in, "Five grid stems")->required()->expected(5);
  fuse_cmd->add_option("--weights", fuse_weights, "Five weights summing to 1")->expected(5);

  // loss-eval
  auto* loss_cmd = app.add_subcommand("loss-eval", "Per-term losses of prediction grids against annotations");
  std::string pred_grids;
  LossWeights lambdas;
  loss_cmd->add_option("--scene", scene_arg, "Reference id (A..E) or scene JSON")->required();
  loss_cmd->add_option("--pred", pred_grids, "Prediction grid directory")->required()->check(CLI::ExistingDirectory);
  loss_cmd->add_option("--in", ann_in, "Ground-truth annotation JSON")->required();
  loss_cmd->add_option("--stride", stride, "Output stride")->check(CLI::PositiveNumber);
  loss_cmd->add_option("--lambda.c", lambdas.lambda_c, "Heatmap weight");
  loss_cmd->add_option("--lambda.co", lambdas.lambda_co, "Offset weight");
  loss_cmd->add_option("--lambda.v", lambdas.lambda_v, "Vertex weight");
  loss_cmd->add_option("--lambda.s", lambdas.lambda_s, "Dimension weight");
  loss_cmd->add_option("--lambda.proj", lambdas.lambda_proj, "Reprojection weight");
  loss_cmd->add_option("--lambda.iou", lambdas.lambda_iou, "IoU constraint weight");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "AP3D, localization and dimension metrics over a manifest");
  std::string manifest_in, csv_out, scenes_dir;
  std::vector<std::string> scene_files;
  EvalOptions eval_opts;
  bool class_agnostic = false;
  std::optional<double> frame_time;
  eval_cmd->add_option("--in", manifest_in, "Manifest of '<gt> <prediction>' lines")->required();
  eval_cmd->add_option("--iou", eval_opts.thresholds, "IoU thresholds")->check(CLI::Range(1e-9, 1.0));
  eval_cmd->add_option("--scene", scene_files, "Extra scene JSON files");
  eval_cmd->add_option("--scenes-dir", scenes_dir, "Directory of scene JSON files");
  eval_cmd->add_option("--bin-width", eval_opts.bin_width, "Distance bin width in meters")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--csv", csv_out, "Error-vs-distance CSV path");
  eval_cmd->add_option("--frame-time", frame_time, "Seconds per frame, reported as FPS");
  eval_cmd->add_flag("--class-agnostic", class_agnostic, "Match regardless of class");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Synthetic frames with exact ground truth");
  int n_vehicles = 5, n_frames = 1;
  synth_cmd->add_option("--scene", scene_arg, "Reference id (A..E) or scene JSON")->required();
  synth_cmd->add_option("--n", n_vehicles, "Vehicles per frame")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--frames", n_frames, "Frame count; above 1 --out is a directory")
      ->check(CLI::PositiveNumber);

  // augment
  auto* aug_cmd = app.add_subcommand("augment", "Expand a dataset with color, flip and perspective transforms");
  AugmentSpec aug_spec;
  bool combos = false;
  aug_cmd->add_option("--in", manifest_in, "Manifest of annotation files")->required();
  aug_cmd->add_option("--scene", scene_files, "Extra scene JSON files");
  aug_cmd->add_option("--scenes-dir", scenes_dir, "Directory of scene JSON files");
  aug_cmd->add_option("--max-brightness", aug_spec.max_brightness, "Brightness shift bound, 8-bit levels");
  aug_cmd->add_option("--max-contrast", aug_spec.max_contrast, "Relative contrast bound");
  aug_cmd->add_option("--max-saturation", aug_spec.max_saturation, "Relative saturation bound");
  aug_cmd->add_option("--perspective-px", aug_spec.perspective_px, "Corner displacement bound in pixels");
  aug_cmd->add_flag("--combos", combos, "Emit all eight transform combinations instead of four singles");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the annotation service");
  std::string config_in;
  serve_cmd->add_option("--config", config_in, "Server config JSON")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*calibrate) {
      const json doc = read_json(calib_in);
      const auto vp = doc.at("vp");
      const int width = doc.at("image_width").get<int>();
      const int height = doc.at("image_height").get<int>();
      std::vector<GroundMark> marks;
      for (const auto& m : doc.at("marks")) {
        GroundMark g;
        g.a = {m.at("a")[0].get<double>(), m.at("a")[1].get<double>()};
        g.b = {m.at("b")[0].get<double>(), m.at("b")[1].get<double>()};
        g.world_length = m.at("length").get<double>();
        const std::string kind = m.value("kind", "along-road");
        if (kind != "along-road" && kind != "across-road") {
          throw Error(ErrorCode::kParseError, "marks: kind must be along-road or across-road");
        }
        g.kind = kind == "along-road" ? MarkKind::kAlongRoad : MarkKind::kAcrossRoad;
        marks.push_back(g);
      }
      VwlOptions opts;
      opts.tolerance = calib_tol;
      const VwlSolution sol =
          solve_vwl({vp[0].get<double>(), vp[1].get<double>()}, marks, width, height, opts);
      SceneMeta scene;
      scene.id = calib_id.empty() ? fs::path(calib_in).stem().string() : calib_id;
      scene.params = sol.params;
      scene.image_width = width;
      scene.image_height = height;
      if (doc.contains("D_ry")) scene.extent.d_ry = doc["D_ry"].get<double>();
      if (doc.contains("D_rx")) scene.extent.d_rx = doc["D_rx"].get<double>();
      json j = json::parse(scene_to_json(scene));
      j["residual"] = sol.residual;
      emit(out, j.dump(2));
    } else if (*project || *backproject) {
      const SceneMeta scene = resolve_scene(scene_arg);
      const ProjectionMatrix proj = scene.projection();
      const json doc = read_json(points_in);
      json pts = json::array();
      if (*project) {
        const auto& in = doc.at("points_world");
        for (std::size_t i = 0; i < in.size(); ++i) {
          try {
            const auto q = world_to_image(proj, {in[i][0].get<double>(), in[i][1].get<double>(), in[i][2].get<double>()});
            pts.push_back({q.u, q.v});
          } catch (const Error& e) {
            throw Error(e.code(), "points_world[" + std::to_string(i) + "]: " + e.what(), i);
          }
        }
        emit(out, json{{"points_image", pts}}.dump(2));
      } else {
        const auto in = pairs_at(doc, "points_image");
        for (std::size_t i = 0; i < in.size(); ++i) {
          try {
            const auto p = image_to_world(proj, {in[i][0], in[i][1]}, back_z);
            pts.push_back({p.x, p.y, p.z});
          } catch (const Error& e) {
            throw Error(e.code(), "points_image[" + std::to_string(i) + "]: " + e.what(), i);
          }
        }
        emit(out, json{{"points_world", pts}}.dump(2));
      }
    } else if (*encode_cmd) {
      if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "--out: encode needs an output directory");
      const SceneMeta scene = resolve_scene(scene_arg);
      GridConfig cfg;
      cfg.stride = stride;
      TargetMaps maps = encode_frame(scene, load_annotations(ann_in), cfg);
      if (peak_heatmap) binarize_heatmap(maps);
      save_maps(out, maps, dtype);
    } else if (*decode_cmd) {
      const SceneMeta scene = resolve_scene(scene_arg);
      const TargetMaps maps = load_maps(grids_in);
      GridConfig cfg;
      cfg.stride = maps.stride;
      cfg.num_classes = maps.num_classes;
      const auto dets = decode(maps, dec);
      emit(out, frame_to_json(detections_to_frame(dets, scene, cfg, frame_id)));
    } else if (*fuse_cmd) {
      if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "--out: fuse needs an output stem");
      FusionWeights w;
      if (!fuse_weights.empty()) std::copy(fuse_weights.begin(), fuse_weights.end(), w.w.begin());
      std::array<Grid, 5> grids;
      int s = 4;
      for (int i = 0; i < 5; ++i) grids[i] = load_grid(fuse_in[i], &s);
      save_grid(out, weighted_fuse(std::span<const Grid, 5>(grids), w), s);
    } else if (*loss_cmd) {
      lambdas.validate();
      const SceneMeta scene = resolve_scene(scene_arg);
      GridConfig cfg;
      cfg.stride = stride;
      const TargetMaps gt = encode_frame(scene, load_annotations(ann_in), cfg);
      TargetMaps pred = load_maps(pred_grids);
      pred.peaks = gt.peaks;
      const LossComponents c = evaluate_losses(pred, gt, input_mapping(scene, cfg).input_projection);
      const json j{{"focal", c.focal},         {"offset", c.offset},
                   {"vertex", c.vertex},       {"dim", c.dim},
                   {"reprojection", c.reprojection}, {"iou", c.iou},
                   {"total", total_loss(c, lambdas)}};
      emit(out, j.dump(2));
    } else if (*eval_cmd) {
      const auto scenes = scene_table(scene_files, scenes_dir);
      eval_opts.class_aware = !class_agnostic;
      eval_opts.seconds_per_frame = frame_time;
      const EvalReport report = evaluate_manifest(manifest_in, [&](const std::string& id) -> const SceneMeta* {
        const auto it = scenes.find(id);
        return it == scenes.end() ? nullptr : &it->second;
      }, eval_opts);
      emit(out, report_to_json(report));
      if (!csv_out.empty()) write_file_atomic(csv_out, error_curve_csv(report.error_curve));
    } else if (*synth_cmd) {
      const SceneMeta scene = resolve_scene(scene_arg);
      if (n_frames == 1) {
        SynthOptions opts{n_vehicles, seed, 0.5, "frame_0000"};
        emit(out, frame_to_json(synth_scene(scene, opts).second));
      } else {
        if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "--out: several frames need an output directory");
        const fs::path dir = out;
        fs::create_directories(dir);
        save_scene(dir / (scene.id + ".json"), scene);
        std::vector<fs::path> entries;
        std::string pairs;
        for (int i = 0; i < n_frames; ++i) {
          char name[32];
          std::snprintf(name, sizeof(name), "frame_%04d", i);
          SynthOptions opts{n_vehicles, frame_seed(seed, static_cast<std::size_t>(i)), 0.5, name};
          const fs::path file = std::string(name) + ".json";
          save_annotations(dir / file, synth_scene(scene, opts).second);
          entries.push_back(file);
          pairs += file.string() + " " + file.string() + "\n";
        }
        save_manifest(dir / "manifest.txt", entries);
        write_file_atomic(dir / "eval_manifest.txt", pairs);
      }
    } else if (*aug_cmd) {
      if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "--out: augment needs an output directory");
      const auto scenes = scene_table(scene_files, scenes_dir);
      const fs::path dir = out;
      fs::create_directories(dir);
      auto inputs = load_manifest(manifest_in);
      std::vector<std::pair<std::string, FrameAnnotations>> frames;
      for (const auto& p : inputs) frames.emplace_back(p.string(), load_annotations(p));
      // Output order is by frame id regardless of manifest order.
      std::stable_sort(frames.begin(), frames.end(),
                       [](const auto& a, const auto& b) { return a.second.frame_id < b.second.frame_id; });

      // Transform sets, as bit masks over {color jitter, flip, perspective}.
      std::vector<int> sets = {0, 1, 2, 4};
      if (combos) sets = {0, 1, 2, 4, 3, 5, 6, 7};
      const char* tags[] = {"cj", "hf", "pt"};
      std::vector<fs::path> entries;
      std::map<std::string, SceneMeta> written_scenes;
      for (std::size_t fi = 0; fi < frames.size(); ++fi) {
        const auto& [src, frame] = frames[fi];
        const auto sit = scenes.find(frame.scene_id);
        if (sit == scenes.end()) throw Error(ErrorCode::kInvalidArgument, src + ": unknown scene '" + frame.scene_id + "'");
        const SceneMeta& scene = sit->second;
        aug_spec.validate(scene.image_width);
        std::optional<Image> image;
        if (!frame.image.empty()) {
          const fs::path ip = fs::path(frame.image).is_absolute() ? fs::path(frame.image)
                                                                   : fs::path(src).parent_path() / frame.image;
          if (ip.extension() == ".ppm" && fs::exists(ip)) image = load_ppm(ip);
        }
        std::mt19937_64 rng(frame_seed(seed, fi));
        // Draw every transform once per frame so combinations share parameters.
        const ColorJitter jitter = sample_jitter(aug_spec, rng);
        const Mat3 warp = sample_perspective(aug_spec, scene.image_width, scene.image_height, rng);

        for (int set : sets) {
          FrameAnnotations f = frame;
          f.revision = 0;
          std::optional<Image> img = image;
          SceneMeta sc = scene;
          std::string suffix;
          for (int t = 0; t < 3; ++t) {
            if (set & (1 << t)) suffix += std::string("_") + tags[t];
          }
          if (set & 1) {
            if (img) img = color_jitter(*img, jitter);
          }
          if (set & 2) {
            f.objects = hflip(f.objects, sc.image_width);
            sc.params = mirror_params(sc.params, sc.image_width);
            sc.id += "_hf";
            if (img) img = hflip_image(*img);
          }
          if (set & 4) {
            f.objects = perspective_warp(f.objects, warp);
            if (img) img = warp_image(*img, warp);
          }
          f.frame_id = frame.frame_id + suffix;
          f.scene_id = sc.id;
          if (img) {
            const std::string image_name = f.frame_id + ".ppm";
            save_ppm(dir / image_name, *img);
            f.image = image_name;
          } else if (!f.image.empty()) {
            f.image.clear();
          }
          if (sc.id != scene.id) written_scenes[sc.id] = sc;
          const fs::path file = f.frame_id + ".json";
          save_annotations(dir / file, f);
          entries.push_back(file);
        }
        written_scenes[scene.id] = scene;
      }
      for (const auto& [id, sc] : written_scenes) save_scene(dir / ("scene_" + id + ".json"), sc);
      save_manifest(dir / "manifest.txt", entries);
      std::cout << json{{"frames_in", frames.size()}, {"frames_out", entries.size()}}.dump() << '\n';
    } else if (*serve_cmd) {
      const ServerConfig cfg = ServerConfig::load(config_in);
      if (!run_server(cfg)) {
        std::cerr << "roadloc: cannot listen on " << cfg.host << ':' << cfg.port << '\n';
        return kExitIo;
      }
    }
  } catch (const Error& e) {
    std::cerr << "roadloc: " << to_string(e.code()) << ": " << e.what() << '\n';
    return e.code() == ErrorCode::kIoError ? kExitIo : kExitValidation;
  } catch (const json::exception& e) {
    std::cerr << "roadloc: invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "roadloc: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}
