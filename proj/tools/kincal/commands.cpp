#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI/CLI.hpp>
#include <nlohmann/json.hpp>

#include "kincal/dataset.hpp"
#include "kincal/errors.hpp"
#include "kincal/model_io.hpp"
#include "kincal/optimizer.hpp"
#include "kincal/parallel.hpp"
#include "kincal/ply.hpp"
#include "kincal/presets.hpp"
#include "kincal/report_io.hpp"
#include "kincal/sim_io.hpp"
#include "kincal/simulator.hpp"

namespace kincal::cli {
namespace {

namespace fs = std::filesystem;

bool is_dataset_dir(const fs::path& p) { return fs::is_regular_file(p / "meta"); }

// A path is either a dataset directory or a directory of dataset directories.
std::vector<fs::path> expand_datasets(const std::vector<std::string>& args) {
  std::vector<fs::path> out;
  for (const auto& a : args) {
    const fs::path p(a);
    if (!fs::exists(p)) throw IoError("cannot open " + p.string());
    if (is_dataset_dir(p)) {
      out.push_back(p);
      continue;
    }
    std::vector<fs::path> found;
    if (fs::is_directory(p))
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_directory() && is_dataset_dir(e.path())) found.push_back(e.path());
    if (found.empty()) throw IoError("no dataset found at " + p.string());
    std::sort(found.begin(), found.end());
    out.insert(out.end(), found.begin(), found.end());
  }
  return out;
}

std::vector<ScanDataset> load_all(const std::vector<fs::path>& dirs) {
  std::vector<ScanDataset> out;
  out.reserve(dirs.size());
  for (const auto& d : dirs) out.push_back(load_dataset(d));
  return out;
}

std::string scan_name(std::size_t k) {
  std::ostringstream s;
  s << "scan_" << std::setw(3) << std::setfill('0') << k;
  return s.str();
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError("cannot create " + p.string() + ": " + ec.message());
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f || !(f << text)) throw IoError("cannot write " + p.string());
}

struct Common {
  int threads = 0;
};

struct SimulateArgs {
  std::string scene, model, sensor, preset = "kinect_azure", trajectory, out;
  std::optional<std::size_t> rows, cols;
  std::optional<double> sigma_abs, sigma_rel;
  std::size_t views = 14;
  std::uint64_t seed = 1;
};

int cmd_simulate(const SimulateArgs& a, const Common& c, std::ostream& out) {
  const Scene scene = a.scene.empty() ? default_desk_scene() : load_scene(a.scene);
  const KinematicModel model = a.model.empty() ? reference_arm() : load_model(a.model).model;
  SensorSpec spec = a.sensor.empty() ? find_preset(a.preset).spec : load_sensor(a.sensor);
  if (a.rows) spec.rows = *a.rows;
  if (a.cols) spec.cols = *a.cols;
  if (a.sigma_abs) spec.noise.sigma_abs = *a.sigma_abs;
  if (a.sigma_rel) spec.noise.sigma_rel = *a.sigma_rel;
  spec.check();

  TrajectorySpec traj;
  if (!a.trajectory.empty()) {
    traj = load_trajectory(a.trajectory);
  } else if (spec.kind == SensorKind::DepthCamera) {
    traj.poses = plan_view_poses(scene, model, spec, a.views, a.seed);
  } else {
    throw ConfigurationError("line scanners and LiDARs need --trajectory");
  }

  ensure_dir(a.out);
  std::vector<ScanDataset> sets;
  if (spec.kind == SensorKind::DepthCamera) {
    sets = simulate_frames(scene, model, spec, traj.poses, a.seed, c.threads);
  } else {
    sets.push_back(simulate_dataset(scene, model, spec, traj, a.seed, c.threads));
  }
  std::size_t total = 0, valid = 0;
  for (std::size_t k = 0; k < sets.size(); ++k) {
    save_dataset(sets[k], fs::path(a.out) / scan_name(k));
    total += sets[k].size();
    valid += sets[k].valid_count();
    out << scan_name(k) << ": " << sets[k].rows << "x" << sets[k].cols << " cells, "
        << sets[k].valid_count() << " valid\n";
  }
  if (a.trajectory.empty()) write_file(fs::path(a.out) / "trajectory.json", format_trajectory(traj));
  out << sets.size() << " dataset(s), " << total << " points, " << valid << " valid\n";
  return kExitOk;
}

struct CalibrateArgs {
  std::vector<std::string> datasets;
  std::string model, config, preset, out;
  std::optional<int> n, m, i_max;
  std::optional<double> g_min, d_max, f_min, epsilon;
  std::string orientation;
  bool center_shift = false;
  std::vector<std::size_t> anchors;
  bool quiet = false;
};

int cmd_calibrate(const CalibrateArgs& a, const CLI::App& sub, const Common& c,
                  std::ostream& out) {
  const std::vector<fs::path> dirs = expand_datasets(a.datasets);
  if (dirs.size() < 2)
    throw ConfigurationError("calibrate needs at least two datasets, got " +
                             std::to_string(dirs.size()));
  const ModelFile init = load_model(a.model);

  // defaults < preset < config file < explicit flags
  CalibrationConfig cfg = a.preset.empty() ? default_calibration_config() : find_preset(a.preset).config;
  cfg.mask = init.mask;
  if (!a.config.empty()) cfg = load_config(a.config, cfg);
  if (a.n) cfg.filter.half_rows = *a.n;
  if (a.m) cfg.filter.half_cols = *a.m;
  if (a.g_min) cfg.filter.g_min = *a.g_min;
  if (a.d_max) cfg.d_max = *a.d_max;
  if (a.f_min) cfg.f_min = *a.f_min;
  if (a.epsilon) cfg.epsilon = *a.epsilon;
  if (a.i_max) cfg.i_max = *a.i_max;
  if (!a.orientation.empty())
    cfg.filter.orientation =
        a.orientation == "origin" ? NormalOrientation::OriginPosition : NormalOrientation::ViewDirection;
  if (sub.count("--center-shift")) cfg.center_shift = a.center_shift;
  if (sub.count("--anchor")) cfg.anchored_datasets = a.anchors;
  if (sub.count("--threads") || cfg.threads <= 0) cfg.threads = resolve_threads(c.threads);
  cfg.check();

  const std::vector<ScanDataset> sets = load_all(dirs);
  if (!a.quiet) out << "calibrating " << sets.size() << " datasets, " << cfg.mask->free_count()
                    << " free parameters\n";
  const CalibrationReport report = calibrate(sets, init.model, cfg, [&](const IterationRecord& r) {
    if (a.quiet) return;
    out << "iteration " << r.iteration << ": cost " << r.cost << ", matches " << r.matches
        << ", delta " << r.delta << "\n";
    out.flush();
  });
  save_calibration(a.out, report);
  write_file(fs::path(a.out) / "config.json", format_config(cfg));
  out << (report.converged ? "converged" : "not converged") << " after "
      << report.iterations.size() << " iteration(s) in " << report.wall_seconds << " s\n";
  return report.converged ? kExitOk : kExitNotConverged;
}

struct EvaluateArgs {
  std::string found, truth, probes, out;
  std::size_t probe_count = 500;
  std::uint64_t seed = 1;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const ModelFile found = load_model(a.found);
  const ModelFile truth = load_model(a.truth);
  std::vector<JointVector> probes;
  if (!a.probes.empty()) {
    probes = load_trajectory(a.probes).poses;
    if (probes.empty()) throw ConfigurationError("probe file has no 'poses'");
  } else {
    probes = random_joint_samples(truth.model, a.probe_count, a.seed);
  }
  const PoseError e = evaluate_against_truth(found.model, truth.model, probes, truth.mask);
  out << std::setprecision(9) << "probes " << probes.size() << "\norientation_deg "
      << e.orientation_deg << "\nposition_mm " << e.position_mm << "\nmax_orientation_deg "
      << e.max_orientation_deg << "\nmax_position_mm " << e.max_position_mm << "\n";
  if (!a.out.empty()) {
    nlohmann::json j = {{"probes", probes.size()},
                        {"orientation_deg", e.orientation_deg},
                        {"position_mm", e.position_mm},
                        {"max_orientation_deg", e.max_orientation_deg},
                        {"max_position_mm", e.max_position_mm}};
    write_file(a.out, j.dump(2) + "\n");
  }
  return kExitOk;
}

struct ExportArgs {
  std::vector<std::string> datasets;
  std::string model, out;
  bool color = false;
  bool separate = false;
};

int cmd_export(const ExportArgs& a, std::ostream& out) {
  const std::vector<fs::path> dirs = expand_datasets(a.datasets);
  const KinematicModel model = load_model(a.model).model;
  std::vector<PlyVertex> all;
  if (a.separate) ensure_dir(a.out);
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    const ScanDataset ds = load_dataset(dirs[k]);
    std::optional<std::array<std::uint8_t, 3>> color;
    if (a.color) color = dataset_color(k);
    const auto verts = ply_vertices(project_to_base(ds, model), color);
    if (a.separate) {
      const fs::path p = fs::path(a.out) / (dirs[k].filename().string() + ".ply");
      write_ply(p, verts);
      out << p.string() << ": " << verts.size() << " vertices\n";
    } else {
      all.insert(all.end(), verts.begin(), verts.end());
    }
  }
  if (!a.separate) {
    write_ply(a.out, all);
    out << a.out << ": " << all.size() << " vertices\n";
  }
  return kExitOk;
}

struct PerturbArgs {
  std::string model, out;
  double rot_deg = 2.0, trans_mm = 5.0;
  std::uint64_t seed = 1;
};

int cmd_perturb(const PerturbArgs& a, std::ostream& out) {
  const ModelFile m = load_model(a.model);
  const KinematicModel p =
      perturb_model(m.model, m.mask, a.rot_deg * M_PI / 180.0, a.trans_mm / 1000.0, a.seed);
  save_model(a.out, p, m.mask);
  out << "wrote " << a.out << "\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kinematic self-calibration from overlapping range scans"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--threads", common.threads, "worker threads (0 = hardware concurrency)")
      ->check(CLI::NonNegativeNumber);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "ray-cast synthetic scans through a kinematic model");
  s->add_option("--scene", sim.scene, "scene JSON (default: built-in desk scene)");
  s->add_option("--model", sim.model, "ground-truth model JSON (default: reference arm)");
  s->add_option("--sensor", sim.sensor, "sensor JSON");
  s->add_option("--preset", sim.preset, "sensor preset when no --sensor is given")->capture_default_str();
  s->add_option("--trajectory", sim.trajectory, "trajectory JSON (legs or static poses)");
  s->add_option("--views", sim.views, "planned depth-camera views without --trajectory")->capture_default_str();
  s->add_option("--rows", sim.rows);
  s->add_option("--cols", sim.cols);
  s->add_option("--sigma-abs", sim.sigma_abs, "range noise, meters");
  s->add_option("--sigma-rel", sim.sigma_rel, "range noise per meter of range");
  s->add_option("--seed", sim.seed)->capture_default_str();
  s->add_option("--out", sim.out, "output directory")->required();
  s->add_option("--threads", common.threads);

  CalibrateArgs cal;
  auto* c = app.add_subcommand("calibrate", "estimate kinematic parameters from datasets");
  c->add_option("--datasets", cal.datasets, "dataset directories (or parents of them)")
      ->required()
      ->expected(1, -1);
  c->add_option("--model", cal.model, "initial model JSON; its mask selects free parameters")->required();
  c->add_option("--config", cal.config, "calibration config JSON");
  c->add_option("--preset", cal.preset, "start from a sensor preset's thresholds");
  c->add_option("--out", cal.out, "output directory")->required();
  c->add_option("--n", cal.n, "window half rows");
  c->add_option("--m", cal.m, "window half cols");
  c->add_option("--g-min", cal.g_min);
  c->add_option("--d-max", cal.d_max, "meters");
  c->add_option("--f-min", cal.f_min);
  c->add_option("--epsilon", cal.epsilon);
  c->add_option("--i-max", cal.i_max);
  c->add_option("--orientation", cal.orientation)->check(CLI::IsMember({"view", "origin"}));
  c->add_flag("--center-shift", cal.center_shift);
  c->add_option("--anchor", cal.anchors, "datasets taken as already in the base frame");
  c->add_flag("--quiet", cal.quiet);
  c->add_option("--threads", common.threads);

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "compare a model against ground truth");
  e->add_option("--found", ev.found)->required();
  e->add_option("--truth", ev.truth)->required();
  e->add_option("--probes", ev.probes, "JSON with 'poses'");
  e->add_option("--probe-count", ev.probe_count, "random probes without --probes")->capture_default_str();
  e->add_option("--seed", ev.seed)->capture_default_str();
  e->add_option("--out", ev.out, "metrics JSON");

  ExportArgs ex;
  auto* x = app.add_subcommand("export-ply", "project datasets through a model into PLY");
  x->add_option("--datasets", ex.datasets)->required()->expected(1, -1);
  x->add_option("--model", ex.model)->required();
  x->add_option("--out", ex.out, "PLY file, or directory with --separate")->required();
  x->add_flag("--color", ex.color, "color vertices per dataset");
  x->add_flag("--separate", ex.separate, "one file per dataset");

  PerturbArgs pe;
  auto* p = app.add_subcommand("perturb", "add uniform noise to a model's free parameters");
  p->add_option("--model", pe.model)->required();
  p->add_option("--out", pe.out)->required();
  p->add_option("--rot-deg", pe.rot_deg)->capture_default_str();
  p->add_option("--trans-mm", pe.trans_mm)->capture_default_str();
  p->add_option("--seed", pe.seed)->capture_default_str();

  std::string ref_out;
  auto* r = app.add_subcommand("reference-model", "write the built-in 7-joint reference arm");
  r->add_option("--out", ref_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex_) {
    const int code = app.exit(ex_, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*s) return cmd_simulate(sim, common, out);
    if (*c) return cmd_calibrate(cal, *c, common, out);
    if (*e) return cmd_evaluate(ev, out);
    if (*x) return cmd_export(ex, out);
    if (*p) return cmd_perturb(pe, out);
    if (*r) {
      const KinematicModel m = reference_arm();
      save_model(ref_out, m, ParamMask::defaults_for(m));
      out << "wrote " << ref_out << "\n";
      return kExitOk;
    }
  } catch (const CalibrationError& ex_) {
    err << "error: calibration failed: " << ex_.what() << "\n";
    return kExitCalibrationFailed;
  } catch (const SingularSystemError& ex_) {
    err << "error: calibration failed: " << ex_.what() << "\n";
    return kExitCalibrationFailed;
  } catch (const Error& ex_) {
    err << "error: " << ex_.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& ex_) {
    err << "error: unexpected: " << ex_.what() << "\n";
    return kExitUnexpected;
  }
  return kExitUnexpected;
}

}  // namespace kincal::cli
