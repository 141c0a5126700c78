#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "kincal/errors.hpp"
#include "kincal/model_io.hpp"
#include "kincal/ply.hpp"
#include "kincal/presets.hpp"
#include "kincal/report_io.hpp"
#include "kincal/sim_io.hpp"
#include "kincal/simulator.hpp"
#include "support/temp_dir.hpp"

using namespace kincal;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(ModelIo, RoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  KinematicModel arm = perturb_model(reference_arm(), ParamMask(34, true), 0.1, 0.01, rng());
  arm.segments[2].joint = JointKind::Prismatic;
  arm.segments[2].x = arm.segments[2].y = 0;
  ParamMask mask = ParamMask::defaults_for(arm);
  mask.set(30, false);
  const ModelFile back = parse_model(format_model(arm, mask));
  EXPECT_EQ(back.model, arm);
  EXPECT_EQ(back.mask, mask);

  test_support::TempDir tmp;
  save_model(tmp.path() / "m.json", arm, mask);
  const ModelFile loaded = load_model(tmp.path() / "m.json");
  EXPECT_EQ(loaded.model, arm);
  EXPECT_EQ(loaded.mask, mask);
}

TEST(ModelIo, MissingMaskFallsBackToDefaults) {
  const ModelFile f = parse_model(R"({"segments": [{"alpha": 0, "beta": 0}, {"alpha": 1.5, "beta": 0, "x": 0.2}],
                                      "ee": {"alpha": 0, "beta": 0, "gamma": 0, "x": 0, "y": 0, "z": 0.1}})");
  ASSERT_EQ(f.model.joint_count(), 2u);
  EXPECT_EQ(f.model.segments[1].x, 0.2);
  EXPECT_EQ(f.mask, ParamMask::defaults_for(f.model));
}

TEST(ModelIo, Errors) {
  EXPECT_THROW(parse_model("[1, 2]"), ParseError);
  EXPECT_THROW(parse_model("{"), ParseError);
  EXPECT_THROW(parse_model(R"({"segments": []})"), ParseError);
  EXPECT_THROW(parse_model(R"({"format": "other/2", "ee": {}})"), ParseError);
  EXPECT_THROW(parse_model(R"({"segments": [{"joint": "ball", "alpha": 0, "beta": 0}],
                              "ee": {"alpha": 0, "beta": 0, "gamma": 0, "x": 0, "y": 0, "z": 0}})"),
               ParseError);
  EXPECT_THROW(parse_model(R"({"segments": [{"joint": "prismatic", "alpha": 0, "beta": 0, "x": 0.1}],
                              "ee": {"alpha": 0, "beta": 0, "gamma": 0, "x": 0, "y": 0, "z": 0}})"),
               ParseError);
  EXPECT_THROW(parse_model(R"({"ee": {"alpha": 0, "beta": 0, "gamma": 0, "x": 0, "y": 0, "z": 0, "mask": [1, 1]}})"),
               ParseError);
  EXPECT_THROW(parse_model(R"({"ee": {"alpha": "a", "beta": 0, "gamma": 0, "x": 0, "y": 0, "z": 0}})"), ParseError);
  EXPECT_THROW(load_model("/nonexistent/model.json"), IoError);
  EXPECT_THROW(format_model(reference_arm(), ParamMask(3, true)), DimensionError);
}

TEST(ConfigIo, ParseOverridesAndRoundTrip) {
  const CalibrationConfig c = parse_config(R"({"n": 3, "m": 1, "g_min": 0.6, "d_max": 0.01, "f_min": 0.9,
      "epsilon": 1e-5, "i_max": 7, "orientation": "origin", "center_shift": true,
      "anchored_datasets": [0, 2], "threads": 4, "lm": {"max_iterations": 9, "initial_lambda": 0.01}})");
  EXPECT_EQ(c.filter.half_rows, 3);
  EXPECT_EQ(c.filter.half_cols, 1);
  EXPECT_EQ(c.filter.g_min, 0.6);
  EXPECT_EQ(c.d_max, 0.01);
  EXPECT_EQ(c.f_min, 0.9);
  EXPECT_EQ(c.epsilon, 1e-5);
  EXPECT_EQ(c.i_max, 7);
  EXPECT_EQ(c.filter.orientation, NormalOrientation::OriginPosition);
  EXPECT_TRUE(c.center_shift);
  EXPECT_EQ(c.anchored_datasets, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(c.threads, 4);
  EXPECT_EQ(c.lm.max_iterations, 9);
  EXPECT_EQ(c.lm.initial_lambda, 0.01);
  EXPECT_EQ(c.lm.lambda_increase, 10.0);

  const CalibrationConfig back = parse_config(format_config(c));
  EXPECT_EQ(format_config(back), format_config(c));

  CalibrationConfig base;
  base.d_max = 0.5;
  EXPECT_EQ(parse_config(R"({"f_min": 0.1})", "x", base).d_max, 0.5);
}

TEST(ConfigIo, Errors) {
  EXPECT_THROW(parse_config(R"({"nn": 1})"), ParseError);
  EXPECT_THROW(parse_config(R"({"n": 1.5})"), ParseError);
  EXPECT_THROW(parse_config(R"({"orientation": "up"})"), ParseError);
  EXPECT_THROW(parse_config(R"({"center_shift": 1})"), ParseError);
  EXPECT_THROW(parse_config(R"({"anchored_datasets": [-1]})"), ParseError);
  EXPECT_THROW(parse_config(R"({"lm": 3})"), ParseError);
  EXPECT_THROW(parse_config(R"({"d_max": -1})"), Error);
  EXPECT_THROW(parse_config("nope"), ParseError);
}

TEST(ReportIo, FilesAndCsv) {
  CalibrationReport r;
  r.model = reference_arm();
  r.mask = ParamMask::defaults_for(r.model);
  r.scale = 0.75;
  r.converged = true;
  r.wall_seconds = 1.5;
  IterationRecord it;
  it.iteration = 1;
  it.cost = 0.125;
  it.initial_cost = 0.5;
  it.matches = 1234;
  it.delta = 3e-5;
  it.inner_iterations = 3;
  it.inner_costs = {0.5, 0.2, 0.125};
  it.pairs = {{0, 1, 1000}, {0, 2, 234}};
  r.iterations = {it};

  const std::string csv = format_iterations_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "iteration,cost,matches,delta");
  EXPECT_NE(csv.find("1,0.125,1234,"), std::string::npos) << csv;

  const auto doc = nlohmann::json::parse(format_report(r));
  EXPECT_EQ(doc.at("converged"), true);
  EXPECT_EQ(doc.at("iterations"), 1);
  EXPECT_EQ(doc.at("scale"), 0.75);
  EXPECT_EQ(doc.at("history").size(), 1u);
  EXPECT_EQ(doc.at("history")[0].at("matches"), 1234);

  test_support::TempDir tmp;
  save_calibration(tmp.path() / "out", r);
  const ModelFile m = load_model(tmp.path() / "out" / "model.json");
  EXPECT_EQ(m.model, r.model);
  EXPECT_EQ(m.mask, r.mask);
  EXPECT_EQ(slurp(tmp.path() / "out" / "iterations.csv"), csv);
  EXPECT_TRUE(std::filesystem::exists(tmp.path() / "out" / "report.json"));
}

TEST(SceneIo, Primitives) {
  const Scene s = parse_scene(R"({"primitives": [
      {"type": "plane", "point": [0, 0, -0.5], "normal": [0, 0, 2]},
      {"type": "sphere", "center": [0.7, 0, -0.3], "radius": 0.1},
      {"type": "box", "center": [0.5, 0, -0.4], "half_extents": [0.1, 0.1, 0.05],
       "rotation": [[0, -1, 0], [1, 0, 0], [0, 0, 1]]},
      {"type": "mesh", "vertices": [[0, 0, 0], [1, 0, 0], [0, 1, 0]], "faces": [[0, 1, 2]]}]})");
  ASSERT_EQ(s.primitives().size(), 4u);
  EXPECT_EQ(std::get<Plane>(s.primitives()[0]).normal, Eigen::Vector3d::UnitZ());
  EXPECT_EQ(std::get<Box>(s.primitives()[2]).rotation(0, 1), -1.0);
  const Scene desk = parse_scene(R"({"primitives": [{"type": "desk"}]})");
  EXPECT_EQ(desk.primitives().size(), default_desk_scene().primitives().size());
}

TEST(SceneIo, Errors) {
  EXPECT_THROW(parse_scene(R"({"primitives": [{"type": "cone"}]})"), ParseError);
  EXPECT_THROW(parse_scene(R"({"primitives": [{"type": "sphere", "center": [0, 0], "radius": 1}]})"), ParseError);
  EXPECT_THROW(parse_scene(R"({"primitives": [{"type": "sphere", "center": [0, 0, 0], "radius": -1}]})"), ParseError);
  EXPECT_THROW(parse_scene(R"({"primitives": [{"type": "mesh", "vertices": [[0, 0, 0]], "faces": [[0, 1, 2]]}]})"),
               ParseError);
  try {
    load_scene("/no/such/scene.json");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("/no/such/scene.json"), std::string::npos);
  }
}

TEST(TrajectoryIo, LegsPosesAndRoundTrip) {
  const TrajectorySpec legs = parse_trajectory(R"({"legs": [{"start": [0, 1], "end": [1, 1], "duration": 2},
                                                           {"start": [1, 1], "end": [1, 0], "duration": 0.5}]})");
  ASSERT_EQ(legs.legs.size(), 2u);
  EXPECT_DOUBLE_EQ(legs.duration(), 2.5);
  const TrajectorySpec back = parse_trajectory(format_trajectory(legs));
  ASSERT_EQ(back.legs.size(), 2u);
  EXPECT_EQ(back.legs[1].end, legs.legs[1].end);
  EXPECT_EQ(back.legs[0].duration, 2.0);

  const TrajectorySpec poses = parse_trajectory(R"({"poses": [[0.1, 0.2], [0.3, 0.4]]})");
  ASSERT_EQ(poses.poses.size(), 2u);
  EXPECT_EQ(parse_trajectory(format_trajectory(poses)).poses[1], poses.poses[1]);

  EXPECT_THROW(parse_trajectory(R"({"legs": [{"start": [0], "end": [1]}]})"), ParseError);
  EXPECT_THROW(parse_trajectory(R"({"legs": [{"start": [0], "end": [1], "duration": 1}],
                                    "poses": [[0]]})"),
               ParseError);
  EXPECT_THROW(parse_trajectory(R"({"poses": [[0.1, "x"]]})"), ParseError);
}

TEST(SensorIo, PresetWithOverrides) {
  const SensorSpec s = parse_sensor(R"({"preset": "kinect_azure", "rows": 10, "cols": 12, "sigma_abs": 0.001,
                                       "fov_x_deg": 60, "min_range": 0.25})");
  EXPECT_EQ(s.kind, SensorKind::DepthCamera);
  EXPECT_EQ(s.rows, 10u);
  EXPECT_EQ(s.cols, 12u);
  EXPECT_EQ(s.noise.sigma_abs, 0.001);
  EXPECT_EQ(s.noise.sigma_rel, find_preset("kinect_azure").spec.noise.sigma_rel);
  EXPECT_NEAR(s.fov_x, M_PI / 3, 1e-15);
  EXPECT_EQ(s.min_range, 0.25);
  EXPECT_EQ(parse_sensor(R"({"preset": "hokuyo_utm30lx"})").kind, SensorKind::SingleBeamLidar);
  EXPECT_THROW(parse_sensor(R"({"preset": "nope"})"), Error);
  EXPECT_THROW(parse_sensor(R"({"rows": -3})"), ParseError);
  EXPECT_THROW(parse_sensor(R"({"kind": "sonar"})"), ParseError);
  EXPECT_THROW(parse_sensor(R"({"min_range": 3, "max_range": 1})"), ParseError);
}

TEST(Presets, TableValues) {
  ASSERT_EQ(sensor_presets().size(), 4u);
  const auto& k = find_preset("kinect_azure");
  EXPECT_EQ(k.spec.noise.sigma_abs, 0.00253);
  EXPECT_EQ(k.spec.noise.sigma_rel, 0.0021);
  EXPECT_EQ(k.config.d_max, 0.020);
  const auto& w = find_preset("wenglor_mlsl236");
  EXPECT_EQ(w.spec.kind, SensorKind::LineScanner);
  EXPECT_EQ(w.spec.noise.sigma_abs, 0.0002);
  try {
    find_preset("foo");
    FAIL();
  } catch (const ConfigurationError& e) {
    EXPECT_NE(std::string(e.what()).find("kinect_azure"), std::string::npos);
  }
  EXPECT_EQ(format_config(default_calibration_config()), format_config(k.config));
}

TEST(Ply, RoundTripWithAndWithoutColor) {
  test_support::TempDir tmp;
  std::vector<PlyVertex> v = {{{0.5, -1.25, 2.0}, std::array<std::uint8_t, 3>{255, 0, 7}},
                              {{1e-3, 0, 3}, std::array<std::uint8_t, 3>{1, 2, 3}}};
  write_ply(tmp.path() / "c.ply", v);
  const auto back = read_ply(tmp.path() / "c.ply");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_NEAR((back[0].position - v[0].position).norm(), 0.0, 1e-6);
  EXPECT_EQ(*back[0].color, *v[0].color);

  v[1].color.reset();
  const std::string text = format_ply(v);
  EXPECT_EQ(text.find("red"), std::string::npos);
  EXPECT_NE(text.find("element vertex 2"), std::string::npos);
  write_ply(tmp.path() / "p.ply", v);
  const auto plain = read_ply(tmp.path() / "p.ply");
  ASSERT_EQ(plain.size(), 2u);
  EXPECT_FALSE(plain[0].color);
}

TEST(Ply, VerticesFromCloud) {
  ProjectedCloud pc;
  pc.rows = 1;
  pc.cols = 3;
  pc.points = {{0, 0, 1}, {0, 0, 2}, {0, 0, 3}};
  pc.origins.assign(3, Eigen::Vector3d::Zero());
  pc.valid = {1, 0, 1};
  const auto v = ply_vertices(pc, dataset_color(2));
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[1].position.z(), 3.0);
  EXPECT_EQ(*v[0].color, dataset_color(2));
  EXPECT_NE(dataset_color(0), dataset_color(1));
}
