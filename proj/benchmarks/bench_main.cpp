#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "kincal/geomfilter.hpp"
#include "kincal/kdtree.hpp"
#include "kincal/matching.hpp"
#include "kincal/optimizer.hpp"
#include "kincal/simulator.hpp"

using namespace kincal;

namespace {

std::vector<Eigen::Vector3d> random_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Eigen::Vector3d> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  return pts;
}

// A few noisy desk frames shared by the pipeline benchmarks.
struct DeskFrames {
  KinematicModel truth = reference_arm();
  std::vector<ScanDataset> datasets;

  explicit DeskFrames(std::size_t views, std::size_t side) {
    SensorSpec spec;
    spec.rows = spec.cols = side;
    spec.fov_x = 1.31;
    spec.fov_y = 1.13;
    spec.min_range = 0.2;
    spec.noise = {0.0005, 0.0};
    const auto poses = plan_view_poses(default_desk_scene(), truth, spec, views, 3);
    datasets = simulate_frames(default_desk_scene(), truth, spec, poses, 4);
  }
};

}  // namespace

static void BM_KdTreeBuild(benchmark::State& state) {
  const auto pts = random_points(std::size_t(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(KdTree(pts));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KdTreeBuild)->Arg(1 << 12)->Arg(1 << 16);

static void BM_KdTreeQuery(benchmark::State& state) {
  const auto pts = random_points(std::size_t(state.range(0)), 1);
  const auto queries = random_points(4096, 2);
  const KdTree tree(pts);
  for (auto _ : state)
    for (const auto& q : queries) benchmark::DoNotOptimize(tree.nearest(q));
  state.SetItemsProcessed(state.iterations() * std::int64_t(queries.size()));
}
BENCHMARK(BM_KdTreeQuery)->Arg(1 << 12)->Arg(1 << 16);

static void BM_ForwardKinematicsJacobian(benchmark::State& state) {
  const KinematicModel model = reference_arm();
  const JointVector q = JointVector::LinSpaced(7, -1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(forward_kinematics_jacobian(model, q));
}
BENCHMARK(BM_ForwardKinematicsJacobian);

static void BM_FilterCloud(benchmark::State& state) {
  const DeskFrames frames(1, std::size_t(state.range(0)));
  const ProjectedCloud pc = project_to_base(frames.datasets[0], frames.truth);
  for (auto _ : state) benchmark::DoNotOptimize(filter_cloud(pc, FilterConfig{}));
  state.SetItemsProcessed(state.iterations() * std::int64_t(pc.size()));
}
BENCHMARK(BM_FilterCloud)->Arg(64)->Arg(160);

static void BM_MatchAll(benchmark::State& state) {
  const DeskFrames frames(6, 64);
  std::vector<FilteredCloud> clouds;
  for (std::size_t d = 0; d < frames.datasets.size(); ++d)
    clouds.push_back(filter_cloud(project_to_base(frames.datasets[d], frames.truth), FilterConfig{}, std::uint32_t(d)));
  for (auto _ : state) benchmark::DoNotOptimize(match_all(clouds));
}
BENCHMARK(BM_MatchAll)->Unit(benchmark::kMillisecond);

static void BM_NormalEquations(benchmark::State& state) {
  const DeskFrames frames(6, 64);
  std::vector<FilteredCloud> clouds;
  for (std::size_t d = 0; d < frames.datasets.size(); ++d)
    clouds.push_back(filter_cloud(project_to_base(frames.datasets[d], frames.truth), FilterConfig{}, std::uint32_t(d)));
  const MatchSet ms = validate_matches(match_all(clouds), 0.02, 0.8);
  const BundleProblem problem(frames.datasets, ms);
  const auto free = ParamMask::defaults_for(frames.truth).free_indices();
  for (auto _ : state) benchmark::DoNotOptimize(problem.normal_equations(frames.truth, free));
  state.counters["terms"] = double(problem.size());
}
BENCHMARK(BM_NormalEquations)->Unit(benchmark::kMillisecond);

static void BM_CalibrateDesk(benchmark::State& state) {
  const DeskFrames frames(6, 48);
  const KinematicModel init =
      perturb_model(frames.truth, ParamMask::defaults_for(frames.truth), 0.003, 0.002, 5);
  CalibrationConfig cfg;
  cfg.i_max = 10;
  for (auto _ : state) benchmark::DoNotOptimize(calibrate(frames.datasets, init, cfg));
}
BENCHMARK(BM_CalibrateDesk)->Unit(benchmark::kMillisecond)->Iterations(1);
BENCHMARK_MAIN();
