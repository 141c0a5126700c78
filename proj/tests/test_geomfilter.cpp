#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "kincal/errors.hpp"
#include "kincal/geomfilter.hpp"
#include "support/grids.hpp"
#include "support/oracles.hpp"

using namespace kincal;
using test_support::grid_cloud;

namespace {

const Eigen::Vector3d kAbove(0.3, -0.2, 10.0);

ProjectedCloud plane_z(std::size_t rows, std::size_t cols, double c) {
  return grid_cloud(rows, cols, [c](double i, double j) { return Eigen::Vector3d(0.01 * j, 0.01 * i, c); },
                    kAbove);
}

// Bumpy but smooth sheet, non-uniform spacing.
ProjectedCloud wavy(std::size_t rows, std::size_t cols) {
  return grid_cloud(
      rows, cols,
      [](double i, double j) {
        const double x = 0.02 * j + 0.001 * j * j, y = 0.015 * i;
        return Eigen::Vector3d(x, y, 0.1 * std::sin(3 * x) * std::cos(4 * y) + 0.3 * x);
      },
      kAbove);
}

NormalGrid grid_of(std::size_t rows, std::size_t cols, const Eigen::Vector3d& n) {
  NormalGrid g;
  g.rows = rows;
  g.cols = cols;
  g.normals.assign(rows * cols, n);
  return g;
}

}  // namespace

TEST(EstimateNormal, PlaneZ) {
  const ProjectedCloud pc = plane_z(6, 7, 2.5);
  for (std::size_t i = 1; i + 1 < pc.rows; ++i)
    for (std::size_t j = 1; j + 1 < pc.cols; ++j) {
      const auto n = estimate_normal(pc, i, j);
      ASSERT_TRUE(n);
      EXPECT_NEAR(std::abs((*n)[2]), 1.0, 1e-12);
    }
  EXPECT_FALSE(estimate_normal(pc, 0, 3));
  EXPECT_FALSE(estimate_normal(pc, 3, pc.cols - 1));
}

TEST(EstimateNormal, TiltedPlane) {
  const ProjectedCloud pc = grid_cloud(
      5, 5, [](double i, double j) { return Eigen::Vector3d(0.1 * j, 0.1 * i, 1.0 - 0.1 * j); }, kAbove);
  const Eigen::Vector3d expected = Eigen::Vector3d(1, 0, 1).normalized();
  const auto n = estimate_normal(pc, 2, 2);
  ASSERT_TRUE(n);
  EXPECT_NEAR(std::abs(n->dot(expected)), 1.0, 1e-12);
}

TEST(EstimateNormal, DegenerateAndInvalidNeighbors) {
  // Every row collapses onto the x axis: collinear neighbors.
  ProjectedCloud line = grid_cloud(
      3, 3, [](double, double j) { return Eigen::Vector3d(0.1 * j, 0, 0); }, kAbove);
  EXPECT_FALSE(estimate_normal(line, 1, 1));

  ProjectedCloud pc = plane_z(5, 5, 1.0);
  pc.valid[pc.index(1, 2)] = 0;
  EXPECT_FALSE(estimate_normal(pc, 2, 2));
  EXPECT_TRUE(estimate_normal(pc, 3, 3));
}

TEST(OrientNormal, SignRules) {
  const Eigen::Vector3d n = Eigen::Vector3d::UnitZ(), p(0, 0, 0), o(0, 0, 1);
  EXPECT_EQ(orient_normal(n, p, o), n);
  EXPECT_EQ(orient_normal(-n, p, o), n);
  // The origin rule looks only at where the sensor sits.
  EXPECT_EQ(orient_normal(n, p, o, NormalOrientation::OriginPosition), -n);
  EXPECT_EQ(orient_normal(-n, p, o, NormalOrientation::OriginPosition), -n);
}

TEST(OrientNormal, SimulatedPlaneFacesTheSensor) {
  Scene scene;
  scene.add(Plane{Eigen::Vector3d::Zero(), Eigen::Vector3d(0, 0, -3)});
  KinematicModel cam;  // sensor at (0,0,1) looking down -z
  cam.ee = {M_PI, 0, 0, 0, 0, -1};
  ASSERT_LE((forward_kinematics(cam, JointVector(0)).translation - Eigen::Vector3d(0, 0, 1)).norm(),
            1e-15);
  TrajectorySpec traj;
  traj.poses = {JointVector(0)};
  const ScanDataset ds = simulate_dataset(scene, cam, test_support::roof_camera(12, 16), traj, 3);
  const NormalGrid g = compute_normals(project_to_base(ds, cam));
  std::size_t defined = 0;
  for (const auto& n : g.normals) {
    if (!n) continue;
    ++defined;
    EXPECT_NEAR((*n)[2], 1.0, 1e-12);
  }
  EXPECT_EQ(defined, 10u * 14u);
}

TEST(NormalOverlap, Examples) {
  NormalGrid g = grid_of(3, 3, Eigen::Vector3d::UnitZ());
  EXPECT_DOUBLE_EQ(*normal_overlap(g, 1, 1, 1, 1), 1.0);
  g.normals[0] = g.normals[4 + 1] = g.normals[8] = Eigen::Vector3d::UnitX();
  EXPECT_NEAR(*normal_overlap(g, 1, 1, 1, 1), 6.0 / 9.0, 1e-15);
  g.normals[4].reset();
  EXPECT_FALSE(normal_overlap(g, 1, 1, 1, 1));
}

TEST(NormalOverlap, RenormalizesAndNeedsHalfWindow) {
  NormalGrid g = grid_of(3, 3, Eigen::Vector3d::UnitZ());
  // Corner cell: 4 of 9 window cells on the grid, below half.
  EXPECT_FALSE(normal_overlap(g, 0, 0, 1, 1));
  // Edge cell: 6 of 9 on the grid, renormalized by 6.
  g.normals[0] = Eigen::Vector3d::UnitX();
  EXPECT_NEAR(*normal_overlap(g, 0, 1, 1, 1), 5.0 / 6.0, 1e-15);
}

TEST(FilterCloud, NoiselessPlaneKeepsInterior) {
  const ProjectedCloud pc = plane_z(10, 12, 0.7);
  const FilteredCloud f = filter_cloud(pc, FilterConfig{2, 2, 0.75}, 4);
  // Defined normals cover rows 1..8, cols 1..10. Cells (1,1), (1,2), (2,1) and their mirrors
  // see fewer than 13 of 25 defined window cells.
  ASSERT_EQ(f.points.size(), 8u * 10u - 4u * 3u);
  for (std::size_t k = 0; k < f.points.size(); ++k) {
    const auto& p = f.points[k];
    EXPECT_EQ(p.dataset, 4u);
    EXPECT_GE(p.row, 1u);
    EXPECT_GE(p.col, 1u);
    EXPECT_LE(p.row, 8u);
    EXPECT_LE(p.col, 10u);
    EXPECT_EQ(p.position, pc.points[f.cell_of(k)]);
    const auto o = normal_overlap(compute_normals(pc), p.row, p.col, 2, 2);
    EXPECT_DOUBLE_EQ(*o, 1.0);
  }
}

TEST(FilterCloud, ZeroThresholdDropsOnlyUndefined) {
  ProjectedCloud pc = wavy(9, 11);
  pc.valid[pc.index(4, 5)] = 0;
  const NormalGrid g = compute_normals(pc);
  const FilteredCloud f = filter_cloud(pc, FilterConfig{1, 1, 0.0});
  std::size_t expected = 0;
  for (std::size_t c = 0; c < pc.size(); ++c)
    if (pc.valid[c] && g.normals[c] && normal_overlap(g, c / pc.cols, c % pc.cols, 1, 1)) ++expected;
  EXPECT_EQ(f.points.size(), expected);
  for (std::size_t k = 0; k < f.points.size(); ++k) EXPECT_TRUE(pc.valid[f.cell_of(k)]);
}

TEST(FilterCloud, MonotoneInThreshold) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 0.003);
  ProjectedCloud pc = wavy(20, 20);
  for (auto& p : pc.points) p.z() += noise(rng);
  std::size_t previous = pc.size() + 1;
  std::vector<std::uint8_t> kept_prev(pc.size(), 1);
  for (double g = 0.0; g <= 1.0 + 1e-12; g += 0.05) {
    const FilteredCloud f = filter_cloud(pc, FilterConfig{2, 2, std::min(g, 1.0)});
    std::vector<std::uint8_t> kept(pc.size(), 0);
    for (std::size_t k = 0; k < f.points.size(); ++k) kept[f.cell_of(k)] = 1;
    for (std::size_t c = 0; c < pc.size(); ++c)
      if (kept[c]) EXPECT_TRUE(kept_prev[c]) << "cell " << c << " reappeared at g_min " << g;
    EXPECT_LE(f.points.size(), previous);
    previous = f.points.size();
    kept_prev = kept;
  }
}

TEST(FilterCloud, UnitNormalsAndScaleInvariance) {
  const ProjectedCloud pc = wavy(15, 17);
  ProjectedCloud scaled = pc;
  const double s = 0.37;
  for (auto& p : scaled.points) p /= s;
  for (auto& o : scaled.origins) o /= s;
  const NormalGrid a = compute_normals(pc), b = compute_normals(scaled);
  for (std::size_t c = 0; c < pc.size(); ++c) {
    ASSERT_EQ(bool(a.normals[c]), bool(b.normals[c]));
    if (!a.normals[c]) continue;
    EXPECT_NEAR(a.normals[c]->norm(), 1.0, 1e-9);
    EXPECT_LE((*a.normals[c] - *b.normals[c]).norm(), 1e-12);
  }
}

TEST(FilterCloud, RejectsBadThreshold) {
  const ProjectedCloud pc = plane_z(4, 4, 1);
  EXPECT_THROW(filter_cloud(pc, FilterConfig{2, 2, 1.5}), InvalidParameterError);
  EXPECT_THROW(filter_cloud(pc, FilterConfig{2, 2, -0.1}), InvalidParameterError);
  EXPECT_THROW(filter_cloud(pc, FilterConfig{-1, 2, 0.5}), InvalidParameterError);
}

TEST(FilterCloud, SyntheticFoldMatchesAnalyticBand) {
  const int rows = 15, cols = 21, fold = 10;
  const ProjectedCloud pc = grid_cloud(
      rows, cols,
      [&](double i, double j) {
        const double x = 0.01 * (j - fold);
        return Eigen::Vector3d(x, 0.01 * i, 1.0 - std::abs(x));
      },
      Eigen::Vector3d::Zero());
  const FilteredCloud f = filter_cloud(pc, FilterConfig{2, 2, 0.75});
  const auto predicted = oracle::corner_filter_prediction(rows, cols, fold, 2, 2, 0.75);
  std::vector<std::uint8_t> kept(pc.size(), 0);
  for (std::size_t k = 0; k < f.points.size(); ++k) kept[f.cell_of(k)] = 1;
  EXPECT_EQ(kept, predicted);
  // Middle rows: the crease column and its +-2 neighbors survive, +-1 does not.
  const int i = rows / 2;
  EXPECT_TRUE(kept[pc.index(i, fold)]);
  EXPECT_FALSE(kept[pc.index(i, fold - 1)]);
  EXPECT_FALSE(kept[pc.index(i, fold + 1)]);
  EXPECT_TRUE(kept[pc.index(i, fold - 2)]);
  EXPECT_TRUE(kept[pc.index(i, fold + 2)]);
}

TEST(FilterCloud, SimulatedRoofMatchesAnalyticBand) {
  const int rows = 24, cols = 65, fold = 32;
  const ScanDataset ds = test_support::roof_frame(rows, cols);
  ASSERT_EQ(ds.valid_count(), ds.size());
  const ProjectedCloud pc = project_to_base(ds, KinematicModel{});
  for (int i = 0; i < rows; ++i) ASSERT_EQ(pc.points[pc.index(i, fold)].x(), 0.0);
  const FilteredCloud f = filter_cloud(pc, FilterConfig{2, 2, 0.75});
  std::vector<std::uint8_t> kept(pc.size(), 0);
  for (std::size_t k = 0; k < f.points.size(); ++k) kept[f.cell_of(k)] = 1;
  EXPECT_EQ(kept, oracle::corner_filter_prediction(rows, cols, fold, 2, 2, 0.75));
}

TEST(ComputeScale, Examples) {
  ProjectedCloud pc;
  pc.rows = 1;
  pc.cols = 1;
  pc.points = {{0, 2, 0}};
  pc.origins = {Eigen::Vector3d::Zero()};
  pc.valid = {1};
  EXPECT_DOUBLE_EQ(compute_scale(pc), 2.0);

  pc.cols = 3;
  pc.points = {{1, 0, 0}, {100, 0, 0}, {0, 0, -3}};
  pc.origins.assign(3, Eigen::Vector3d::Zero());
  pc.valid = {1, 0, 1};
  EXPECT_DOUBLE_EQ(compute_scale(pc), 2.0);

  pc.valid = {0, 0, 0};
  EXPECT_THROW(compute_scale(pc), InvalidInputError);
}

TEST(ComputeScale, UnitSphereMonteCarlo) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  ProjectedCloud pc;
  pc.rows = 1;
  pc.cols = 100000;
  for (std::size_t k = 0; k < pc.cols; ++k) {
    Eigen::Vector3d v(g(rng), g(rng), g(rng));
    pc.points.push_back(v.normalized());
    pc.origins.push_back(Eigen::Vector3d::Zero());
    pc.valid.push_back(1);
  }
  EXPECT_NEAR(compute_scale(pc), 1.0, 1e-2);
}
