#pragma once

#include <functional>

#include <Eigen/Core>

#include "kincal/dataset.hpp"
#include "kincal/scene.hpp"
#include "kincal/simulator.hpp"

namespace test_support {

// Organized cloud sampled from f(i, j), all cells valid, seen from `origin`.
inline kincal::ProjectedCloud grid_cloud(std::size_t rows, std::size_t cols,
                                         const std::function<Eigen::Vector3d(double, double)>& f,
                                         const Eigen::Vector3d& origin) {
  kincal::ProjectedCloud pc;
  pc.rows = rows;
  pc.cols = cols;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      pc.points.push_back(f(double(i), double(j)));
      pc.origins.push_back(origin);
      pc.valid.push_back(1);
    }
  return pc;
}

// Roof of two planes z = 1 -+ x meeting at a right angle on x = 0. An odd column count puts
// the middle column's rays exactly on the crease.
inline kincal::Scene roof_scene() {
  kincal::Scene s;
  s.add(kincal::Plane{{0, 0, 1}, Eigen::Vector3d(1, 0, 1)});
  s.add(kincal::Plane{{0, 0, 1}, Eigen::Vector3d(-1, 0, 1)});
  return s;
}

inline kincal::SensorSpec roof_camera(std::size_t rows, std::size_t cols) {
  kincal::SensorSpec spec;
  spec.kind = kincal::SensorKind::DepthCamera;
  spec.rows = rows;
  spec.cols = cols;
  spec.fov_x = 1.2;
  spec.fov_y = 0.8;
  spec.min_range = 0.1;
  spec.max_range = 10.0;
  return spec;
}

// A single noiseless depth frame of the roof through a joint-less identity chain.
inline kincal::ScanDataset roof_frame(std::size_t rows, std::size_t cols) {
  kincal::TrajectorySpec traj;
  traj.poses = {kincal::JointVector(0)};
  return kincal::simulate_dataset(roof_scene(), kincal::KinematicModel{}, roof_camera(rows, cols),
                                  traj, 1);
}

}  // namespace test_support
