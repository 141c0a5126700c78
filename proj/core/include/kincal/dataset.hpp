#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "kincal/kinematics.hpp"

namespace kincal {

enum class SensorKind { SingleBeamLidar, LineScanner, DepthCamera };

const char* to_string(SensorKind kind);
SensorKind sensor_kind_from_string(const std::string& name);

/// Grid-ordered scan in the sensor frame E with one joint vector per cell.
///
/// Cells are stored row-major. For line scanners and LiDARs a column holds one line or one
/// beam rotation; depth-camera frames carry the same joint vector in every cell.
/// Invalid cells keep their slot so grid neighborhoods stay intact.
struct ScanDataset {
  SensorKind kind = SensorKind::DepthCamera;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t joint_count = 0;
  std::vector<Eigen::Vector3d> points;
  std::vector<std::uint8_t> valid;
  std::vector<JointVector> joints;

  static ScanDataset empty(SensorKind kind, std::size_t rows, std::size_t cols,
                           std::size_t joint_count);

  std::size_t size() const { return rows * cols; }
  std::size_t index(std::size_t i, std::size_t j) const { return i * cols + j; }
  bool is_valid(std::size_t cell) const { return valid[cell] != 0; }
  std::size_t valid_count() const;

  /// Sizes agree, every valid point is finite and every valid cell has a finite joint
  /// vector of length joint_count. Throws DimensionError / InvalidInputError.
  void check() const;
};

/// Distinct joint states of a dataset; cells sharing a joint vector share one pose slot,
/// so chain transforms are evaluated once per slot.
struct PoseGroups {
  std::vector<std::uint32_t> slot_of_cell;
  std::vector<JointVector> joints;
};
PoseGroups group_poses(const ScanDataset& ds);

/// Same grid as the source dataset, expressed in the base frame B. `origins` holds the
/// sensor origin o^B of the pose each cell was measured from.
struct ProjectedCloud {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Eigen::Vector3d> points;
  std::vector<Eigen::Vector3d> origins;
  std::vector<std::uint8_t> valid;

  std::size_t size() const { return rows * cols; }
  std::size_t index(std::size_t i, std::size_t j) const { return i * cols + j; }
  bool is_valid(std::size_t cell) const { return valid[cell] != 0; }
};

ProjectedCloud project_to_base(const ScanDataset& ds, const KinematicModel& model);
ProjectedCloud project_to_base(const ScanDataset& ds, const KinematicModel& model,
                               const PoseGroups& groups);
/// Cells mapped by a fixed transform instead of the chain.
ProjectedCloud project_rigid(const ScanDataset& ds, const RigidTransform& pose);

struct TimedJoints {
  double time = 0.0;
  JointVector joints;
};

/// Per-joint linear interpolation between the samples bracketing `t`. Samples must be
/// sorted by time; `t` outside [front, back] throws ExtrapolationError.
JointVector interpolate_joints(const std::vector<TimedJoints>& samples, double t);

/// Dataset directory layout (all text, '#' starts a comment line):
///
///   meta    "key value" lines: kind (single_beam_lidar | line_scanner | depth_camera),
///           rows, cols, joint_count, joint_layout (cell | column | frame)
///   points  one record per cell: "i j valid x y z" (meters, sensor frame)
///   joints  cell layout:   "i j q_1 ... q_n", one record per cell
///           column layout: "* j q_1 ... q_n", one record per column
///           frame layout:  "* * q_1 ... q_n", a single record
///
/// Numbers use the shortest round-trip representation, so a save/load cycle is bit-exact.
void save_dataset(const ScanDataset& ds, const std::filesystem::path& dir);
ScanDataset load_dataset(const std::filesystem::path& dir);

}  // namespace kincal
