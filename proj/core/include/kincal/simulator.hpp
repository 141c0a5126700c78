#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "kincal/dataset.hpp"
#include "kincal/kinematics.hpp"
#include "kincal/scene.hpp"

namespace kincal {

/// Range noise sigma = sigma_rel * range + sigma_abs, applied along the ray.
struct NoiseModel {
  double sigma_abs = 0.0;  // meters
  double sigma_rel = 0.0;

  double sigma_at(double range) const { return sigma_rel * range + sigma_abs; }
};

/// Sensor geometry in its own frame E; rays leave the origin towards +z.
///
///   depth_camera       rows x cols frustum spanning fov_x (along cols) by fov_y (rows);
///                      one frame per static pose.
///   line_scanner       a fan of `rows` rays over fov_y in the x-z plane; one line (grid
///                      column) every 1 / sample_rate seconds.
///   single_beam_lidar  one beam sweeping fov_y in the x-z plane, `rows` samples per
///                      sweep at sample_rate sweeps per second; every sample gets its own
///                      time and joint state, sweeps form the columns.
struct SensorSpec {
  SensorKind kind = SensorKind::DepthCamera;
  std::size_t rows = 64;
  std::size_t cols = 64;  // depth camera only
  double fov_x = 1.0;     // radians
  double fov_y = 1.0;
  double min_range = 0.1;
  double max_range = 5.0;
  NoiseModel noise;
  double sample_rate = 30.0;  // frames, lines or sweeps per second

  /// Throws InvalidParameterError on non-positive sizes, fov outside (0, 2 pi) or a bad
  /// range interval.
  void check() const;
  /// Unit ray direction of grid row i (and column j for a depth camera).
  Eigen::Vector3d ray(std::size_t i, std::size_t j) const;
};

/// Constant-velocity leg from `start` to `end` over `duration` seconds.
struct TrajectoryLeg {
  JointVector start;
  JointVector end;
  double duration = 1.0;
};

/// Either consecutive legs (each one starting where the previous ended) or static poses for
/// frame sensors.
struct TrajectorySpec {
  std::vector<TrajectoryLeg> legs;
  std::vector<JointVector> poses;

  double duration() const;
  /// Knots for interpolate_joints; throws InvalidInputError on discontinuous legs or
  /// non-positive durations.
  std::vector<TimedJoints> samples() const;
};

/// One dataset from `traj`. Depth cameras take exactly one static pose; line scanners and
/// LiDARs sweep the legs. Deterministic in `seed`: every ray draws from its own stream.
/// Throws DimensionError when joint vectors do not fit the model.
ScanDataset simulate_dataset(const Scene& scene, const KinematicModel& model,
                             const SensorSpec& spec, const TrajectorySpec& traj,
                             std::uint64_t seed, int threads = 1);

/// One depth-camera frame per pose; frame k uses a seed derived from (seed, k).
std::vector<ScanDataset> simulate_frames(const Scene& scene, const KinematicModel& model,
                                         const SensorSpec& spec,
                                         const std::vector<JointVector>& poses,
                                         std::uint64_t seed, int threads = 1);

struct ViewPlanOptions {
  Eigen::Vector3d target = default_scene_target();
  double min_distance = 0.45;
  double max_distance = 1.0;
  double max_view_angle = 0.5236;   // between the optical axis and the target direction
  double min_valid_fraction = 0.5;  // on a coarse 8x8 probe frame
  std::vector<double> joint_lower;  // defaults to -pi (revolute) / 0 (prismatic)
  std::vector<double> joint_upper;  // defaults to +pi / 0.5 m
  int max_attempts = 200000;
};

/// Random joint configurations looking at `options.target` from a usable distance, drawn
/// by rejection sampling. Throws InvalidInputError if too few candidates are accepted.
std::vector<JointVector> plan_view_poses(const Scene& scene, const KinematicModel& model,
                                         const SensorSpec& spec, std::size_t count,
                                         std::uint64_t seed, const ViewPlanOptions& options = {});

/// Uniform joint samples inside the planner's joint box.
std::vector<JointVector> random_joint_samples(const KinematicModel& model, std::size_t count,
                                              std::uint64_t seed,
                                              const ViewPlanOptions& options = {});

/// Adds uniform noise in +-rot_magnitude (angles) and +-trans_magnitude (offsets) to the
/// free scalars of `mask`; masked scalars are copied unchanged.
KinematicModel perturb_model(const KinematicModel& model, const ParamMask& mask,
                             double rot_magnitude, double trans_magnitude, std::uint64_t seed);

struct PoseError {
  double orientation_deg = 0.0;  // mean geodesic angle
  double position_mm = 0.0;      // mean translation norm
  double max_orientation_deg = 0.0;
  double max_position_mm = 0.0;
};

/// Mean EE pose discrepancy over `probes`. Scalars the mask leaves out of calibration are
/// taken from `truth` before comparing.
PoseError evaluate_against_truth(const KinematicModel& found, const KinematicModel& truth,
                                 const std::vector<JointVector>& probes, const ParamMask& mask);
PoseError evaluate_against_truth(const KinematicModel& found, const KinematicModel& truth,
                                 const std::vector<JointVector>& probes);

/// Mean distance of the dataset's valid points, projected through `model`, to the scene.
double scene_deviation(const Scene& scene, const ScanDataset& ds, const KinematicModel& model);

/// Seven revolute joints with arm-scale link offsets (0.42 m and 0.40 m between the
/// shoulder, elbow and wrist) and a camera offset on the flange.
KinematicModel reference_arm();

/// Counter-based 64-bit mixer used for per-ray random streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter);

}  // namespace kincal
