#include "kincal/simulator.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "kincal/errors.hpp"
#include "kincal/parallel.hpp"

namespace kincal {
namespace {

void check_joints(const KinematicModel& model, const JointVector& q, const char* what) {
  if (std::size_t(q.size()) != model.joint_count())
    throw DimensionError(std::string(what) + " has " + std::to_string(q.size()) +
                         " joint values, model has " + std::to_string(model.joint_count()));
  if (!q.allFinite()) throw InvalidInputError(std::string(what) + " is not finite");
}

void check_trajectory(const KinematicModel& model, const TrajectorySpec& traj) {
  for (const auto& leg : traj.legs) {
    check_joints(model, leg.start, "trajectory leg start");
    check_joints(model, leg.end, "trajectory leg end");
  }
  for (const auto& p : traj.poses) check_joints(model, p, "trajectory pose");
}

// One measurement: sensor-frame point along `dir`, or nothing.
struct RayResult {
  Eigen::Vector3d point = Eigen::Vector3d::Constant(std::numeric_limits<double>::quiet_NaN());
  bool valid = false;
};

RayResult shoot(const Scene& scene, const RigidTransform& pose, const Eigen::Vector3d& dir,
                const SensorSpec& spec, std::uint64_t stream) {
  RayResult out;
  const Eigen::Vector3d world_dir = (pose.rotation * dir).normalized();
  const auto hit = raycast(scene, pose.translation, world_dir);
  if (!hit || *hit < spec.min_range || *hit > spec.max_range) return out;
  double range = *hit;
  const double sigma = spec.noise.sigma_at(range);
  if (sigma > 0.0) {
    std::mt19937_64 rng(stream);
    std::normal_distribution<double> gauss(0.0, sigma);
    range += gauss(rng);
  }
  if (!(range > 0.0)) return out;
  out.point = dir * range;
  out.valid = true;
  return out;
}

std::vector<double> joint_bound(const KinematicModel& model, const std::vector<double>& given,
                                double revolute, double prismatic, const char* what) {
  if (!given.empty()) {
    if (given.size() != model.joint_count())
      throw DimensionError(std::string(what) + " needs one value per joint");
    return given;
  }
  std::vector<double> out;
  for (const auto& s : model.segments)
    out.push_back(s.joint == JointKind::Revolute ? revolute : prismatic);
  return out;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter) {
  // splitmix64 over seed and counter
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (counter + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

void SensorSpec::check() const {
  if (rows == 0 || (kind == SensorKind::DepthCamera && cols == 0))
    throw InvalidParameterError("sensor needs at least one ray");
  const double max_fov = kind == SensorKind::DepthCamera ? M_PI : 2.0 * M_PI;
  if (!(fov_y > 0.0 && fov_y < max_fov))
    throw InvalidParameterError("sensor fov_y out of range");
  if (kind == SensorKind::DepthCamera && !(fov_x > 0.0 && fov_x < M_PI))
    throw InvalidParameterError("sensor fov_x out of range");
  if (!(min_range >= 0.0 && min_range < max_range) || !std::isfinite(max_range))
    throw InvalidParameterError("sensor needs 0 <= min_range < max_range");
  if (!(noise.sigma_abs >= 0.0) || !(noise.sigma_rel >= 0.0))
    throw InvalidParameterError("noise sigmas must be >= 0");
  if (!(sample_rate > 0.0)) throw InvalidParameterError("sample rate must be positive");
}

Eigen::Vector3d SensorSpec::ray(std::size_t i, std::size_t j) const {
  if (kind == SensorKind::DepthCamera) {
    const double u = std::tan(fov_x / 2.0) * (2.0 * (double(j) + 0.5) / double(cols) - 1.0);
    const double v = std::tan(fov_y / 2.0) * (2.0 * (double(i) + 0.5) / double(rows) - 1.0);
    return Eigen::Vector3d(u, v, 1.0).normalized();
  }
  const double theta = fov_y * ((double(i) + 0.5) / double(rows) - 0.5);
  return {std::sin(theta), 0.0, std::cos(theta)};
}

double TrajectorySpec::duration() const {
  double t = 0.0;
  for (const auto& leg : legs) t += leg.duration;
  return t;
}

std::vector<TimedJoints> TrajectorySpec::samples() const {
  std::vector<TimedJoints> out;
  double t = 0.0;
  for (std::size_t k = 0; k < legs.size(); ++k) {
    const auto& leg = legs[k];
    if (!(leg.duration > 0.0)) throw InvalidInputError("trajectory leg durations must be > 0");
    if (k == 0) {
      out.push_back({0.0, leg.start});
    } else if (leg.start.size() != legs[k - 1].end.size() || leg.start != legs[k - 1].end) {
      throw InvalidInputError("trajectory leg " + std::to_string(k) +
                              " does not start where leg " + std::to_string(k - 1) + " ends");
    }
    t += leg.duration;
    out.push_back({t, leg.end});
  }
  return out;
}

ScanDataset simulate_dataset(const Scene& scene, const KinematicModel& model,
                             const SensorSpec& spec, const TrajectorySpec& traj,
                             std::uint64_t seed, int threads) {
  spec.check();
  validate_model(model);
  check_trajectory(model, traj);
  const std::size_t n = model.joint_count();

  if (spec.kind == SensorKind::DepthCamera) {
    if (traj.poses.size() != 1 || !traj.legs.empty())
      throw ConfigurationError("a depth-camera dataset is taken from exactly one static pose");
    ScanDataset ds = ScanDataset::empty(spec.kind, spec.rows, spec.cols, n);
    const RigidTransform pose = forward_kinematics(model, traj.poses[0]);
    for (auto& q : ds.joints) q = traj.poses[0];
    parallel_for(spec.rows, threads, [&](std::size_t i) {
      for (std::size_t j = 0; j < spec.cols; ++j) {
        const std::size_t c = ds.index(i, j);
        const RayResult r = shoot(scene, pose, spec.ray(i, j), spec, mix_seed(seed, c));
        ds.points[c] = r.point;
        ds.valid[c] = r.valid ? 1 : 0;
      }
    });
    return ds;
  }

  if (traj.legs.empty() || !traj.poses.empty())
    throw ConfigurationError("line scanners and LiDARs need a trajectory of legs");
  const std::vector<TimedJoints> knots = traj.samples();
  const double total = traj.duration();
  const bool lidar = spec.kind == SensorKind::SingleBeamLidar;
  const std::size_t cols =
      lidar ? std::max<std::size_t>(1, std::size_t(std::floor(total * spec.sample_rate + 1e-9)))
            : std::size_t(std::floor(total * spec.sample_rate + 1e-9)) + 1;

  ScanDataset ds = ScanDataset::empty(spec.kind, spec.rows, cols, n);
  parallel_for(cols, threads, [&](std::size_t j) {
    JointVector line_q;
    RigidTransform line_pose;
    if (!lidar) {
      line_q = interpolate_joints(knots, std::min(total, double(j) / spec.sample_rate));
      line_pose = forward_kinematics(model, line_q);
    }
    for (std::size_t i = 0; i < spec.rows; ++i) {
      const std::size_t c = ds.index(i, j);
      if (lidar) {
        const double t = (double(j) + double(i) / double(spec.rows)) / spec.sample_rate;
        ds.joints[c] = interpolate_joints(knots, std::min(total, t));
        const RayResult r =
            shoot(scene, forward_kinematics(model, ds.joints[c]), spec.ray(i, 0), spec,
                  mix_seed(seed, c));
        ds.points[c] = r.point;
        ds.valid[c] = r.valid ? 1 : 0;
      } else {
        ds.joints[c] = line_q;
        const RayResult r = shoot(scene, line_pose, spec.ray(i, 0), spec, mix_seed(seed, c));
        ds.points[c] = r.point;
        ds.valid[c] = r.valid ? 1 : 0;
      }
    }
  });
  return ds;
}

std::vector<ScanDataset> simulate_frames(const Scene& scene, const KinematicModel& model,
                                         const SensorSpec& spec,
                                         const std::vector<JointVector>& poses,
                                         std::uint64_t seed, int threads) {
  if (spec.kind != SensorKind::DepthCamera)
    throw ConfigurationError("simulate_frames is for depth cameras");
  std::vector<ScanDataset> out;
  out.reserve(poses.size());
  for (std::size_t k = 0; k < poses.size(); ++k) {
    TrajectorySpec one;
    one.poses = {poses[k]};
    out.push_back(simulate_dataset(scene, model, spec, one, mix_seed(seed ^ 0xF4A3E5ull, k), threads));
  }
  return out;
}

std::vector<JointVector> random_joint_samples(const KinematicModel& model, std::size_t count,
                                              std::uint64_t seed, const ViewPlanOptions& options) {
  const auto lo = joint_bound(model, options.joint_lower, -M_PI, 0.0, "joint_lower");
  const auto hi = joint_bound(model, options.joint_upper, M_PI, 0.5, "joint_upper");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<JointVector> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    JointVector q(Eigen::Index(model.joint_count()));
    for (std::size_t j = 0; j < model.joint_count(); ++j)
      q(Eigen::Index(j)) = lo[j] + (hi[j] - lo[j]) * unit(rng);
    out.push_back(q);
  }
  return out;
}

std::vector<JointVector> plan_view_poses(const Scene& scene, const KinematicModel& model,
                                         const SensorSpec& spec, std::size_t count,
                                         std::uint64_t seed, const ViewPlanOptions& options) {
  spec.check();
  const auto lo = joint_bound(model, options.joint_lower, -M_PI, 0.0, "joint_lower");
  const auto hi = joint_bound(model, options.joint_upper, M_PI, 0.5, "joint_upper");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Coarse probe rays.
  SensorSpec probe = spec;
  probe.rows = 8;
  probe.cols = spec.kind == SensorKind::DepthCamera ? 8 : 1;
  const double cos_max = std::cos(options.max_view_angle);

  std::vector<JointVector> out;
  for (int attempt = 0; attempt < options.max_attempts && out.size() < count; ++attempt) {
    JointVector q(Eigen::Index(model.joint_count()));
    for (std::size_t j = 0; j < model.joint_count(); ++j)
      q(Eigen::Index(j)) = lo[j] + (hi[j] - lo[j]) * unit(rng);
    const RigidTransform pose = forward_kinematics(model, q);
    const Eigen::Vector3d to_target = options.target - pose.translation;
    const double dist = to_target.norm();
    if (dist < options.min_distance || dist > options.max_distance) continue;
    if (pose.rotation.col(2).dot(to_target) < cos_max * dist) continue;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < probe.rows; ++i)
      for (std::size_t j = 0; j < probe.cols; ++j) {
        const auto t =
            raycast(scene, pose.translation, (pose.rotation * probe.ray(i, j)).normalized());
        hits += t && *t >= spec.min_range && *t <= spec.max_range;
      }
    if (double(hits) < options.min_valid_fraction * double(probe.rows * probe.cols)) continue;
    out.push_back(q);
  }
  if (out.size() < count)
    throw InvalidInputError("view planner accepted only " + std::to_string(out.size()) + " of " +
                            std::to_string(count) + " poses");
  return out;
}

KinematicModel perturb_model(const KinematicModel& model, const ParamMask& mask,
                             double rot_magnitude, double trans_magnitude, std::uint64_t seed) {
  if (mask.size() != model.param_count()) throw DimensionError("mask does not fit the model");
  if (!(rot_magnitude >= 0.0) || !(trans_magnitude >= 0.0))
    throw InvalidParameterError("perturbation magnitudes must be >= 0");
  ParamVector k = pack_params(model);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    const double u = sym(rng);
    const double mag = is_translation_param(model, i) ? trans_magnitude : rot_magnitude;
    if (mag > 0.0) k(Eigen::Index(i)) += u * mag;
  }
  return unpack_params(k, model);
}

PoseError evaluate_against_truth(const KinematicModel& found, const KinematicModel& truth,
                                 const std::vector<JointVector>& probes, const ParamMask& mask) {
  if (found.joint_count() != truth.joint_count())
    throw DimensionError("models differ in joint count");
  for (std::size_t i = 0; i < found.joint_count(); ++i)
    if (found.segments[i].joint != truth.segments[i].joint)
      throw DimensionError("models differ in joint kinds");
  if (mask.size() != truth.param_count()) throw DimensionError("mask does not fit the model");

  ParamVector k = pack_params(found);
  const ParamVector kt = pack_params(truth);
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (!mask[i]) k(Eigen::Index(i)) = kt(Eigen::Index(i));
  const KinematicModel f = unpack_params(k, truth);

  PoseError e;
  if (probes.empty()) return e;
  for (const auto& q : probes) {
    const RigidTransform a = forward_kinematics(f, q);
    const RigidTransform b = forward_kinematics(truth, q);
    const double ang = rotation_angle_between(a.rotation, b.rotation) * 180.0 / M_PI;
    const double pos = (a.translation - b.translation).norm() * 1000.0;
    e.orientation_deg += ang;
    e.position_mm += pos;
    e.max_orientation_deg = std::max(e.max_orientation_deg, ang);
    e.max_position_mm = std::max(e.max_position_mm, pos);
  }
  e.orientation_deg /= double(probes.size());
  e.position_mm /= double(probes.size());
  return e;
}

PoseError evaluate_against_truth(const KinematicModel& found, const KinematicModel& truth,
                                 const std::vector<JointVector>& probes) {
  return evaluate_against_truth(found, truth, probes, ParamMask::defaults_for(truth));
}

double scene_deviation(const Scene& scene, const ScanDataset& ds, const KinematicModel& model) {
  const ProjectedCloud pc = project_to_base(ds, model);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < pc.size(); ++c) {
    if (!pc.is_valid(c)) continue;
    sum += distance_to_surface(scene, pc.points[c]);
    ++n;
  }
  if (n == 0) throw InvalidInputError("dataset has no valid points");
  return sum / double(n);
}

KinematicModel reference_arm() {
  KinematicModel m;
  const double h = M_PI / 2.0;
  m.segments = {
      {0.0, 0.0, 0.0, 0.0, JointKind::Revolute}, {-h, 0.0, 0.0, 0.0, JointKind::Revolute},
      {h, 0.0, 0.0, 0.0, JointKind::Revolute},   {-h, 0.0, 0.0, -0.42, JointKind::Revolute},
      {h, 0.0, 0.0, 0.0, JointKind::Revolute},   {-h, 0.0, 0.0, -0.40, JointKind::Revolute},
      {h, 0.0, 0.0, 0.0, JointKind::Revolute},
  };
  m.ee = {0.10, -0.05, 0.30, 0.03, -0.02, 0.20};
  return m;
}

}  // namespace kincal
