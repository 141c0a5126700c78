#include "kincal/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>
#include <unordered_map>

#include "kincal/errors.hpp"

namespace kincal {

const char* to_string(SensorKind kind) {
  switch (kind) {
    case SensorKind::SingleBeamLidar:
      return "single_beam_lidar";
    case SensorKind::LineScanner:
      return "line_scanner";
    case SensorKind::DepthCamera:
      return "depth_camera";
  }
  return "unknown";
}

SensorKind sensor_kind_from_string(const std::string& name) {
  if (name == "single_beam_lidar") return SensorKind::SingleBeamLidar;
  if (name == "line_scanner") return SensorKind::LineScanner;
  if (name == "depth_camera") return SensorKind::DepthCamera;
  throw InvalidInputError("unknown sensor kind '" + name + "'");
}

ScanDataset ScanDataset::empty(SensorKind kind, std::size_t rows, std::size_t cols,
                               std::size_t joint_count) {
  ScanDataset ds;
  ds.kind = kind;
  ds.rows = rows;
  ds.cols = cols;
  ds.joint_count = joint_count;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  ds.points.assign(rows * cols, Eigen::Vector3d::Constant(nan));
  ds.valid.assign(rows * cols, 0);
  ds.joints.assign(rows * cols, JointVector::Zero(static_cast<Eigen::Index>(joint_count)));
  return ds;
}

std::size_t ScanDataset::valid_count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

void ScanDataset::check() const {
  const std::size_t n = rows * cols;
  if (points.size() != n || valid.size() != n || joints.size() != n)
    throw DimensionError("dataset arrays do not match the " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " grid");
  for (std::size_t c = 0; c < n; ++c) {
    if (static_cast<std::size_t>(joints[c].size()) != joint_count)
      throw DimensionError("cell " + std::to_string(c) + " has a joint vector of length " +
                           std::to_string(joints[c].size()) + ", expected " +
                           std::to_string(joint_count));
    if (!valid[c]) continue;
    if (!points[c].allFinite())
      throw InvalidInputError("valid cell " + std::to_string(c) + " has a non-finite point");
    if (!joints[c].allFinite())
      throw InvalidInputError("valid cell " + std::to_string(c) + " has non-finite joints");
  }
}

namespace {

struct JointKey {
  const JointVector* v;
  bool operator==(const JointKey& o) const {
    return v->size() == o.v->size() &&
           std::memcmp(v->data(), o.v->data(), sizeof(double) * std::size_t(v->size())) == 0;
  }
};

struct JointKeyHash {
  std::size_t operator()(const JointKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (Eigen::Index i = 0; i < k.v->size(); ++i) {
      std::uint64_t bits;
      const double d = (*k.v)[i];
      std::memcpy(&bits, &d, sizeof bits);
      h = (h ^ bits) * 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

PoseGroups group_poses(const ScanDataset& ds) {
  PoseGroups g;
  g.slot_of_cell.resize(ds.joints.size());
  std::unordered_map<JointKey, std::uint32_t, JointKeyHash> seen;
  for (std::size_t c = 0; c < ds.joints.size(); ++c) {
    // Consecutive repeats are the common case (frames, columns).
    if (c > 0 && JointKey{&ds.joints[c]} == JointKey{&ds.joints[c - 1]}) {
      g.slot_of_cell[c] = g.slot_of_cell[c - 1];
      continue;
    }
    auto [it, inserted] =
        seen.emplace(JointKey{&ds.joints[c]}, static_cast<std::uint32_t>(g.joints.size()));
    if (inserted) g.joints.push_back(ds.joints[c]);
    g.slot_of_cell[c] = it->second;
  }
  return g;
}

ProjectedCloud project_to_base(const ScanDataset& ds, const KinematicModel& model) {
  return project_to_base(ds, model, group_poses(ds));
}

ProjectedCloud project_to_base(const ScanDataset& ds, const KinematicModel& model,
                               const PoseGroups& groups) {
  if (ds.joint_count != model.joint_count())
    throw DimensionError("dataset has " + std::to_string(ds.joint_count) +
                         " joints per state, model has " + std::to_string(model.joint_count()));
  ProjectedCloud out;
  out.rows = ds.rows;
  out.cols = ds.cols;
  out.valid = ds.valid;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.points.assign(ds.size(), Eigen::Vector3d::Constant(nan));
  out.origins.assign(ds.size(), Eigen::Vector3d::Constant(nan));

  std::vector<RigidTransform> poses(groups.joints.size());
  std::vector<std::uint8_t> ready(groups.joints.size(), 0);
  for (std::size_t c = 0; c < ds.size(); ++c) {
    if (!ds.valid[c]) continue;
    const std::uint32_t slot = groups.slot_of_cell[c];
    if (!ready[slot]) {
      poses[slot] = forward_kinematics(model, groups.joints[slot]);
      ready[slot] = 1;
    }
    out.points[c] = poses[slot] * ds.points[c];
    out.origins[c] = poses[slot].translation;
  }
  return out;
}

ProjectedCloud project_rigid(const ScanDataset& ds, const RigidTransform& pose) {
  ProjectedCloud out;
  out.rows = ds.rows;
  out.cols = ds.cols;
  out.valid = ds.valid;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.points.assign(ds.size(), Eigen::Vector3d::Constant(nan));
  out.origins.assign(ds.size(), Eigen::Vector3d::Constant(nan));
  for (std::size_t c = 0; c < ds.size(); ++c) {
    if (!ds.valid[c]) continue;
    out.points[c] = pose * ds.points[c];
    out.origins[c] = pose.translation;
  }
  return out;
}

JointVector interpolate_joints(const std::vector<TimedJoints>& samples, double t) {
  if (samples.size() < 2) throw InvalidInputError("interpolation needs at least two samples");
  if (!std::isfinite(t)) throw InvalidParameterError("non-finite interpolation time");
  if (t < samples.front().time || t > samples.back().time)
    throw ExtrapolationError("time " + std::to_string(t) + " outside sampled range [" +
                             std::to_string(samples.front().time) + ", " +
                             std::to_string(samples.back().time) + "]");
  auto hi = std::lower_bound(samples.begin(), samples.end(), t,
                             [](const TimedJoints& s, double v) { return s.time < v; });
  if (hi->time == t) return hi->joints;
  auto lo = hi - 1;
  if (lo->joints.size() != hi->joints.size())
    throw DimensionError("joint samples differ in length");
  const double w = (t - lo->time) / (hi->time - lo->time);
  return lo->joints + w * (hi->joints - lo->joints);
}

}  // namespace kincal
