#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "kincal/transform.hpp"

namespace kincal {

enum class JointKind { Revolute, Prismatic };

/// Static MCPC segment: rot_x(alpha) * rot_y(beta) * trans(x, y, 0), followed by `joint`.
/// For a prismatic follower x and y stay at zero.
struct Segment {
  double alpha = 0.0;
  double beta = 0.0;
  double x = 0.0;
  double y = 0.0;
  JointKind joint = JointKind::Revolute;

  bool operator==(const Segment&) const = default;
};

/// Terminal segment from the last joint to the sensor frame:
/// rot_x(alpha) * rot_y(beta) * rot_z(gamma) * trans(x, y, z).
struct EESegment {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool operator==(const EESegment&) const = default;
};

using JointVector = Eigen::VectorXd;
using ParamVector = Eigen::VectorXd;

/// Serial chain in MCPC form. segments[0] is the base segment (B -> J1); segments[i] is
/// followed by joint i+1, so there is one segment per joint. A model without joints is a
/// single free transform given by `ee`.
struct KinematicModel {
  std::vector<Segment> segments;
  EESegment ee;

  std::size_t joint_count() const { return segments.size(); }
  std::size_t param_count() const { return 4 * segments.size() + 6; }
  const Segment& base_segment() const { return segments.front(); }

  bool operator==(const KinematicModel&) const = default;
};

/// Role of one scalar in the packed parameter vector.
enum class ParamRole { Alpha, Beta, Gamma, X, Y, Z };

/// Packed layout, base to EE: per segment (alpha, beta, x, y); the EE block is
/// (alpha, beta, gamma, x, y, z). Total length 4 * joint_count + 6.
ParamRole param_role(const KinematicModel& model, std::size_t index);
bool is_translation_param(const KinematicModel& model, std::size_t index);

/// One flag per packed scalar; 1 means the optimizer may change it.
class ParamMask {
public:
  ParamMask() = default;
  explicit ParamMask(std::vector<std::uint8_t> flags) : flags_(std::move(flags)) {}
  ParamMask(std::size_t size, bool value) : flags_(size, value ? 1 : 0) {}

  /// Base segment fixed, (beta, y) of the first joint's segment fixed, x and y fixed for
  /// segments leading into a prismatic joint; everything else free.
  static ParamMask defaults_for(const KinematicModel& model);

  std::size_t size() const { return flags_.size(); }
  bool operator[](std::size_t i) const { return flags_[i] != 0; }
  void set(std::size_t i, bool value) { flags_.at(i) = value ? 1 : 0; }
  std::size_t free_count() const;
  std::vector<std::size_t> free_indices() const;
  const std::vector<std::uint8_t>& flags() const { return flags_; }

  bool operator==(const ParamMask&) const = default;

private:
  std::vector<std::uint8_t> flags_;
};

RigidTransform static_segment_transform(const Segment& seg);
RigidTransform ee_segment_transform(const EESegment& ee);
RigidTransform joint_transform(JointKind kind, double q);

/// st(s_0) * jt(q_1) * st(s_1) * ... * jt(q_n) * st(ee).
RigidTransform forward_kinematics(const KinematicModel& model, const JointVector& joints);

/// Forward kinematics plus dT/dk for every packed parameter. Each derivative is the top
/// three rows of the 4x4 homogeneous derivative, so d(T p)/dk_i = D_i * [p; 1].
struct FkJacobian {
  RigidTransform pose;
  std::vector<Eigen::Matrix<double, 3, 4>> dpose;
};
FkJacobian forward_kinematics_jacobian(const KinematicModel& model, const JointVector& joints);

ParamVector pack_params(const KinematicModel& model);
KinematicModel unpack_params(const ParamVector& params, const KinematicModel& layout);

/// Translation entries divided by (multiplied with) `scale`; angles untouched.
ParamVector normalize_params(const KinematicModel& layout, const ParamVector& params, double scale);
ParamVector denormalize_params(const KinematicModel& layout, const ParamVector& params,
                               double scale);

/// Prismatic joint positions scale with the translation parameters.
JointVector normalize_joints(const KinematicModel& model, const JointVector& joints, double scale);

/// Throws InvalidParameterError on non-finite values or non-zero x/y ahead of a prismatic
/// joint.
void validate_model(const KinematicModel& model);

}  // namespace kincal
