#include "kincal/transform.hpp"

#include <algorithm>
#include <cmath>

namespace kincal {

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

RigidTransform rot_x(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  RigidTransform t;
  t.rotation << 1, 0, 0, 0, c, -s, 0, s, c;
  return t;
}

RigidTransform rot_y(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  RigidTransform t;
  t.rotation << c, 0, s, 0, 1, 0, -s, 0, c;
  return t;
}

RigidTransform rot_z(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  RigidTransform t;
  t.rotation << c, -s, 0, s, c, 0, 0, 0, 1;
  return t;
}

RigidTransform trans(double x, double y, double z) {
  RigidTransform t;
  t.translation = Eigen::Vector3d(x, y, z);
  return t;
}

bool is_rigid(const RigidTransform& t, double tol) {
  if (!t.rotation.allFinite() || !t.translation.allFinite()) return false;
  const Eigen::Matrix3d e = t.rotation.transpose() * t.rotation - Eigen::Matrix3d::Identity();
  if (e.cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(t.rotation.determinant() - 1.0) <= tol;
}

double rotation_angle_between(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  const Eigen::Matrix3d r = a.transpose() * b;
  // atan2 form stays accurate for small angles where acos((tr-1)/2) loses digits.
  const Eigen::Vector3d axis(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double sin_term = 0.5 * axis.norm();
  const double cos_term = 0.5 * (r.trace() - 1.0);
  return std::atan2(sin_term, std::clamp(cos_term, -1.0, 1.0));
}

}  // namespace kincal
