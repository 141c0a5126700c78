#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace kincal {

/// Rigid motion p -> R p + t. Rotation is kept as a 3x3 matrix and only ever built from
/// elementary axis rotations and their products.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  RigidTransform operator*(const RigidTransform& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }

  Eigen::Vector3d operator*(const Eigen::Vector3d& p) const { return rotation * p + translation; }

  RigidTransform inverse() const {
    const Eigen::Matrix3d rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  Eigen::Matrix4d matrix() const;
};

RigidTransform rot_x(double angle);
RigidTransform rot_y(double angle);
RigidTransform rot_z(double angle);
RigidTransform trans(double x, double y, double z);

/// Orthonormality (per entry) and unit determinant within `tol`.
bool is_rigid(const RigidTransform& t, double tol = 1e-9);

/// Geodesic angle of R_a^T R_b in radians.
double rotation_angle_between(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);

}  // namespace kincal
