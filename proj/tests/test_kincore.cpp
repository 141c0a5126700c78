#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "kincal/errors.hpp"
#include "kincal/kinematics.hpp"
#include "kincal/simulator.hpp"
#include "kincal/transform.hpp"
#include "support/oracles.hpp"

using namespace kincal;

namespace {

Eigen::Matrix4d to4(const RigidTransform& t) { return t.matrix(); }

void expect_near(const Eigen::Matrix4d& a, const Eigen::Matrix4d& b, double tol) {
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), tol) << "a=\n" << a << "\nb=\n" << b;
}

Eigen::Matrix4d oracle_static(const Segment& s) {
  return oracle::hx(s.alpha) * oracle::hy(s.beta) * oracle::ht(s.x, s.y, 0.0);
}

Eigen::Matrix4d oracle_ee(const EESegment& e) {
  return oracle::hx(e.alpha) * oracle::hy(e.beta) * oracle::hz(e.gamma) *
         oracle::ht(e.x, e.y, e.z);
}

Eigen::Matrix4d oracle_fk(const KinematicModel& m, const JointVector& q) {
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  for (std::size_t i = 0; i < m.joint_count(); ++i) {
    t *= oracle_static(m.segments[i]);
    t *= m.segments[i].joint == JointKind::Revolute ? oracle::hz(q[Eigen::Index(i)])
                                                    : oracle::ht(0, 0, q[Eigen::Index(i)]);
  }
  return t * oracle_ee(m.ee);
}

KinematicModel random_model(std::mt19937_64& rng, std::size_t joints, bool with_prismatic) {
  std::uniform_real_distribution<double> ang(-M_PI, M_PI), len(-0.5, 0.5);
  KinematicModel m;
  for (std::size_t i = 0; i < joints; ++i) {
    Segment s{ang(rng), ang(rng), len(rng), len(rng), JointKind::Revolute};
    if (with_prismatic && i % 3 == 1) {
      s.joint = JointKind::Prismatic;
      s.x = s.y = 0.0;
    }
    m.segments.push_back(s);
  }
  m.ee = {ang(rng), ang(rng), ang(rng), len(rng), len(rng), len(rng)};
  return m;
}

JointVector random_joints(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  JointVector q(static_cast<Eigen::Index>(n));
  for (Eigen::Index k = 0; k < q.size(); ++k) q[k] = u(rng);
  return q;
}

}  // namespace

TEST(StaticSegment, ZeroIsIdentity) {
  EXPECT_EQ(to4(static_segment_transform({})), Eigen::Matrix4d::Identity());
}

TEST(StaticSegment, QuarterTurnAboutXMapsYToZ) {
  const RigidTransform t = static_segment_transform({M_PI / 2, 0, 0, 0});
  expect_near(to4(t), oracle_static({M_PI / 2, 0, 0, 0}), 1e-15);
  EXPECT_NEAR((t.rotation * Eigen::Vector3d::UnitY() - Eigen::Vector3d::UnitZ()).norm(), 0.0, 1e-15);
  EXPECT_EQ(t.translation, Eigen::Vector3d::Zero());
}

TEST(StaticSegment, PureOffset) {
  const RigidTransform t = static_segment_transform({0, 0, 0.4, -0.2});
  EXPECT_EQ(t.rotation, Eigen::Matrix3d::Identity());
  EXPECT_EQ(t.translation, Eigen::Vector3d(0.4, -0.2, 0.0));
}

TEST(StaticSegment, NonFiniteThrows) {
  EXPECT_THROW(static_segment_transform({NAN, 0, 0, 0}), InvalidParameterError);
  EXPECT_THROW(static_segment_transform({0, 0, INFINITY, 0}), InvalidParameterError);
}

TEST(EESegment, ZeroIsIdentity) {
  EXPECT_EQ(to4(ee_segment_transform({})), Eigen::Matrix4d::Identity());
}

TEST(EESegment, HalfTurnAboutZWithOffset) {
  const EESegment e{0, 0, M_PI, 0, 0, 0.1};
  expect_near(to4(ee_segment_transform(e)), oracle_ee(e), 1e-15);
  EXPECT_NEAR((ee_segment_transform(e).translation - Eigen::Vector3d(0, 0, 0.1)).norm(), 0, 1e-16);
}

TEST(EESegment, RotationAppliesToTranslation) {
  // rot_x(pi/2) then trans(0,0,1): the z offset ends up along -y.
  const EESegment e{M_PI / 2, 0, 0, 0, 0, 1};
  const RigidTransform t = ee_segment_transform(e);
  expect_near(to4(t), oracle_ee(e), 1e-15);
  EXPECT_NEAR((t.translation - Eigen::Vector3d(0, -1, 0)).norm(), 0.0, 1e-15);
}

TEST(EESegment, NonFiniteThrows) {
  EXPECT_THROW(ee_segment_transform({0, 0, 0, 0, NAN, 0}), InvalidParameterError);
}

TEST(JointTransform, Cases) {
  EXPECT_EQ(to4(joint_transform(JointKind::Revolute, 0.0)), Eigen::Matrix4d::Identity());
  Eigen::Matrix3d half = Eigen::Vector3d(-1, -1, 1).asDiagonal();
  EXPECT_LE((joint_transform(JointKind::Revolute, M_PI).rotation - half).cwiseAbs().maxCoeff(), 1e-15);
  const RigidTransform p = joint_transform(JointKind::Prismatic, 0.25);
  EXPECT_EQ(p.rotation, Eigen::Matrix3d::Identity());
  EXPECT_EQ(p.translation, Eigen::Vector3d(0, 0, 0.25));
  EXPECT_THROW(joint_transform(JointKind::Revolute, NAN), InvalidParameterError);
}

TEST(ForwardKinematics, EmptyModelIsIdentity) {
  EXPECT_EQ(to4(forward_kinematics(KinematicModel{}, JointVector(0))), Eigen::Matrix4d::Identity());
}

TEST(ForwardKinematics, PlanarTwoLink) {
  // Link lengths as x offsets of the segments after each joint; the second offset lives in
  // the EE segment.
  const double l1 = 0.7, l2 = 0.45;
  KinematicModel m;
  m.segments = {{0, 0, 0, 0, JointKind::Revolute}, {0, 0, l1, 0, JointKind::Revolute}};
  m.ee = {0, 0, 0, l2, 0, 0};
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  for (int k = 0; k < 50; ++k) {
    const double q1 = u(rng), q2 = u(rng);
    const Eigen::Vector3d p = forward_kinematics(m, Eigen::Vector2d(q1, q2)).translation;
    EXPECT_NEAR(p.x(), l1 * std::cos(q1) + l2 * std::cos(q1 + q2), 1e-14);
    EXPECT_NEAR(p.y(), l1 * std::sin(q1) + l2 * std::sin(q1 + q2), 1e-14);
    EXPECT_NEAR(p.z(), 0.0, 1e-15);
  }
}

TEST(ForwardKinematics, SingleJointQuarterTurn) {
  KinematicModel m;
  m.segments = {{0, 0, 0, 0, JointKind::Revolute}};
  m.ee = {0, 0, 0, 1, 0, 0};
  const JointVector q = JointVector::Constant(1, M_PI / 2);
  const RigidTransform t = forward_kinematics(m, q);
  EXPECT_NEAR((t.translation - Eigen::Vector3d(0, 1, 0)).norm(), 0.0, 1e-15);
  expect_near(to4(t), oracle_fk(m, q), 1e-15);
}

TEST(ForwardKinematics, ArityMismatchThrows) {
  EXPECT_THROW(forward_kinematics(reference_arm(), JointVector::Zero(6)), DimensionError);
}

TEST(ForwardKinematics, MatchesPerSegmentProductAndIsRigid) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 200; ++k) {
    const KinematicModel m = random_model(rng, 1 + k % 8, k % 2 == 0);
    const JointVector q = random_joints(rng, m.joint_count());
    const RigidTransform t = forward_kinematics(m, q);
    EXPECT_TRUE(is_rigid(t));
    expect_near(to4(t), oracle_fk(m, q), 1e-12);
  }
}

TEST(ForwardKinematics, ScaleEquivariance) {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 100; ++k) {
    const KinematicModel m = random_model(rng, 6, true);
    const JointVector q = random_joints(rng, 6);
    const double s = 0.3 + 3.0 * double(k) / 100.0;
    const KinematicModel ms = unpack_params(normalize_params(m, pack_params(m), 1.0 / s), m);
    const JointVector qs = normalize_joints(m, q, 1.0 / s);
    const RigidTransform a = forward_kinematics(m, q), b = forward_kinematics(ms, qs);
    EXPECT_LE((a.rotation - b.rotation).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LE((b.translation - s * a.translation).norm(), 1e-12 * (1 + s));
  }
}

TEST(FkJacobian, MatchesCentralDifferences) {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 40; ++k) {
    const KinematicModel m = random_model(rng, 1 + k % 7, k % 3 == 0);
    const JointVector q = random_joints(rng, m.joint_count());
    const FkJacobian j = forward_kinematics_jacobian(m, q);
    expect_near(to4(j.pose), to4(forward_kinematics(m, q)), 1e-13);
    const ParamVector k0 = pack_params(m);
    for (std::size_t i = 0; i < m.param_count(); ++i) {
      ParamVector kp = k0, km = k0;
      kp[Eigen::Index(i)] += 1e-6;
      km[Eigen::Index(i)] -= 1e-6;
      const Eigen::Matrix4d fd =
          (to4(forward_kinematics(unpack_params(kp, m), q)) -
           to4(forward_kinematics(unpack_params(km, m), q))) / 2e-6;
      EXPECT_LE((j.dpose[i] - fd.topRows<3>()).cwiseAbs().maxCoeff(), 1e-8) << "param " << i;
    }
  }
}

TEST(PackParams, RoundTripIsBitExact) {
  std::mt19937_64 rng(14);
  for (int k = 0; k < 50; ++k) {
    const KinematicModel m = random_model(rng, std::size_t(k % 9), false);
    EXPECT_EQ(unpack_params(pack_params(m), m), m);
    ParamVector v = ParamVector::Random(Eigen::Index(m.param_count()));
    EXPECT_EQ(pack_params(unpack_params(v, m)), v);
  }
}

TEST(PackParams, LayoutOrder) {
  KinematicModel m;
  m.segments = {{1, 2, 3, 4, JointKind::Revolute}, {5, 6, 7, 8, JointKind::Revolute}};
  m.ee = {9, 10, 11, 12, 13, 14};
  const ParamVector v = pack_params(m);
  for (int i = 0; i < 14; ++i) EXPECT_EQ(v[i], i + 1);
  EXPECT_EQ(param_role(m, 4), ParamRole::Alpha);
  EXPECT_EQ(param_role(m, 7), ParamRole::Y);
  EXPECT_EQ(param_role(m, 10), ParamRole::Gamma);
  EXPECT_EQ(param_role(m, 13), ParamRole::Z);
  EXPECT_FALSE(is_translation_param(m, 10));
  EXPECT_TRUE(is_translation_param(m, 11));
}

TEST(PackParams, WrongLengthThrows) {
  EXPECT_THROW(unpack_params(ParamVector::Zero(33), reference_arm()), DimensionError);
}

TEST(ParamMask, SevenJointArmHas28Calibratable) {
  const KinematicModel arm = reference_arm();
  ASSERT_EQ(arm.param_count(), 34u);
  const ParamMask mask = ParamMask::defaults_for(arm);
  EXPECT_EQ(mask.size(), 34u);
  EXPECT_EQ(mask.free_count(), 28u);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_FALSE(mask[k]);
  EXPECT_TRUE(mask[4]);
  EXPECT_FALSE(mask[5]);  // beta of the segment after joint 1
  EXPECT_TRUE(mask[6]);
  EXPECT_FALSE(mask[7]);  // y of the same segment
}

TEST(ParamMask, PrismaticSegmentOnlyContributesAngles) {
  KinematicModel m;
  m.segments = {{0, 0, 0, 0, JointKind::Revolute},
                {0.1, 0.2, 0.3, 0.4, JointKind::Revolute},
                {0.1, 0.2, 0.0, 0.0, JointKind::Prismatic}};
  const ParamMask mask = ParamMask::defaults_for(m);
  EXPECT_TRUE(mask[8]);
  EXPECT_TRUE(mask[9]);
  EXPECT_FALSE(mask[10]);
  EXPECT_FALSE(mask[11]);
}

TEST(Normalize, Cases) {
  KinematicModel m;
  m.segments = {{0.3, 0, 0.4, 0, JointKind::Revolute}};
  ParamVector v = pack_params(m);
  EXPECT_EQ(normalize_params(m, v, 1.0), v);
  const ParamVector n = normalize_params(m, v, 2.0);
  EXPECT_EQ(n[2], 0.2);
  EXPECT_EQ(n[0], 0.3);
  EXPECT_THROW(normalize_params(m, v, 0.0), InvalidParameterError);
  EXPECT_THROW(denormalize_params(m, v, -1.0), InvalidParameterError);
}

TEST(Normalize, RoundTrip) {
  std::mt19937_64 rng(15);
  const KinematicModel m = random_model(rng, 7, true);
  for (int k = 0; k < 100; ++k) {
    const ParamVector v = ParamVector::Random(34);
    const ParamVector r = denormalize_params(m, normalize_params(m, v, 3.7), 3.7);
    EXPECT_LT((r - v).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ValidateModel, PrismaticOffsetsMustBeZero) {
  KinematicModel m;
  m.segments = {{0, 0, 0.1, 0, JointKind::Prismatic}};
  EXPECT_THROW(validate_model(m), InvalidParameterError);
  m.segments[0].x = 0.0;
  EXPECT_NO_THROW(validate_model(m));
}

TEST(RotationAngle, SmallAndLargeAngles) {
  EXPECT_NEAR(rotation_angle_between(Eigen::Matrix3d::Identity(), rot_z(1e-9).rotation), 1e-9, 1e-20);
  EXPECT_NEAR(rotation_angle_between(rot_x(0.3).rotation, rot_x(-0.2).rotation), 0.5, 1e-15);
  EXPECT_NEAR(rotation_angle_between(Eigen::Matrix3d::Identity(), rot_y(M_PI).rotation), M_PI, 1e-12);
}
