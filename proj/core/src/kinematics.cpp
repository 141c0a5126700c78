#include "kincal/kinematics.hpp"

#include <cmath>
#include <string>

#include "kincal/errors.hpp"

namespace kincal {
namespace {

Eigen::Matrix3d rx(double a) { return rot_x(a).rotation; }
Eigen::Matrix3d ry(double a) { return rot_y(a).rotation; }
Eigen::Matrix3d rz(double a) { return rot_z(a).rotation; }

Eigen::Matrix3d drx(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Eigen::Matrix3d m;
  m << 0, 0, 0, 0, -s, -c, 0, c, -s;
  return m;
}

Eigen::Matrix3d dry(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Eigen::Matrix3d m;
  m << -s, 0, c, 0, 0, 0, -c, 0, -s;
  return m;
}

Eigen::Matrix3d drz(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Eigen::Matrix3d m;
  m << -s, -c, 0, c, -s, 0, 0, 0, 0;
  return m;
}

Eigen::Matrix4d homogeneous(const Eigen::Matrix3d& r, const Eigen::Vector3d& t, double w = 1.0) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m.topLeftCorner<3, 3>() = r;
  m.topRightCorner<3, 1>() = t;
  m(3, 3) = w;
  return m;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw InvalidParameterError(std::string("non-finite ") + what);
}

void require_finite(const Segment& s) {
  require_finite(s.alpha, "segment alpha");
  require_finite(s.beta, "segment beta");
  require_finite(s.x, "segment x");
  require_finite(s.y, "segment y");
}

void require_finite(const EESegment& e) {
  require_finite(e.alpha, "ee alpha");
  require_finite(e.beta, "ee beta");
  require_finite(e.gamma, "ee gamma");
  require_finite(e.x, "ee x");
  require_finite(e.y, "ee y");
  require_finite(e.z, "ee z");
}

void require_joint_count(const KinematicModel& model, const JointVector& joints) {
  if (static_cast<std::size_t>(joints.size()) != model.joint_count()) {
    throw DimensionError("joint vector has " + std::to_string(joints.size()) +
                         " entries, model has " + std::to_string(model.joint_count()) +
                         " joints");
  }
}

}  // namespace

ParamRole param_role(const KinematicModel& model, std::size_t index) {
  const std::size_t ee_offset = 4 * model.joint_count();
  if (index < ee_offset) {
    static constexpr ParamRole roles[4] = {ParamRole::Alpha, ParamRole::Beta, ParamRole::X,
                                           ParamRole::Y};
    return roles[index % 4];
  }
  static constexpr ParamRole ee_roles[6] = {ParamRole::Alpha, ParamRole::Beta, ParamRole::Gamma,
                                            ParamRole::X,     ParamRole::Y,    ParamRole::Z};
  if (index - ee_offset >= 6) throw DimensionError("parameter index out of range");
  return ee_roles[index - ee_offset];
}

bool is_translation_param(const KinematicModel& model, std::size_t index) {
  const ParamRole r = param_role(model, index);
  return r == ParamRole::X || r == ParamRole::Y || r == ParamRole::Z;
}

ParamMask ParamMask::defaults_for(const KinematicModel& model) {
  ParamMask mask(model.param_count(), true);
  const std::size_t n = model.joint_count();
  if (n == 0) return mask;
  for (std::size_t k = 0; k < 4; ++k) mask.set(k, false);
  if (n >= 2) {
    // (beta, y) of T^{J2 -> J1} absorb the base's missing rot_z / trans_z freedom.
    mask.set(4 + 1, false);
    mask.set(4 + 3, false);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (model.segments[i].joint == JointKind::Prismatic) {
      mask.set(4 * i + 2, false);
      mask.set(4 * i + 3, false);
    }
  }
  return mask;
}

std::size_t ParamMask::free_count() const {
  std::size_t c = 0;
  for (auto f : flags_) c += f != 0;
  return c;
}

std::vector<std::size_t> ParamMask::free_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < flags_.size(); ++i)
    if (flags_[i]) out.push_back(i);
  return out;
}

RigidTransform static_segment_transform(const Segment& seg) {
  require_finite(seg);
  return rot_x(seg.alpha) * rot_y(seg.beta) * trans(seg.x, seg.y, 0.0);
}

RigidTransform ee_segment_transform(const EESegment& ee) {
  require_finite(ee);
  return rot_x(ee.alpha) * rot_y(ee.beta) * rot_z(ee.gamma) * trans(ee.x, ee.y, ee.z);
}

RigidTransform joint_transform(JointKind kind, double q) {
  require_finite(q, "joint position");
  return kind == JointKind::Revolute ? rot_z(q) : trans(0.0, 0.0, q);
}

RigidTransform forward_kinematics(const KinematicModel& model, const JointVector& joints) {
  require_joint_count(model, joints);
  RigidTransform t;
  for (std::size_t i = 0; i < model.joint_count(); ++i) {
    t = t * static_segment_transform(model.segments[i]);
    t = t * joint_transform(model.segments[i].joint, joints[static_cast<Eigen::Index>(i)]);
  }
  return t * ee_segment_transform(model.ee);
}

FkJacobian forward_kinematics_jacobian(const KinematicModel& model, const JointVector& joints) {
  require_joint_count(model, joints);
  const std::size_t n = model.joint_count();
  const std::size_t factor_count = 2 * n + 1;

  std::vector<Eigen::Matrix4d> factors(factor_count);
  for (std::size_t i = 0; i < n; ++i) {
    factors[2 * i] = static_segment_transform(model.segments[i]).matrix();
    factors[2 * i + 1] =
        joint_transform(model.segments[i].joint, joints[static_cast<Eigen::Index>(i)]).matrix();
  }
  factors[2 * n] = ee_segment_transform(model.ee).matrix();

  std::vector<Eigen::Matrix4d> prefix(factor_count + 1), suffix(factor_count + 1);
  prefix[0].setIdentity();
  for (std::size_t k = 0; k < factor_count; ++k) prefix[k + 1] = prefix[k] * factors[k];
  suffix[factor_count].setIdentity();
  for (std::size_t k = factor_count; k-- > 0;) suffix[k] = factors[k] * suffix[k + 1];

  FkJacobian out;
  const Eigen::Matrix4d& full = prefix[factor_count];
  out.pose.rotation = full.topLeftCorner<3, 3>();
  out.pose.translation = full.topRightCorner<3, 1>();
  out.dpose.resize(model.param_count());

  auto store = [&](std::size_t param, std::size_t factor, const Eigen::Matrix4d& d) {
    const Eigen::Matrix4d full_d = prefix[factor] * d * suffix[factor + 1];
    out.dpose[param] = full_d.topRows<3>();
  };

  for (std::size_t i = 0; i < n; ++i) {
    const Segment& s = model.segments[i];
    const Eigen::Vector3d offset(s.x, s.y, 0.0);
    const Eigen::Matrix3d a = rx(s.alpha), b = ry(s.beta);
    const Eigen::Matrix3d da = drx(s.alpha) * b, db = a * dry(s.beta), ab = a * b;
    store(4 * i + 0, 2 * i, homogeneous(da, da * offset, 0.0));
    store(4 * i + 1, 2 * i, homogeneous(db, db * offset, 0.0));
    store(4 * i + 2, 2 * i, homogeneous(Eigen::Matrix3d::Zero(), ab.col(0), 0.0));
    store(4 * i + 3, 2 * i, homogeneous(Eigen::Matrix3d::Zero(), ab.col(1), 0.0));
  }

  const EESegment& e = model.ee;
  const Eigen::Vector3d offset(e.x, e.y, e.z);
  const Eigen::Matrix3d a = rx(e.alpha), b = ry(e.beta), c = rz(e.gamma);
  const Eigen::Matrix3d da = drx(e.alpha) * b * c, db = a * dry(e.beta) * c,
                        dc = a * b * drz(e.gamma), abc = a * b * c;
  const std::size_t base = 4 * n, f = 2 * n;
  store(base + 0, f, homogeneous(da, da * offset, 0.0));
  store(base + 1, f, homogeneous(db, db * offset, 0.0));
  store(base + 2, f, homogeneous(dc, dc * offset, 0.0));
  store(base + 3, f, homogeneous(Eigen::Matrix3d::Zero(), abc.col(0), 0.0));
  store(base + 4, f, homogeneous(Eigen::Matrix3d::Zero(), abc.col(1), 0.0));
  store(base + 5, f, homogeneous(Eigen::Matrix3d::Zero(), abc.col(2), 0.0));
  return out;
}

ParamVector pack_params(const KinematicModel& model) {
  ParamVector v(static_cast<Eigen::Index>(model.param_count()));
  Eigen::Index k = 0;
  for (const Segment& s : model.segments) {
    v[k++] = s.alpha;
    v[k++] = s.beta;
    v[k++] = s.x;
    v[k++] = s.y;
  }
  v[k++] = model.ee.alpha;
  v[k++] = model.ee.beta;
  v[k++] = model.ee.gamma;
  v[k++] = model.ee.x;
  v[k++] = model.ee.y;
  v[k++] = model.ee.z;
  return v;
}

KinematicModel unpack_params(const ParamVector& params, const KinematicModel& layout) {
  if (static_cast<std::size_t>(params.size()) != layout.param_count()) {
    throw DimensionError("parameter vector has " + std::to_string(params.size()) +
                         " entries, layout expects " + std::to_string(layout.param_count()));
  }
  KinematicModel m = layout;
  Eigen::Index k = 0;
  for (Segment& s : m.segments) {
    s.alpha = params[k++];
    s.beta = params[k++];
    s.x = params[k++];
    s.y = params[k++];
  }
  m.ee.alpha = params[k++];
  m.ee.beta = params[k++];
  m.ee.gamma = params[k++];
  m.ee.x = params[k++];
  m.ee.y = params[k++];
  m.ee.z = params[k++];
  return m;
}

namespace {

ParamVector rescale(const KinematicModel& layout, const ParamVector& params, double scale,
                    bool divide) {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw InvalidParameterError("normalization scale must be positive and finite");
  if (static_cast<std::size_t>(params.size()) != layout.param_count())
    throw DimensionError("parameter vector does not match the model layout");
  ParamVector out = params;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (is_translation_param(layout, static_cast<std::size_t>(i)))
      out[i] = divide ? out[i] / scale : out[i] * scale;
  }
  return out;
}

}  // namespace

ParamVector normalize_params(const KinematicModel& layout, const ParamVector& params,
                             double scale) {
  return rescale(layout, params, scale, true);
}

ParamVector denormalize_params(const KinematicModel& layout, const ParamVector& params,
                               double scale) {
  return rescale(layout, params, scale, false);
}

JointVector normalize_joints(const KinematicModel& model, const JointVector& joints,
                             double scale) {
  require_joint_count(model, joints);
  if (!(scale > 0.0)) throw InvalidParameterError("normalization scale must be positive");
  JointVector out = joints;
  for (std::size_t i = 0; i < model.joint_count(); ++i)
    if (model.segments[i].joint == JointKind::Prismatic)
      out[static_cast<Eigen::Index>(i)] /= scale;
  return out;
}

void validate_model(const KinematicModel& model) {
  for (std::size_t i = 0; i < model.segments.size(); ++i) {
    const Segment& s = model.segments[i];
    require_finite(s);
    if (s.joint == JointKind::Prismatic && (s.x != 0.0 || s.y != 0.0)) {
      throw InvalidParameterError("segment " + std::to_string(i) +
                                  " precedes a prismatic joint and must have x = y = 0");
    }
  }
  require_finite(model.ee);
}

}  // namespace kincal
