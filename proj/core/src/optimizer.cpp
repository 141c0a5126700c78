#include "kincal/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <mutex>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "kincal/errors.hpp"
#include "kincal/parallel.hpp"

namespace kincal {
namespace {

constexpr std::size_t kChunk = 4096;

std::mutex& warning_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& warning_handler() {
  static WarningHandler h = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
  return h;
}

Eigen::Vector4d homog(const Eigen::Vector3d& p) { return {p.x(), p.y(), p.z(), 1.0}; }

std::size_t chunk_count(std::size_t n) { return (n + kChunk - 1) / kChunk; }

// Row of d r / d k for the listed packed indices.
void gradient_row(const FkJacobian* ja, const FkJacobian* jb, const Eigen::Vector3d& p_a,
                  const Eigen::Vector3d& p_b, const Eigen::Vector3d& n,
                  const std::vector<std::size_t>& free, double* out) {
  const Eigen::Vector4d ha = homog(p_a), hb = homog(p_b);
  for (std::size_t f = 0; f < free.size(); ++f) {
    const std::size_t k = free[f];
    double v = 0.0;
    if (ja) v += n.dot(ja->dpose[k] * ha);
    if (jb) v -= n.dot(jb->dpose[k] * hb);
    out[f] = v;
  }
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

void check_arity(const KinematicModel& model, std::size_t joints) {
  if (model.joint_count() != joints)
    throw DimensionError("model has " + std::to_string(model.joint_count()) +
                         " joints, datasets carry " + std::to_string(joints));
}

// Rank test on the diagonally scaled normal matrix; returns the packed indices spanned by
// its (numerically) null directions.
std::vector<std::size_t> unconstrained_params(const Eigen::MatrixXd& h,
                                              const std::vector<std::size_t>& free,
                                              double tolerance) {
  const Eigen::Index n = h.rows();
  std::vector<std::size_t> out;
  Eigen::VectorXd d(n);
  bool zero_diag = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(h(i, i) > 0.0)) {
      out.push_back(free[std::size_t(i)]);
      zero_diag = true;
      d(i) = 1.0;
    } else {
      d(i) = 1.0 / std::sqrt(h(i, i));
    }
  }
  if (zero_diag) return out;
  const Eigen::MatrixXd s = d.asDiagonal() * h * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double top = ev(n - 1);
  std::vector<std::uint8_t> flagged(std::size_t(n), 0);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (ev(k) > tolerance * top) break;
    const Eigen::VectorXd v = eig.eigenvectors().col(k);
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::abs(v(i)) > 0.1) flagged[std::size_t(i)] = 1;
  }
  for (Eigen::Index i = 0; i < n; ++i)
    if (flagged[std::size_t(i)]) out.push_back(free[std::size_t(i)]);
  return out;
}

}  // namespace

void set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(warning_mutex());
  warning_handler() = std::move(handler);
}

void warn(const std::string& message) {
  std::lock_guard lock(warning_mutex());
  if (warning_handler()) warning_handler()(message);
}

void CalibrationConfig::check() const {
  if (filter.half_rows < 0 || filter.half_cols < 0)
    throw InvalidParameterError("window half sizes must be >= 0");
  if (!(filter.g_min >= 0.0 && filter.g_min <= 1.0))
    throw InvalidParameterError("g_min must lie in [0, 1]");
  if (!(d_max > 0.0) || !std::isfinite(d_max)) throw InvalidParameterError("d_max must be > 0");
  if (!(f_min >= -1.0 && f_min <= 1.0)) throw InvalidParameterError("f_min must lie in [-1, 1]");
  if (!(epsilon > 0.0)) throw InvalidParameterError("epsilon must be > 0");
  if (i_max < 1) throw InvalidParameterError("i_max must be >= 1");
  if (!(lm.initial_lambda > 0.0) || !(lm.lambda_increase > 1.0) || !(lm.lambda_decrease > 1.0))
    throw InvalidParameterError("LM damping factors out of range");
  if (lm.max_iterations < 1) throw InvalidParameterError("LM needs at least one iteration");
}

double residual(const Eigen::Vector3d& p_a, const JointVector& q_a, const Eigen::Vector3d& p_b,
                const JointVector& q_b, const Eigen::Vector3d& normal,
                const KinematicModel& model) {
  const Eigen::Vector3d a = forward_kinematics(model, q_a) * p_a;
  const Eigen::Vector3d b = forward_kinematics(model, q_b) * p_b;
  return (a - b).dot(normal);
}

Eigen::VectorXd residual_gradient(const Eigen::Vector3d& p_a, const JointVector& q_a,
                                  const Eigen::Vector3d& p_b, const JointVector& q_b,
                                  const Eigen::Vector3d& normal, const KinematicModel& model) {
  const FkJacobian ja = forward_kinematics_jacobian(model, q_a);
  const FkJacobian jb = forward_kinematics_jacobian(model, q_b);
  Eigen::VectorXd g(Eigen::Index(model.param_count()));
  gradient_row(&ja, &jb, p_a, p_b, normal, all_indices(model.param_count()), g.data());
  return g;
}

double residual(const Match& m, const std::vector<ScanDataset>& datasets,
                const KinematicModel& model) {
  if (m.dataset_a >= datasets.size() || m.dataset_b >= datasets.size())
    throw DimensionError("match refers to a dataset that does not exist");
  const ScanDataset& a = datasets[m.dataset_a];
  const ScanDataset& b = datasets[m.dataset_b];
  if (m.cell_a >= a.size() || m.cell_b >= b.size())
    throw DimensionError("match refers to a cell outside its grid");
  return residual(a.points[m.cell_a], a.joints[m.cell_a], b.points[m.cell_b], b.joints[m.cell_b],
                  m.normal_a, model);
}

BundleProblem::BundleProblem(const std::vector<ScanDataset>& datasets, const MatchSet& matches,
                             const std::vector<std::size_t>& anchored) {
  if (!datasets.empty()) joint_count_ = datasets.front().joint_count;
  for (const auto& ds : datasets)
    if (ds.joint_count != joint_count_)
      throw DimensionError("datasets disagree on joint arity");

  std::vector<std::uint8_t> is_anchored(datasets.size(), 0);
  for (std::size_t a : anchored) {
    if (a >= datasets.size()) throw ConfigurationError("anchored dataset index out of range");
    is_anchored[a] = 1;
  }

  // Only datasets that appear in a match need their pose slots resolved.
  std::vector<std::uint8_t> used(datasets.size(), 0);
  for (const Match& m : matches) {
    if (m.dataset_a >= datasets.size() || m.dataset_b >= datasets.size())
      throw DimensionError("match refers to a dataset that does not exist");
    used[m.dataset_a] = used[m.dataset_b] = 1;
  }
  std::vector<PoseGroups> groups(datasets.size());
  std::vector<std::int32_t> base(datasets.size(), -1);
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    if (!used[d] || is_anchored[d]) continue;
    groups[d] = group_poses(datasets[d]);
    base[d] = std::int32_t(slots_.size());
    slots_.insert(slots_.end(), groups[d].joints.begin(), groups[d].joints.end());
  }

  auto slot_for = [&](std::uint32_t d, std::uint32_t cell) -> std::int32_t {
    if (is_anchored[d]) return -1;
    return base[d] + std::int32_t(groups[d].slot_of_cell[cell]);
  };
  terms_.reserve(matches.size());
  for (const Match& m : matches) {
    const ScanDataset& a = datasets[m.dataset_a];
    const ScanDataset& b = datasets[m.dataset_b];
    if (m.cell_a >= a.size() || m.cell_b >= b.size())
      throw DimensionError("match refers to a cell outside its grid");
    terms_.push_back({slot_for(m.dataset_a, m.cell_a), slot_for(m.dataset_b, m.cell_b),
                      a.points[m.cell_a], b.points[m.cell_b], m.normal_a});
  }
}

std::vector<RigidTransform> BundleProblem::poses(const KinematicModel& model) const {
  check_arity(model, joint_count_);
  std::vector<RigidTransform> out(slots_.size());
  for (std::size_t s = 0; s < slots_.size(); ++s) out[s] = forward_kinematics(model, slots_[s]);
  return out;
}

Eigen::VectorXd BundleProblem::residuals(const KinematicModel& model, int threads) const {
  const std::vector<RigidTransform> t = poses(model);
  Eigen::VectorXd r(Eigen::Index(terms_.size()));
  parallel_for(chunk_count(terms_.size()), threads, [&](std::size_t c) {
    const std::size_t end = std::min(terms_.size(), (c + 1) * kChunk);
    for (std::size_t k = c * kChunk; k < end; ++k) {
      const Term& term = terms_[k];
      const Eigen::Vector3d a = term.slot_a < 0 ? term.p_a : t[std::size_t(term.slot_a)] * term.p_a;
      const Eigen::Vector3d b = term.slot_b < 0 ? term.p_b : t[std::size_t(term.slot_b)] * term.p_b;
      r(Eigen::Index(k)) = (a - b).dot(term.normal);
    }
  });
  return r;
}

double BundleProblem::cost(const KinematicModel& model, int threads) const {
  const Eigen::VectorXd r = residuals(model, threads);
  double total = 0.0;
  for (std::size_t c = 0; c < chunk_count(terms_.size()); ++c) {
    const std::size_t begin = c * kChunk;
    const std::size_t len = std::min(terms_.size(), begin + kChunk) - begin;
    total += r.segment(Eigen::Index(begin), Eigen::Index(len)).squaredNorm();
  }
  return total;
}

Eigen::MatrixXd BundleProblem::jacobian(const KinematicModel& model) const {
  check_arity(model, joint_count_);
  std::vector<FkJacobian> jac(slots_.size());
  for (std::size_t s = 0; s < slots_.size(); ++s)
    jac[s] = forward_kinematics_jacobian(model, slots_[s]);
  const std::vector<std::size_t> free = all_indices(model.param_count());
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> j(
      Eigen::Index(terms_.size()), Eigen::Index(free.size()));
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const Term& t = terms_[k];
    gradient_row(t.slot_a < 0 ? nullptr : &jac[std::size_t(t.slot_a)],
                 t.slot_b < 0 ? nullptr : &jac[std::size_t(t.slot_b)], t.p_a, t.p_b, t.normal,
                 free, j.row(Eigen::Index(k)).data());
  }
  return j;
}

BundleProblem::Normal BundleProblem::normal_equations(const KinematicModel& model,
                                                      const std::vector<std::size_t>& free,
                                                      int threads) const {
  check_arity(model, joint_count_);
  for (std::size_t k : free)
    if (k >= model.param_count()) throw DimensionError("free index out of range");
  std::vector<FkJacobian> jac(slots_.size());
  parallel_for(slots_.size(), threads,
               [&](std::size_t s) { jac[s] = forward_kinematics_jacobian(model, slots_[s]); });

  const Eigen::Index nf = Eigen::Index(free.size());
  const std::size_t chunks = chunk_count(terms_.size());
  std::vector<Normal> parts(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(terms_.size(), begin + kChunk);
    const Eigen::Index rows = Eigen::Index(end - begin);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> j(rows, nf);
    Eigen::VectorXd r(rows);
    for (std::size_t k = begin; k < end; ++k) {
      const Term& t = terms_[k];
      const FkJacobian* ja = t.slot_a < 0 ? nullptr : &jac[std::size_t(t.slot_a)];
      const FkJacobian* jb = t.slot_b < 0 ? nullptr : &jac[std::size_t(t.slot_b)];
      const Eigen::Vector3d a = ja ? ja->pose * t.p_a : t.p_a;
      const Eigen::Vector3d b = jb ? jb->pose * t.p_b : t.p_b;
      r(Eigen::Index(k - begin)) = (a - b).dot(t.normal);
      gradient_row(ja, jb, t.p_a, t.p_b, t.normal, free, j.row(Eigen::Index(k - begin)).data());
    }
    Normal& part = parts[c];
    part.h = Eigen::MatrixXd::Zero(nf, nf);
    part.h.selfadjointView<Eigen::Lower>().rankUpdate(j.transpose());
    part.g = j.transpose() * r;
    part.cost = r.squaredNorm();
  });

  Normal out;
  out.h = Eigen::MatrixXd::Zero(nf, nf);
  out.g = Eigen::VectorXd::Zero(nf);
  for (const Normal& p : parts) {
    out.h += p.h;
    out.g += p.g;
    out.cost += p.cost;
  }
  out.h = out.h.selfadjointView<Eigen::Lower>();
  return out;
}

double total_error(const BundleProblem& problem, const KinematicModel& model, int threads) {
  if (problem.size() == 0) {
    warn("total error of an empty match set is defined as 0; the problem is degenerate");
    return 0.0;
  }
  return problem.cost(model, threads);
}

double total_error(const MatchSet& ms, const std::vector<ScanDataset>& datasets,
                   const KinematicModel& model) {
  return total_error(BundleProblem(datasets, ms), model);
}

LmResult lm_minimize(const BundleProblem& problem, const KinematicModel& model,
                     const ParamMask& mask, const LmOptions& options, int threads) {
  if (mask.size() != model.param_count())
    throw DimensionError("mask has " + std::to_string(mask.size()) + " flags, model has " +
                         std::to_string(model.param_count()) + " parameters");
  LmResult res;
  res.model = model;
  const std::vector<std::size_t> free = mask.free_indices();
  if (free.empty()) {
    res.no_op = true;
    res.converged = true;
    res.initial_cost = res.final_cost = total_error(problem, model, threads);
    res.accepted_costs.push_back(res.initial_cost);
    return res;
  }
  if (problem.size() < free.size())
    throw SingularSystemError("fewer residuals (" + std::to_string(problem.size()) +
                                  ") than free parameters (" + std::to_string(free.size()) + ")",
                              free);

  ParamVector x = pack_params(model);
  BundleProblem::Normal ne = problem.normal_equations(model, free, threads);
  {
    const std::vector<std::size_t> bad = unconstrained_params(ne.h, free, options.rank_tolerance);
    if (!bad.empty()) {
      std::ostringstream msg;
      msg << "normal equations are rank deficient; unconstrained parameters:";
      for (std::size_t i : bad) msg << ' ' << i;
      throw SingularSystemError(msg.str(), bad);
    }
  }
  res.initial_cost = ne.cost;
  res.accepted_costs.push_back(ne.cost);
  double cost = ne.cost;
  double lambda = options.initial_lambda;

  for (int it = 0; it < options.max_iterations; ++it) {
    if (ne.g.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
      res.converged = true;
      break;
    }
    res.iterations = it + 1;
    Eigen::MatrixXd a = ne.h;
    a.diagonal() += lambda * ne.h.diagonal();
    const Eigen::VectorXd step = a.ldlt().solve(-ne.g);

    ParamVector trial = x;
    for (std::size_t f = 0; f < free.size(); ++f) trial(Eigen::Index(free[f])) += step(Eigen::Index(f));
    const KinematicModel trial_model = unpack_params(trial, model);
    const double trial_cost = problem.cost(trial_model, threads);

    if (std::isfinite(trial_cost) && trial_cost < cost) {
      const double x_norm = x.lpNorm<Eigen::Infinity>();
      x = trial;
      res.model = trial_model;
      cost = trial_cost;
      res.accepted_costs.push_back(cost);
      lambda /= options.lambda_decrease;
      if (step.lpNorm<Eigen::Infinity>() <= 1e-15 * (x_norm + 1e-15)) {
        res.converged = true;
        break;
      }
      ne = problem.normal_equations(res.model, free, threads);
    } else {
      lambda *= options.lambda_increase;
      // No step of any length lowers the cost any more: at the floating-point minimum.
      if (lambda > 1e16) {
        res.converged = true;
        break;
      }
    }
  }
  res.final_cost = cost;
  return res;
}

ScanDataset normalize_dataset(const ScanDataset& ds, const KinematicModel& model, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw InvalidParameterError("normalization scale must be positive");
  ScanDataset out = ds;
  for (auto& p : out.points) p /= scale;
  bool prismatic = false;
  for (const auto& s : model.segments) prismatic = prismatic || s.joint == JointKind::Prismatic;
  if (prismatic)
    for (auto& q : out.joints) q = normalize_joints(model, q, scale);
  return out;
}

double calibration_scale(const std::vector<ScanDataset>& datasets, const KinematicModel& k_init,
                         const CalibrationConfig& cfg) {
  if (datasets.empty()) throw ConfigurationError("no datasets");
  auto project = [&](std::size_t d) {
    const bool anchored = std::find(cfg.anchored_datasets.begin(), cfg.anchored_datasets.end(),
                                    d) != cfg.anchored_datasets.end();
    return anchored ? project_rigid(datasets[d], RigidTransform::identity())
                    : project_to_base(datasets[d], k_init);
  };
  if (!cfg.center_shift) return compute_scale(project(0));

  std::vector<ProjectedCloud> clouds;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  std::size_t count = 0;
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    clouds.push_back(project(d));
    for (std::size_t c = 0; c < clouds.back().size(); ++c)
      if (clouds.back().is_valid(c)) {
        sum += clouds.back().points[c];
        ++count;
      }
  }
  if (count == 0) throw InvalidInputError("datasets contain no valid points");
  const Eigen::Vector3d centroid = sum / double(count);
  double norm_sum = 0.0;
  for (const auto& cl : clouds)
    for (std::size_t c = 0; c < cl.size(); ++c)
      if (cl.is_valid(c)) norm_sum += (cl.points[c] - centroid).norm();
  const double s = norm_sum / double(count);
  if (!(s > 0.0)) throw InvalidInputError("degenerate point cloud: zero spread");
  return s;
}

CalibrationReport calibrate(const std::vector<ScanDataset>& datasets, const KinematicModel& k_init,
                            const CalibrationConfig& cfg, const IterationCallback& on_iteration) {
  const auto t0 = std::chrono::steady_clock::now();
  if (datasets.size() < 2) throw ConfigurationError("calibration needs at least two datasets");
  cfg.check();
  validate_model(k_init);
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    datasets[d].check();
    if (datasets[d].joint_count != k_init.joint_count())
      throw DimensionError("dataset " + std::to_string(d) + " has " +
                           std::to_string(datasets[d].joint_count) + " joints per state, model has " +
                           std::to_string(k_init.joint_count()));
  }
  for (std::size_t a : cfg.anchored_datasets)
    if (a >= datasets.size()) throw ConfigurationError("anchored dataset index out of range");

  CalibrationReport report;
  report.mask = cfg.mask ? *cfg.mask : ParamMask::defaults_for(k_init);
  if (report.mask.size() != k_init.param_count())
    throw DimensionError("mask has " + std::to_string(report.mask.size()) +
                         " flags, model has " + std::to_string(k_init.param_count()) +
                         " parameters");

  const double s = calibration_scale(datasets, k_init, cfg);
  report.scale = s;

  std::vector<ScanDataset> norm;
  norm.reserve(datasets.size());
  for (const auto& ds : datasets) norm.push_back(normalize_dataset(ds, k_init, s));
  std::vector<PoseGroups> groups;
  for (const auto& ds : norm) groups.push_back(group_poses(ds));
  std::vector<std::uint8_t> anchored(datasets.size(), 0);
  for (std::size_t a : cfg.anchored_datasets) anchored[a] = 1;

  const ParamVector k0 = pack_params(k_init);
  ParamVector k_raw = k0;
  KinematicModel k_hat = unpack_params(normalize_params(k_init, k0, s), k_init);
  const double d_hat = cfg.d_max / s;

  for (int it = 1; it <= cfg.i_max; ++it) {
    std::vector<FilteredCloud> clouds(norm.size());
    parallel_for(norm.size(), cfg.threads, [&](std::size_t d) {
      const ProjectedCloud pc = anchored[d] ? project_rigid(norm[d], RigidTransform::identity())
                                            : project_to_base(norm[d], k_hat, groups[d]);
      clouds[d] = filter_cloud(pc, cfg.filter, std::uint32_t(d));
    });
    const MatchSet candidates = match_all(clouds, cfg.threads);
    const MatchSet matches = validate_matches(candidates, d_hat, cfg.f_min);
    if (matches.empty()) {
      std::ostringstream msg;
      msg << "iteration " << it << ": no validated matches (d_max " << cfg.d_max << " m, f_min "
          << cfg.f_min << "); candidates per pair:";
      for (const auto& pc : count_per_pair(candidates))
        msg << ' ' << pc.dataset_a << '-' << pc.dataset_b << ':' << pc.count;
      if (candidates.empty()) msg << " none (filtered clouds are empty)";
      throw CalibrationError(msg.str());
    }

    const BundleProblem problem(norm, matches, cfg.anchored_datasets);
    const LmResult lm = lm_minimize(problem, k_hat, report.mask, cfg.lm, cfg.threads);

    ParamVector k_new = denormalize_params(k_init, pack_params(lm.model), s);
    for (std::size_t i = 0; i < report.mask.size(); ++i)
      if (!report.mask[i]) k_new(Eigen::Index(i)) = k0(Eigen::Index(i));

    IterationRecord rec;
    rec.iteration = it;
    rec.initial_cost = lm.initial_cost;
    rec.cost = lm.final_cost;
    rec.matches = matches.size();
    rec.delta = (k_new - k_raw).lpNorm<Eigen::Infinity>();
    rec.inner_iterations = lm.iterations;
    rec.inner_costs = lm.accepted_costs;
    rec.pairs = count_per_pair(matches);
    report.iterations.push_back(rec);
    if (on_iteration) on_iteration(report.iterations.back());

    k_raw = k_new;
    k_hat = lm.model;
    if (rec.delta <= cfg.epsilon) {
      report.converged = true;
      break;
    }
  }

  report.model = unpack_params(k_raw, k_init);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace kincal
