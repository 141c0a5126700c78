#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kincal/dataset.hpp"
#include "kincal/geomfilter.hpp"
#include "kincal/kinematics.hpp"
#include "kincal/matching.hpp"

namespace kincal {

/// Receives degenerate-problem diagnostics. The default handler prints to stderr.
using WarningHandler = std::function<void(const std::string&)>;
void set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

struct LmOptions {
  double initial_lambda = 1e-4;
  double lambda_increase = 10.0;
  double lambda_decrease = 10.0;
  int max_iterations = 25;
  double gradient_tolerance = 1e-10;
  // Smallest eigenvalue of the diagonally scaled normal matrix, relative to the largest,
  // still treated as full rank.
  double rank_tolerance = 1e-12;
};

struct CalibrationConfig {
  FilterConfig filter;  // n, m, g_min
  double d_max = 0.020;
  double f_min = 0.80;
  double epsilon = 1e-4;
  int i_max = 50;
  std::optional<ParamMask> mask;  // ParamMask::defaults_for(k_init) when empty
  LmOptions lm;
  // Scale from all datasets about their common centroid instead of the first dataset about
  // the base origin. Residuals do not depend on the shift, only the normalization does.
  bool center_shift = false;
  // Datasets whose points are taken as already expressed in B (identity pose).
  std::vector<std::size_t> anchored_datasets;
  int threads = 1;

  /// Throws InvalidParameterError for out-of-range thresholds.
  void check() const;
};

/// Signed point-to-plane distance (T(k, q_a) p_a - T(k, q_b) p_b) . n.
double residual(const Eigen::Vector3d& p_a, const JointVector& q_a, const Eigen::Vector3d& p_b,
                const JointVector& q_b, const Eigen::Vector3d& normal,
                const KinematicModel& model);

/// d residual / d k over the packed parameter vector, from the analytic chain derivative.
Eigen::VectorXd residual_gradient(const Eigen::Vector3d& p_a, const JointVector& q_a,
                                  const Eigen::Vector3d& p_b, const JointVector& q_b,
                                  const Eigen::Vector3d& normal, const KinematicModel& model);

/// Match endpoints looked up in their datasets; the match's frozen normal is the plane.
double residual(const Match& m, const std::vector<ScanDataset>& datasets,
                const KinematicModel& model);

/// Residual terms of one outer iteration. Endpoints stay in the sensor frame with their
/// joint states; datasets that share a joint vector share one chain evaluation.
class BundleProblem {
public:
  BundleProblem(const std::vector<ScanDataset>& datasets, const MatchSet& matches,
                const std::vector<std::size_t>& anchored = {});

  std::size_t size() const { return terms_.size(); }
  std::size_t joint_count() const { return joint_count_; }

  Eigen::VectorXd residuals(const KinematicModel& model, int threads = 1) const;
  /// Sum of squared residuals, reduced in fixed chunks so the value does not depend on the
  /// thread count.
  double cost(const KinematicModel& model, int threads = 1) const;
  /// Dense residual Jacobian over the packed parameters (rows follow the match order).
  Eigen::MatrixXd jacobian(const KinematicModel& model) const;

  /// J^T J and J^T r restricted to `free` packed indices, plus the cost.
  struct Normal {
    Eigen::MatrixXd h;
    Eigen::VectorXd g;
    double cost = 0.0;
  };
  Normal normal_equations(const KinematicModel& model, const std::vector<std::size_t>& free,
                          int threads = 1) const;

private:
  struct Term {
    std::int32_t slot_a, slot_b;  // -1: anchored, identity pose
    Eigen::Vector3d p_a, p_b, normal;
  };
  std::vector<RigidTransform> poses(const KinematicModel& model) const;

  std::size_t joint_count_ = 0;
  std::vector<JointVector> slots_;
  std::vector<Term> terms_;
};

/// e(k, M) = sum of squared residuals. An empty match set yields 0 and a warning.
double total_error(const BundleProblem& problem, const KinematicModel& model, int threads = 1);
double total_error(const MatchSet& ms, const std::vector<ScanDataset>& datasets,
                   const KinematicModel& model);

struct LmResult {
  KinematicModel model;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  std::vector<double> accepted_costs;  // cost after each accepted step, starting with initial
  bool converged = false;              // gradient or step tolerance reached
  bool no_op = false;                  // nothing to optimize (all masked)
};

/// Damped Gauss-Newton (Levenberg-Marquardt, diagonal scaling) over the free scalars.
/// Steps are kept only if they lower the cost; masked scalars are never written.
/// Throws SingularSystemError when J^T J is rank deficient over the free set.
LmResult lm_minimize(const BundleProblem& problem, const KinematicModel& model,
                     const ParamMask& mask, const LmOptions& options = {}, int threads = 1);

struct IterationRecord {
  int iteration = 0;
  double cost = 0.0;          // after the inner solve, normalized units
  double initial_cost = 0.0;  // before the inner solve
  std::size_t matches = 0;
  double delta = 0.0;  // max |k_new - k_old| over the denormalized vector
  int inner_iterations = 0;
  std::vector<double> inner_costs;
  std::vector<PairCount> pairs;
};

struct CalibrationReport {
  KinematicModel model;
  ParamMask mask;
  double scale = 1.0;
  std::vector<IterationRecord> iterations;
  bool converged = false;
  double wall_seconds = 0.0;
};

using IterationCallback = std::function<void(const IterationRecord&)>;

/// ICP over the kinematic parameters: project, filter, match, validate, solve, repeat until
/// the parameter change drops to epsilon or i_max outer iterations ran.
/// Throws ConfigurationError (< 2 datasets), DimensionError (arity), CalibrationError
/// (an iteration without validated matches) and SingularSystemError.
CalibrationReport calibrate(const std::vector<ScanDataset>& datasets, const KinematicModel& k_init,
                            const CalibrationConfig& cfg, const IterationCallback& on_iteration = {});

/// Normalization scale used by calibrate for these inputs.
double calibration_scale(const std::vector<ScanDataset>& datasets, const KinematicModel& k_init,
                         const CalibrationConfig& cfg);

/// Copy of `ds` with points and prismatic joint values divided by `scale`.
ScanDataset normalize_dataset(const ScanDataset& ds, const KinematicModel& model, double scale);

}  // namespace kincal
