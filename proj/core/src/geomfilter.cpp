#include "kincal/geomfilter.hpp"

#include <cmath>

#include "kincal/errors.hpp"

namespace kincal {
namespace {

std::optional<Eigen::Vector3d> unit_cross(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const Eigen::Vector3d c = a.cross(b);
  const double n = c.norm();
  if (!(n >= 1e-12 * a.norm() * b.norm()) || n == 0.0) return std::nullopt;
  return c / n;
}

}  // namespace

std::optional<Eigen::Vector3d> estimate_normal(const ProjectedCloud& cloud, std::size_t i,
                                               std::size_t j) {
  if (i == 0 || j == 0 || i + 1 >= cloud.rows || j + 1 >= cloud.cols) return std::nullopt;
  const std::size_t c = cloud.index(i, j);
  const std::size_t up = cloud.index(i - 1, j), left = cloud.index(i, j - 1);
  const std::size_t down = cloud.index(i + 1, j), right = cloud.index(i, j + 1);
  if (!cloud.valid[c] || !cloud.valid[up] || !cloud.valid[left] || !cloud.valid[down] ||
      !cloud.valid[right])
    return std::nullopt;
  const Eigen::Vector3d& p = cloud.points[c];
  const auto back = unit_cross(cloud.points[up] - p, cloud.points[left] - p);
  const auto fwd = unit_cross(cloud.points[down] - p, cloud.points[right] - p);
  if (!back || !fwd) return std::nullopt;
  const Eigen::Vector3d sum = *back + *fwd;
  const double n = sum.norm();
  // Opposing half-normals: a fold back onto itself, no usable direction.
  if (!(n > 1e-12)) return std::nullopt;
  return sum / n;
}

Eigen::Vector3d orient_normal(const Eigen::Vector3d& n, const Eigen::Vector3d& p,
                              const Eigen::Vector3d& sensor_origin, NormalOrientation rule) {
  const double test = rule == NormalOrientation::ViewDirection ? n.dot(p - sensor_origin)
                                                               : n.dot(sensor_origin);
  return test <= 0.0 ? n : Eigen::Vector3d(-n);
}

NormalGrid compute_normals(const ProjectedCloud& cloud, NormalOrientation rule) {
  NormalGrid g;
  g.rows = cloud.rows;
  g.cols = cloud.cols;
  g.normals.resize(cloud.size());
  for (std::size_t i = 0; i < cloud.rows; ++i)
    for (std::size_t j = 0; j < cloud.cols; ++j) {
      auto n = estimate_normal(cloud, i, j);
      if (!n) continue;
      const std::size_t c = cloud.index(i, j);
      g.normals[c] = orient_normal(*n, cloud.points[c], cloud.origins[c], rule);
    }
  return g;
}

std::optional<double> normal_overlap(const NormalGrid& normals, std::size_t i, std::size_t j,
                                     int half_rows, int half_cols) {
  const auto& center = normals.at(i, j);
  if (!center) return std::nullopt;
  const long rows = long(normals.rows), cols = long(normals.cols);
  double sum = 0.0;
  int defined = 0;
  for (long a = -half_rows; a <= half_rows; ++a) {
    const long r = long(i) + a;
    if (r < 0 || r >= rows) continue;
    for (long b = -half_cols; b <= half_cols; ++b) {
      const long c = long(j) + b;
      if (c < 0 || c >= cols) continue;
      const auto& v = normals.at(std::size_t(r), std::size_t(c));
      if (!v) continue;
      sum += std::abs(center->dot(*v));
      ++defined;
    }
  }
  const int window = (2 * half_rows + 1) * (2 * half_cols + 1);
  if (2 * defined < window) return std::nullopt;
  return sum / defined;
}

FilteredCloud filter_cloud(const ProjectedCloud& cloud, const FilterConfig& cfg,
                           std::uint32_t dataset_id) {
  if (!(cfg.g_min >= 0.0 && cfg.g_min <= 1.0))
    throw InvalidParameterError("g_min must lie in [0, 1]");
  if (cfg.half_rows < 0 || cfg.half_cols < 0)
    throw InvalidParameterError("window half sizes must be non-negative");
  const NormalGrid normals = compute_normals(cloud, cfg.orientation);
  FilteredCloud out;
  out.dataset = dataset_id;
  out.rows = cloud.rows;
  out.cols = cloud.cols;
  for (std::size_t i = 0; i < cloud.rows; ++i)
    for (std::size_t j = 0; j < cloud.cols; ++j) {
      const std::size_t c = cloud.index(i, j);
      if (!cloud.valid[c] || !normals.normals[c]) continue;
      const auto o = normal_overlap(normals, i, j, cfg.half_rows, cfg.half_cols);
      if (!o || *o < cfg.g_min) continue;
      out.points.push_back({cloud.points[c], *normals.normals[c], std::uint32_t(i),
                            std::uint32_t(j), dataset_id});
    }
  return out;
}

double compute_scale(const ProjectedCloud& cloud) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < cloud.size(); ++c) {
    if (!cloud.valid[c]) continue;
    sum += cloud.points[c].norm();
    ++n;
  }
  if (n == 0) throw InvalidInputError("cannot compute a scale from a cloud without valid points");
  return sum / double(n);
}

}  // namespace kincal
