#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "kincal/dataset.hpp"

namespace kincal {

/// Sign rule used to orient grid normals.
enum class NormalOrientation {
  /// n is flipped so that n . (p - o) <= 0, i.e. it faces the sensor that measured p.
  ViewDirection,
  /// Literal origin test n . o <= 0. Depends on where the base frame sits.
  OriginPosition,
};

struct FilterConfig {
  int half_rows = 2;  // n
  int half_cols = 2;  // m
  double g_min = 0.75;
  NormalOrientation orientation = NormalOrientation::ViewDirection;
};

/// Per-cell oriented normals of a projected cloud; std::nullopt where undefined.
struct NormalGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::optional<Eigen::Vector3d>> normals;

  const std::optional<Eigen::Vector3d>& at(std::size_t i, std::size_t j) const {
    return normals[i * cols + j];
  }
};

struct OrientedPoint {
  Eigen::Vector3d position;
  Eigen::Vector3d normal;
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  std::uint32_t dataset = 0;
};

/// Points of one dataset that survived the overlap filter, in row-major cell order.
struct FilteredCloud {
  std::uint32_t dataset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<OrientedPoint> points;

  std::size_t cell_of(std::size_t k) const {
    return std::size_t(points[k].row) * cols + points[k].col;
  }
};

/// Normalized sum of m(p_{i-1,j} - p, p_{i,j-1} - p) and m(p_{i+1,j} - p, p_{i,j+1} - p),
/// m(a, b) = a x b / |a x b|. Undefined on the grid border, next to invalid cells, and
/// for degenerate cross products (|a x b| < 1e-12 |a||b|).
std::optional<Eigen::Vector3d> estimate_normal(const ProjectedCloud& cloud, std::size_t i,
                                               std::size_t j);

Eigen::Vector3d orient_normal(const Eigen::Vector3d& n, const Eigen::Vector3d& p,
                              const Eigen::Vector3d& sensor_origin,
                              NormalOrientation rule = NormalOrientation::ViewDirection);

NormalGrid compute_normals(const ProjectedCloud& cloud,
                           NormalOrientation rule = NormalOrientation::ViewDirection);

/// Mean |v_c . v_w| over the (2n+1)x(2m+1) window around (i, j), center included.
/// Off-grid and undefined cells are left out of both sum and count. Returns nullopt when
/// the center normal is undefined or fewer than half the window cells are defined.
std::optional<double> normal_overlap(const NormalGrid& normals, std::size_t i, std::size_t j,
                                     int half_rows, int half_cols);

/// Keeps the valid cells whose normal is defined and whose overlap is >= g_min.
FilteredCloud filter_cloud(const ProjectedCloud& cloud, const FilterConfig& cfg,
                           std::uint32_t dataset_id = 0);

/// Mean distance of the valid points to the base origin.
double compute_scale(const ProjectedCloud& cloud);

}  // namespace kincal
