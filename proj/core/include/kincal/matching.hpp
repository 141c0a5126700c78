#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "kincal/geomfilter.hpp"
#include "kincal/kdtree.hpp"

namespace kincal {

/// Correspondence between cell `cell_a` of dataset `dataset_a` and cell `cell_b` of dataset
/// `dataset_b` (dataset_a < dataset_b). Cells index the raw sensor-frame grids.
///
/// The oriented normal of the first point is frozen here and used as the tangent plane in
/// the residual; `distance` and `normal_agreement` describe the pair at matching time.
struct Match {
  std::uint32_t dataset_a = 0;
  std::uint32_t cell_a = 0;
  std::uint32_t dataset_b = 0;
  std::uint32_t cell_b = 0;
  Eigen::Vector3d normal_a = Eigen::Vector3d::UnitZ();
  double distance = 0.0;
  double normal_agreement = 1.0;
};

using MatchSet = std::vector<Match>;

KdTree build_index(const FilteredCloud& cloud);

/// One candidate per point of `qa`: its nearest neighbor in `qb` (searched through
/// `index_b`, which must be built over `qb`).
MatchSet find_matches(const FilteredCloud& qa, const FilteredCloud& qb, const KdTree& index_b);
MatchSet find_matches(const FilteredCloud& qa, const FilteredCloud& qb);

/// Union of find_matches over every pair i < j, sorted by (dataset_a, dataset_b, cell_a).
/// Throws ConfigurationError for fewer than two clouds.
MatchSet match_all(const std::vector<FilteredCloud>& clouds, int threads = 1);

/// Keeps matches with distance <= d_max and normal agreement >= f_min.
MatchSet validate_matches(const MatchSet& ms, double d_max, double f_min);

/// Match counts per dataset pair, sorted by pair.
struct PairCount {
  std::uint32_t dataset_a = 0;
  std::uint32_t dataset_b = 0;
  std::size_t count = 0;
};
std::vector<PairCount> count_per_pair(const MatchSet& ms);

}  // namespace kincal
