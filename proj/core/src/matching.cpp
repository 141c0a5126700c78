#include "kincal/matching.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "kincal/errors.hpp"
#include "kincal/parallel.hpp"

namespace kincal {

KdTree build_index(const FilteredCloud& cloud) {
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(cloud.points.size());
  for (const auto& p : cloud.points) pts.push_back(p.position);
  return KdTree(pts);
}

MatchSet find_matches(const FilteredCloud& qa, const FilteredCloud& qb, const KdTree& index_b) {
  MatchSet out;
  if (index_b.empty()) return out;
  out.reserve(qa.points.size());
  for (std::size_t k = 0; k < qa.points.size(); ++k) {
    const OrientedPoint& a = qa.points[k];
    const auto nn = index_b.nearest(a.position);
    const OrientedPoint& b = qb.points[nn->index];
    Match m;
    m.dataset_a = qa.dataset;
    m.cell_a = std::uint32_t(qa.cell_of(k));
    m.dataset_b = qb.dataset;
    m.cell_b = std::uint32_t(qb.cell_of(nn->index));
    m.normal_a = a.normal;
    m.distance = std::sqrt(nn->squared_distance);
    m.normal_agreement = a.normal.dot(b.normal);
    out.push_back(m);
  }
  return out;
}

MatchSet find_matches(const FilteredCloud& qa, const FilteredCloud& qb) {
  return find_matches(qa, qb, build_index(qb));
}

MatchSet match_all(const std::vector<FilteredCloud>& clouds, int threads) {
  if (clouds.size() < 2) throw ConfigurationError("matching needs at least two datasets");
  const std::size_t n = clouds.size();
  std::vector<KdTree> indices(n);
  parallel_for(n, threads, [&](std::size_t j) { indices[j] = build_index(clouds[j]); });

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

  std::vector<MatchSet> blocks(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t p) {
    const auto [i, j] = pairs[p];
    blocks[p] = find_matches(clouds[i], clouds[j], indices[j]);
  });

  MatchSet out;
  std::size_t total = 0;
  for (const auto& b : blocks) total += b.size();
  out.reserve(total);
  for (auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
  std::stable_sort(out.begin(), out.end(), [](const Match& x, const Match& y) {
    if (x.dataset_a != y.dataset_a) return x.dataset_a < y.dataset_a;
    if (x.dataset_b != y.dataset_b) return x.dataset_b < y.dataset_b;
    return x.cell_a < y.cell_a;
  });
  return out;
}

MatchSet validate_matches(const MatchSet& ms, double d_max, double f_min) {
  if (!(d_max > 0.0)) throw InvalidParameterError("d_max must be positive");
  if (!(f_min >= -1.0 && f_min <= 1.0)) throw InvalidParameterError("f_min must lie in [-1, 1]");
  MatchSet out;
  out.reserve(ms.size());
  std::copy_if(ms.begin(), ms.end(), std::back_inserter(out), [&](const Match& m) {
    return m.distance <= d_max && m.normal_agreement >= f_min;
  });
  return out;
}

std::vector<PairCount> count_per_pair(const MatchSet& ms) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> counts;
  for (const Match& m : ms) ++counts[{m.dataset_a, m.dataset_b}];
  std::vector<PairCount> out;
  for (const auto& [k, c] : counts) out.push_back({k.first, k.second, c});
  return out;
}

}  // namespace kincal
