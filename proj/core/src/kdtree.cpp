#include "kincal/kdtree.hpp"

#include <algorithm>
#include <limits>

namespace kincal {

KdTree::KdTree(std::span<const Eigen::Vector3d> points, std::size_t leaf_size)
    : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / std::max<std::size_t>(leaf_size, 1) + 1);
    build(0, std::uint32_t(points_.size()), std::max<std::size_t>(leaf_size, 1));
  }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end, std::size_t leaf_size) {
  const std::int32_t id = std::int32_t(nodes_.size());
  nodes_.push_back({begin, end, -1, -1, -1, 0.0});
  if (end - begin <= leaf_size) return id;

  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  for (std::uint32_t k = begin; k < end; ++k) {
    lo = lo.cwiseMin(points_[order_[k]]);
    hi = hi.cwiseMax(points_[order_[k]]);
  }
  int axis;
  const double spread = (hi - lo).maxCoeff(&axis);
  if (!(spread > 0.0)) return id;  // all coincident

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points_[a][axis] < points_[b][axis];
                   });
  const double split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid, leaf_size);
  const std::int32_t right = build(mid, end, leaf_size);
  Node& n = nodes_[std::size_t(id)];
  n.axis = axis;
  n.split = split;
  n.left = left;
  n.right = right;
  return id;
}

void KdTree::search(std::int32_t node_id, const Eigen::Vector3d& q, Neighbor& best) const {
  const Node& node = nodes_[std::size_t(node_id)];
  if (node.axis < 0) {
    for (std::uint32_t k = node.begin; k < node.end; ++k) {
      const std::uint32_t idx = order_[k];
      const double d2 = (points_[idx] - q).squaredNorm();
      if (d2 < best.squared_distance || (d2 == best.squared_distance && idx < best.index)) {
        best.squared_distance = d2;
        best.index = idx;
      }
    }
    return;
  }
  // Left subtree holds coordinates <= split, right holds >= split.
  const double diff = q[node.axis] - node.split;
  const std::int32_t near = diff <= 0.0 ? node.left : node.right;
  const std::int32_t far = diff <= 0.0 ? node.right : node.left;
  search(near, q, best);
  // Equality keeps the far side in play so lower-index ties are still found.
  if (diff * diff <= best.squared_distance) search(far, q, best);
}

std::optional<KdTree::Neighbor> KdTree::nearest(const Eigen::Vector3d& query) const {
  if (points_.empty()) return std::nullopt;
  Neighbor best{std::numeric_limits<std::uint32_t>::max(),
                std::numeric_limits<double>::infinity()};
  search(0, query, best);
  return best;
}

}  // namespace kincal
