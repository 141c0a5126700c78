#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace kincal {

/// Exact nearest-neighbor index over a fixed set of 3D points.
///
/// Ties in distance resolve to the lowest point index, so results match a linear scan
/// that keeps the first minimum.
class KdTree {
public:
  struct Neighbor {
    std::uint32_t index = 0;
    double squared_distance = 0.0;
  };

  KdTree() = default;
  explicit KdTree(std::span<const Eigen::Vector3d> points, std::size_t leaf_size = 8);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  std::optional<Neighbor> nearest(const Eigen::Vector3d& query) const;

private:
  struct Node {
    // Leaves: [begin, end) into order_. Inner: split axis/value and child ids.
    std::uint32_t begin = 0, end = 0;
    std::int32_t left = -1, right = -1;
    int axis = -1;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end, std::size_t leaf_size);
  void search(std::int32_t node, const Eigen::Vector3d& q, Neighbor& best) const;

  std::vector<Eigen::Vector3d> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace kincal
