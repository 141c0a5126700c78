#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kincal/dataset.hpp"

namespace kincal {

struct PlyVertex {
  Eigen::Vector3d position;
  std::optional<std::array<std::uint8_t, 3>> color;
};

/// ASCII PLY 1.0 with float x, y, z and, when every vertex has one, uchar red, green, blue.
std::string format_ply(const std::vector<PlyVertex>& vertices);
void write_ply(const std::filesystem::path& path, const std::vector<PlyVertex>& vertices);
/// Reads what format_ply writes (ASCII, x y z [r g b]).
std::vector<PlyVertex> read_ply(const std::filesystem::path& path);

/// Valid points of `cloud`, optionally all tinted `color`.
std::vector<PlyVertex> ply_vertices(const ProjectedCloud& cloud,
                                    std::optional<std::array<std::uint8_t, 3>> color = {});

/// Distinct color for dataset `index`.
std::array<std::uint8_t, 3> dataset_color(std::size_t index);

}  // namespace kincal
