#pragma once

#include <filesystem>
#include <string>

#include "kincal/scene.hpp"
#include "kincal/simulator.hpp"

namespace kincal {

/// Scene file (JSON, lengths in meters):
///
///   {"primitives": [
///     {"type": "desk"},                                  // the default desk scene
///     {"type": "plane", "point": [0, 0, -0.5], "normal": [0, 0, 1]},
///     {"type": "sphere", "center": [0.7, 0, -0.3], "radius": 0.1},
///     {"type": "box", "center": [0.5, 0, -0.4], "half_extents": [0.1, 0.1, 0.05],
///      "rotation": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]},  // optional, row-major
///     {"type": "mesh", "vertices": [[0, 0, 0], ...], "faces": [[0, 1, 2], ...]}
///   ]}
Scene parse_scene(const std::string& text, const std::string& origin = "<string>");
Scene load_scene(const std::filesystem::path& path);

/// Trajectory file: constant-velocity legs, or static poses for depth cameras.
///
///   {"legs": [{"start": [q1, ...], "end": [q1, ...], "duration": 2.0}, ...]}
///   {"poses": [[q1, ...], [q1, ...]]}
///
/// Joint values in radians (revolute) or meters (prismatic).
TrajectorySpec parse_trajectory(const std::string& text, const std::string& origin = "<string>");
TrajectorySpec load_trajectory(const std::filesystem::path& path);
std::string format_trajectory(const TrajectorySpec& traj);

/// Sensor file: an optional preset name plus overrides.
///
///   {"preset": "kinect_azure", "kind": "depth_camera", "rows": 64, "cols": 64,
///    "fov_x_deg": 60, "fov_y_deg": 60, "min_range": 0.3, "max_range": 3.0,
///    "sigma_abs": 0.0002, "sigma_rel": 0.0, "sample_rate": 30}
SensorSpec parse_sensor(const std::string& text, const std::string& origin = "<string>");
SensorSpec load_sensor(const std::filesystem::path& path);

}  // namespace kincal
