#pragma once

#include <array>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace kincal {

/// Infinite plane through `point`.
struct Plane {
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
};

/// Oriented box: world = rotation * local + center, local within +-half_extents.
struct Box {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d half_extents = Eigen::Vector3d::Constant(0.5);
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
};

struct Sphere {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 1.0;
};

struct TriangleMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;
};

using ScenePrimitive = std::variant<Plane, Box, Sphere, TriangleMesh>;

/// A set of primitives. add() normalizes plane normals and rejects malformed geometry
/// (zero normals, non-positive radius or extents, non-orthonormal box rotation, face
/// indices out of range, degenerate triangles) with InvalidParameterError.
class Scene {
public:
  Scene& add(ScenePrimitive primitive);
  const std::vector<ScenePrimitive>& primitives() const { return primitives_; }
  bool empty() const { return primitives_.empty(); }

private:
  std::vector<ScenePrimitive> primitives_;
};

/// Nearest intersection distance t > 0 along origin + t * direction, or nullopt on a miss.
/// `direction` must be unit length (InvalidParameterError otherwise).
std::optional<double> raycast(const Scene& scene, const Eigen::Vector3d& origin,
                              const Eigen::Vector3d& direction);
std::optional<double> raycast(const ScenePrimitive& primitive, const Eigen::Vector3d& origin,
                              const Eigen::Vector3d& direction);

/// Unsigned distance from p to the closest primitive surface.
double distance_to_surface(const Scene& scene, const Eigen::Vector3d& p);
double distance_to_surface(const ScenePrimitive& primitive, const Eigen::Vector3d& p);

/// Axis-aligned quad as two triangles, corners given counter-clockwise.
void append_quad(TriangleMesh& mesh, const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                 const Eigen::Vector3d& c, const Eigen::Vector3d& d);

/// Desk-scale test scene in front of the base: an open tray (floor and four walls) holding
/// a sphere and a rotated box. The tray floor is at z = -0.45 m.
Scene default_desk_scene();
/// Point the default planner aims the sensor at.
Eigen::Vector3d default_scene_target();

}  // namespace kincal
