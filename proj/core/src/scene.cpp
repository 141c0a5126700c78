#include "kincal/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Geometry>

#include "kincal/errors.hpp"
#include "kincal/transform.hpp"

namespace kincal {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite(const Eigen::Vector3d& v) { return v.allFinite(); }

void check(Plane& p) {
  const double n = p.normal.norm();
  if (!finite(p.point) || !(n > 0.0) || !std::isfinite(n))
    throw InvalidParameterError("plane needs a finite point and a non-zero normal");
  p.normal /= n;
}

void check(Box& b) {
  if (!finite(b.center) || !(b.half_extents.minCoeff() > 0.0) || !finite(b.half_extents))
    throw InvalidParameterError("box needs a finite center and positive half extents");
  if (!b.rotation.allFinite() ||
      !(b.rotation.transpose() * b.rotation).isIdentity(1e-9) || b.rotation.determinant() < 0.0)
    throw InvalidParameterError("box rotation must be a proper rotation matrix");
}

void check(Sphere& s) {
  if (!finite(s.center) || !(s.radius > 0.0) || !std::isfinite(s.radius))
    throw InvalidParameterError("sphere needs a finite center and a positive radius");
}

void check(TriangleMesh& m) {
  for (const auto& v : m.vertices)
    if (!finite(v)) throw InvalidParameterError("mesh vertex is not finite");
  for (const auto& f : m.faces) {
    for (std::uint32_t k : f)
      if (k >= m.vertices.size()) throw InvalidParameterError("mesh face index out of range");
    const Eigen::Vector3d e1 = m.vertices[f[1]] - m.vertices[f[0]];
    const Eigen::Vector3d e2 = m.vertices[f[2]] - m.vertices[f[0]];
    if (!(e1.cross(e2).norm() > 0.0)) throw InvalidParameterError("degenerate mesh triangle");
  }
}

std::optional<double> hit_plane(const Plane& p, const Eigen::Vector3d& o,
                                const Eigen::Vector3d& d) {
  const double den = p.normal.dot(d);
  if (std::abs(den) < 1e-15) return std::nullopt;
  const double t = p.normal.dot(p.point - o) / den;
  if (!(t > 0.0)) return std::nullopt;
  return t;
}

std::optional<double> hit_sphere(const Sphere& s, const Eigen::Vector3d& o,
                                 const Eigen::Vector3d& d) {
  const Eigen::Vector3d oc = o - s.center;
  const double b = oc.dot(d);
  const double c = oc.squaredNorm() - s.radius * s.radius;
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  // Cancellation-free pair of roots.
  const double q = b > 0.0 ? -b - root : -b + root;
  double t0 = q, t1 = q != 0.0 ? c / q : 0.0;
  if (t0 > t1) std::swap(t0, t1);
  if (t0 > 0.0) return t0;
  if (t1 > 0.0) return t1;
  return std::nullopt;
}

std::optional<double> hit_box(const Box& b, const Eigen::Vector3d& o, const Eigen::Vector3d& d) {
  const Eigen::Vector3d lo = b.rotation.transpose() * (o - b.center);
  const Eigen::Vector3d ld = b.rotation.transpose() * d;
  double t_near = -kInf, t_far = kInf;
  for (int a = 0; a < 3; ++a) {
    if (ld[a] == 0.0) {
      if (std::abs(lo[a]) > b.half_extents[a]) return std::nullopt;
      continue;
    }
    double t1 = (-b.half_extents[a] - lo[a]) / ld[a];
    double t2 = (b.half_extents[a] - lo[a]) / ld[a];
    if (t1 > t2) std::swap(t1, t2);
    t_near = std::max(t_near, t1);
    t_far = std::min(t_far, t2);
    if (t_near > t_far) return std::nullopt;
  }
  if (t_near > 0.0) return t_near;
  if (t_far > 0.0) return t_far;
  return std::nullopt;
}

std::optional<double> hit_triangle(const Eigen::Vector3d& v0, const Eigen::Vector3d& v1,
                                   const Eigen::Vector3d& v2, const Eigen::Vector3d& o,
                                   const Eigen::Vector3d& d) {
  const Eigen::Vector3d e1 = v1 - v0, e2 = v2 - v0;
  const Eigen::Vector3d pv = d.cross(e2);
  const double det = e1.dot(pv);
  if (std::abs(det) < 1e-15 * e1.norm() * e2.norm()) return std::nullopt;
  const double inv = 1.0 / det;
  const Eigen::Vector3d tv = o - v0;
  const double u = tv.dot(pv) * inv;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Eigen::Vector3d qv = tv.cross(e1);
  const double v = d.dot(qv) * inv;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = e2.dot(qv) * inv;
  if (!(t > 0.0)) return std::nullopt;
  return t;
}

std::optional<double> hit_mesh(const TriangleMesh& m, const Eigen::Vector3d& o,
                               const Eigen::Vector3d& d) {
  double best = kInf;
  for (const auto& f : m.faces) {
    const auto t = hit_triangle(m.vertices[f[0]], m.vertices[f[1]], m.vertices[f[2]], o, d);
    if (t && *t < best) best = *t;
  }
  if (best == kInf) return std::nullopt;
  return best;
}

// Closest point on triangle abc to p (Ericson, Real-Time Collision Detection 5.1.5).
Eigen::Vector3d closest_on_triangle(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                                    const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  const Eigen::Vector3d ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Eigen::Vector3d bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;
  const Eigen::Vector3d cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

}  // namespace

Scene& Scene::add(ScenePrimitive primitive) {
  std::visit([](auto& p) { check(p); }, primitive);
  primitives_.push_back(std::move(primitive));
  return *this;
}

std::optional<double> raycast(const ScenePrimitive& primitive, const Eigen::Vector3d& origin,
                              const Eigen::Vector3d& direction) {
  struct Visitor {
    const Eigen::Vector3d& o;
    const Eigen::Vector3d& d;
    std::optional<double> operator()(const Plane& p) const { return hit_plane(p, o, d); }
    std::optional<double> operator()(const Box& b) const { return hit_box(b, o, d); }
    std::optional<double> operator()(const Sphere& s) const { return hit_sphere(s, o, d); }
    std::optional<double> operator()(const TriangleMesh& m) const { return hit_mesh(m, o, d); }
  };
  return std::visit(Visitor{origin, direction}, primitive);
}

std::optional<double> raycast(const Scene& scene, const Eigen::Vector3d& origin,
                              const Eigen::Vector3d& direction) {
  if (!origin.allFinite() || std::abs(direction.norm() - 1.0) > 1e-9)
    throw InvalidParameterError("raycast needs a finite origin and a unit direction");
  std::optional<double> best;
  for (const auto& p : scene.primitives()) {
    const auto t = raycast(p, origin, direction);
    if (t && (!best || *t < *best)) best = t;
  }
  return best;
}

double distance_to_surface(const ScenePrimitive& primitive, const Eigen::Vector3d& p) {
  struct Visitor {
    const Eigen::Vector3d& p;
    double operator()(const Plane& pl) const { return std::abs(pl.normal.dot(p - pl.point)); }
    double operator()(const Sphere& s) const { return std::abs((p - s.center).norm() - s.radius); }
    double operator()(const Box& b) const {
      const Eigen::Vector3d q = (b.rotation.transpose() * (p - b.center)).cwiseAbs() - b.half_extents;
      if (q.maxCoeff() > 0.0) return q.cwiseMax(0.0).norm();
      return -q.maxCoeff();
    }
    double operator()(const TriangleMesh& m) const {
      double best = kInf;
      for (const auto& f : m.faces)
        best = std::min(best, (p - closest_on_triangle(p, m.vertices[f[0]], m.vertices[f[1]],
                                                       m.vertices[f[2]]))
                                  .norm());
      return best;
    }
  };
  return std::visit(Visitor{p}, primitive);
}

double distance_to_surface(const Scene& scene, const Eigen::Vector3d& p) {
  double best = kInf;
  for (const auto& prim : scene.primitives()) best = std::min(best, distance_to_surface(prim, p));
  return best;
}

void append_quad(TriangleMesh& mesh, const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                 const Eigen::Vector3d& c, const Eigen::Vector3d& d) {
  const auto base = std::uint32_t(mesh.vertices.size());
  mesh.vertices.insert(mesh.vertices.end(), {a, b, c, d});
  mesh.faces.push_back({base, base + 1, base + 2});
  mesh.faces.push_back({base, base + 2, base + 3});
}

Scene default_desk_scene() {
  const double x0 = 0.15, x1 = 1.15, y0 = -0.55, y1 = 0.55, z0 = -0.45, z1 = -0.10;
  TriangleMesh tray;
  append_quad(tray, {x0, y0, z0}, {x1, y0, z0}, {x1, y1, z0}, {x0, y1, z0});
  append_quad(tray, {x0, y0, z0}, {x0, y1, z0}, {x0, y1, z1}, {x0, y0, z1});
  append_quad(tray, {x1, y0, z0}, {x1, y0, z1}, {x1, y1, z1}, {x1, y1, z0});
  append_quad(tray, {x0, y0, z0}, {x0, y0, z1}, {x1, y0, z1}, {x1, y0, z0});
  append_quad(tray, {x0, y1, z0}, {x1, y1, z0}, {x1, y1, z1}, {x0, y1, z1});

  Scene scene;
  scene.add(tray);
  scene.add(Sphere{{0.75, 0.20, z0 + 0.15}, 0.15});
  Box box;
  box.center = {0.55, -0.22, z0 + 0.07};
  box.half_extents = {0.12, 0.08, 0.07};
  box.rotation = rot_z(M_PI / 6.0).rotation;
  scene.add(box);
  return scene;
}

Eigen::Vector3d default_scene_target() { return {0.65, 0.0, -0.38}; }

}  // namespace kincal
