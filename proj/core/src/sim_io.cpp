#include "kincal/sim_io.hpp"

#include <cmath>

#include "json_util.hpp"
#include "kincal/presets.hpp"

namespace kincal {

using detail::json;

namespace {

Eigen::Vector3d vec3(const json& obj, const char* key, const std::string& origin,
                     const std::string& where) {
  if (!obj.contains(key)) throw ParseError(origin, 0, where + ": missing '" + key + "'");
  const json& a = obj.at(key);
  if (!a.is_array() || a.size() != 3)
    throw ParseError(origin, 0, where + ": '" + key + "' must be an array of 3 numbers");
  Eigen::Vector3d v;
  for (int k = 0; k < 3; ++k) {
    if (!a[std::size_t(k)].is_number())
      throw ParseError(origin, 0, where + ": '" + key + "' must be numeric");
    v[k] = a[std::size_t(k)].get<double>();
  }
  return v;
}

JointVector joints(const json& a, const std::string& origin, const std::string& where) {
  if (!a.is_array()) throw ParseError(origin, 0, where + ": joint vector must be an array");
  JointVector q(Eigen::Index(a.size()));
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!a[k].is_number()) throw ParseError(origin, 0, where + ": joint values must be numeric");
    q(Eigen::Index(k)) = a[k].get<double>();
  }
  return q;
}

json to_json(const JointVector& q) {
  json a = json::array();
  for (Eigen::Index k = 0; k < q.size(); ++k) a.push_back(q(k));
  return a;
}

ScenePrimitive parse_primitive(const json& p, const std::string& origin,
                               const std::string& where) {
  const std::string type = p.value("type", std::string());
  if (type == "plane") return Plane{vec3(p, "point", origin, where), vec3(p, "normal", origin, where)};
  if (type == "sphere")
    return Sphere{vec3(p, "center", origin, where),
                  detail::number_field(p, "radius", origin, where)};
  if (type == "box") {
    Box b;
    b.center = vec3(p, "center", origin, where);
    b.half_extents = vec3(p, "half_extents", origin, where);
    if (p.contains("rotation")) {
      const json& r = p.at("rotation");
      if (!r.is_array() || r.size() != 3)
        throw ParseError(origin, 0, where + ": 'rotation' must be 3 rows");
      for (std::size_t i = 0; i < 3; ++i) {
        if (!r[i].is_array() || r[i].size() != 3)
          throw ParseError(origin, 0, where + ": 'rotation' rows must hold 3 numbers");
        for (std::size_t j = 0; j < 3; ++j) b.rotation(Eigen::Index(i), Eigen::Index(j)) = r[i][j].get<double>();
      }
    }
    return b;
  }
  if (type == "mesh") {
    TriangleMesh m;
    const json v = p.value("vertices", json::array());
    const json f = p.value("faces", json::array());
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!v[k].is_array() || v[k].size() != 3)
        throw ParseError(origin, 0, where + ": vertices must be [x, y, z]");
      m.vertices.emplace_back(v[k][0].get<double>(), v[k][1].get<double>(), v[k][2].get<double>());
    }
    for (std::size_t k = 0; k < f.size(); ++k) {
      if (!f[k].is_array() || f[k].size() != 3)
        throw ParseError(origin, 0, where + ": faces must be [i, j, k]");
      m.faces.push_back({f[k][0].get<std::uint32_t>(), f[k][1].get<std::uint32_t>(),
                         f[k][2].get<std::uint32_t>()});
    }
    return m;
  }
  throw ParseError(origin, 0, where + ": unknown primitive type '" + type + "'");
}

}  // namespace

Scene parse_scene(const std::string& text, const std::string& origin) {
  const json doc = detail::parse_json(text, origin);
  if (!doc.is_object() || !doc.contains("primitives") || !doc.at("primitives").is_array())
    throw ParseError(origin, 1, "scene needs a 'primitives' array");
  Scene scene;
  const json& prims = doc.at("primitives");
  for (std::size_t i = 0; i < prims.size(); ++i) {
    const std::string where = "primitives[" + std::to_string(i) + "]";
    try {
      if (prims[i].value("type", std::string()) == "desk") {
        const Scene desk = default_desk_scene();
        for (const auto& p : desk.primitives()) scene.add(p);
        continue;
      }
      scene.add(parse_primitive(prims[i], origin, where));
    } catch (const json::exception& e) {
      throw ParseError(origin, 0, where + ": " + e.what());
    } catch (const InvalidParameterError& e) {
      throw ParseError(origin, 0, where + ": " + e.what());
    }
  }
  if (scene.empty()) throw ParseError(origin, 0, "scene has no primitives");
  return scene;
}

Scene load_scene(const std::filesystem::path& path) {
  return parse_scene(detail::read_text_file(path), path.string());
}

TrajectorySpec parse_trajectory(const std::string& text, const std::string& origin) {
  const json doc = detail::parse_json(text, origin);
  if (!doc.is_object()) throw ParseError(origin, 1, "trajectory must be a JSON object");
  TrajectorySpec t;
  if (doc.contains("legs") && doc.contains("poses"))
    throw ParseError(origin, 0, "trajectory takes either 'legs' or 'poses', not both");
  if (doc.contains("legs")) {
    const json& legs = doc.at("legs");
    if (!legs.is_array()) throw ParseError(origin, 0, "'legs' must be an array");
    for (std::size_t i = 0; i < legs.size(); ++i) {
      const std::string where = "legs[" + std::to_string(i) + "]";
      if (!legs[i].contains("start") || !legs[i].contains("end"))
        throw ParseError(origin, 0, where + ": needs 'start' and 'end'");
      TrajectoryLeg leg;
      leg.start = joints(legs[i].at("start"), origin, where);
      leg.end = joints(legs[i].at("end"), origin, where);
      leg.duration = detail::number_field(legs[i], "duration", origin, where);
      if (leg.start.size() != leg.end.size())
        throw ParseError(origin, 0, where + ": start and end differ in length");
      t.legs.push_back(leg);
    }
  }
  if (doc.contains("poses")) {
    const json& poses = doc.at("poses");
    if (!poses.is_array()) throw ParseError(origin, 0, "'poses' must be an array");
    for (std::size_t i = 0; i < poses.size(); ++i)
      t.poses.push_back(joints(poses[i], origin, "poses[" + std::to_string(i) + "]"));
  }
  if (t.legs.empty() && t.poses.empty())
    throw ParseError(origin, 0, "trajectory needs 'legs' or 'poses'");
  try {
    t.samples();
  } catch (const InvalidInputError& e) {
    throw ParseError(origin, 0, e.what());
  }
  return t;
}

TrajectorySpec load_trajectory(const std::filesystem::path& path) {
  return parse_trajectory(detail::read_text_file(path), path.string());
}

std::string format_trajectory(const TrajectorySpec& traj) {
  json doc = json::object();
  if (!traj.legs.empty()) {
    json legs = json::array();
    for (const auto& l : traj.legs)
      legs.push_back({{"start", to_json(l.start)}, {"end", to_json(l.end)}, {"duration", l.duration}});
    doc["legs"] = legs;
  }
  if (!traj.poses.empty()) {
    json poses = json::array();
    for (const auto& p : traj.poses) poses.push_back(to_json(p));
    doc["poses"] = poses;
  }
  return doc.dump(2) + "\n";
}

SensorSpec parse_sensor(const std::string& text, const std::string& origin) {
  const json doc = detail::parse_json(text, origin);
  if (!doc.is_object()) throw ParseError(origin, 1, "sensor must be a JSON object");
  SensorSpec s;
  try {
    if (doc.contains("preset")) s = find_preset(doc.at("preset").get<std::string>()).spec;
    if (doc.contains("kind")) s.kind = sensor_kind_from_string(doc.at("kind").get<std::string>());
    auto count = [&](const char* key, std::size_t& field) {
      if (!doc.contains(key)) return;
      if (!doc.at(key).is_number_unsigned())
        throw ParseError(origin, 0, std::string("'") + key + "' must be a positive integer");
      field = doc.at(key).get<std::size_t>();
    };
    count("rows", s.rows);
    count("cols", s.cols);
    if (doc.contains("fov_x_deg")) s.fov_x = detail::number_field(doc, "fov_x_deg", origin, "sensor") * M_PI / 180.0;
    if (doc.contains("fov_y_deg")) s.fov_y = detail::number_field(doc, "fov_y_deg", origin, "sensor") * M_PI / 180.0;
    s.min_range = detail::number_field_or(doc, "min_range", s.min_range, origin, "sensor");
    s.max_range = detail::number_field_or(doc, "max_range", s.max_range, origin, "sensor");
    s.noise.sigma_abs = detail::number_field_or(doc, "sigma_abs", s.noise.sigma_abs, origin, "sensor");
    s.noise.sigma_rel = detail::number_field_or(doc, "sigma_rel", s.noise.sigma_rel, origin, "sensor");
    s.sample_rate = detail::number_field_or(doc, "sample_rate", s.sample_rate, origin, "sensor");
    s.check();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(origin, 0, e.what());
  } catch (const json::exception& e) {
    throw ParseError(origin, 0, e.what());
  }
  return s;
}

SensorSpec load_sensor(const std::filesystem::path& path) {
  return parse_sensor(detail::read_text_file(path), path.string());
}

}  // namespace kincal
