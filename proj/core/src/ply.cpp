#include "kincal/ply.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "kincal/errors.hpp"

namespace kincal {

std::string format_ply(const std::vector<PlyVertex>& vertices) {
  bool colored = !vertices.empty();
  for (const auto& v : vertices) colored = colored && v.color.has_value();
  std::ostringstream out;
  out << "ply\nformat ascii 1.0\nelement vertex " << vertices.size()
      << "\nproperty float x\nproperty float y\nproperty float z\n";
  if (colored) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";
  out.precision(9);
  for (const auto& v : vertices) {
    out << float(v.position.x()) << ' ' << float(v.position.y()) << ' ' << float(v.position.z());
    if (colored) out << ' ' << int((*v.color)[0]) << ' ' << int((*v.color)[1]) << ' ' << int((*v.color)[2]);
    out << '\n';
  }
  return out.str();
}

void write_ply(const std::filesystem::path& path, const std::vector<PlyVertex>& vertices) {
  detail::write_text_file(path, format_ply(vertices));
}

std::vector<PlyVertex> read_ply(const std::filesystem::path& path) {
  std::istringstream in(detail::read_text_file(path));
  const std::string file = path.string();
  std::string line;
  std::size_t lineno = 0, count = 0;
  int props = 0;
  bool header_done = false;
  auto next = [&] {
    ++lineno;
    return bool(std::getline(in, line));
  };
  if (!next() || line != "ply") throw ParseError(file, 1, "not a PLY file");
  while (next()) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "ascii") throw ParseError(file, lineno, "only ASCII PLY is supported");
    } else if (word == "element") {
      std::string name;
      ls >> name >> count;
      if (name != "vertex") throw ParseError(file, lineno, "unexpected element '" + name + "'");
    } else if (word == "property") {
      ++props;
    } else if (word == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw ParseError(file, lineno, "missing end_header");
  if (props != 3 && props != 6) throw ParseError(file, lineno, "expected 3 or 6 vertex properties");
  std::vector<PlyVertex> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    if (!next()) throw ParseError(file, lineno, "fewer vertices than declared");
    std::istringstream ls(line);
    PlyVertex v;
    double x, y, z;
    if (!(ls >> x >> y >> z)) throw ParseError(file, lineno, "bad vertex record");
    v.position = {x, y, z};
    if (props == 6) {
      int r, g, b;
      if (!(ls >> r >> g >> b)) throw ParseError(file, lineno, "bad vertex color");
      v.color = std::array<std::uint8_t, 3>{std::uint8_t(r), std::uint8_t(g), std::uint8_t(b)};
    }
    out.push_back(v);
  }
  return out;
}

std::vector<PlyVertex> ply_vertices(const ProjectedCloud& cloud,
                                    std::optional<std::array<std::uint8_t, 3>> color) {
  std::vector<PlyVertex> out;
  for (std::size_t c = 0; c < cloud.size(); ++c)
    if (cloud.is_valid(c)) out.push_back({cloud.points[c], color});
  return out;
}

std::array<std::uint8_t, 3> dataset_color(std::size_t index) {
  // Golden-angle hue walk, full saturation.
  const double h = std::fmod(double(index) * 137.50776405, 360.0) / 60.0;
  const double x = 1.0 - std::abs(std::fmod(h, 2.0) - 1.0);
  double r = 0, g = 0, b = 0;
  switch (int(h)) {
    case 0: r = 1; g = x; break;
    case 1: r = x; g = 1; break;
    case 2: g = 1; b = x; break;
    case 3: g = x; b = 1; break;
    case 4: r = x; b = 1; break;
    default: r = 1; b = x; break;
  }
  return {std::uint8_t(std::lround(r * 255)), std::uint8_t(std::lround(g * 255)),
          std::uint8_t(std::lround(b * 255))};
}

}  // namespace kincal
