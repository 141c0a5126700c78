#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "kincal/dataset.hpp"
#include "kincal/errors.hpp"

namespace kincal {
namespace {

namespace fs = std::filesystem;

void append_number(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

struct Record {
  std::size_t line;
  std::vector<std::string_view> fields;
};

/// Reads all non-empty, non-comment lines. The text buffer must outlive the records.
std::vector<Record> read_records(const std::string& text) {
  std::vector<Record> out;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    std::string_view line(text.data() + pos, end - pos);
    auto fields = split_fields(line);
    if (!fields.empty() && fields[0][0] != '#') out.push_back({line_no, std::move(fields)});
    if (end == text.size()) break;
    pos = end + 1;
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double parse_double(std::string_view s, const std::string& file, std::size_t line,
                    const char* field) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError(file, line, std::string("bad number '") + std::string(s) + "' in field " +
                                     field);
  return v;
}

std::size_t parse_index(std::string_view s, const std::string& file, std::size_t line,
                        const char* field) {
  std::size_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError(file, line, std::string("bad index '") + std::string(s) + "' in field " +
                                     field);
  return v;
}

enum class JointLayout { Cell, Column, Frame };

JointLayout choose_layout(const ScanDataset& ds) {
  if (ds.size() == 0) return JointLayout::Cell;
  auto same = [](const JointVector& a, const JointVector& b) {
    if (a.size() != b.size()) return false;
    for (Eigen::Index k = 0; k < a.size(); ++k) {
      // Bitwise equality; NaN entries compare by pattern.
      if (std::memcmp(&a[k], &b[k], sizeof(double)) != 0) return false;
    }
    return true;
  };
  bool frame = true, column = true;
  for (std::size_t i = 0; i < ds.rows && column; ++i)
    for (std::size_t j = 0; j < ds.cols; ++j) {
      const auto& q = ds.joints[ds.index(i, j)];
      if (frame && !same(q, ds.joints[0])) frame = false;
      if (!same(q, ds.joints[ds.index(0, j)])) {
        column = false;
        break;
      }
    }
  if (frame && column) return JointLayout::Frame;
  return column ? JointLayout::Column : JointLayout::Cell;
}

}  // namespace

void save_dataset(const ScanDataset& ds, const fs::path& dir) {
  ds.check();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  const JointLayout layout = choose_layout(ds);
  std::string meta = "# kincal dataset\n";
  meta += std::string("kind ") + to_string(ds.kind) + "\n";
  meta += "rows " + std::to_string(ds.rows) + "\n";
  meta += "cols " + std::to_string(ds.cols) + "\n";
  meta += "joint_count " + std::to_string(ds.joint_count) + "\n";
  meta += std::string("joint_layout ") +
          (layout == JointLayout::Cell ? "cell" : layout == JointLayout::Column ? "column"
                                                                                : "frame") +
          "\n";

  std::string points = "# i j valid x y z\n";
  points.reserve(ds.size() * 64);
  for (std::size_t i = 0; i < ds.rows; ++i)
    for (std::size_t j = 0; j < ds.cols; ++j) {
      const std::size_t c = ds.index(i, j);
      points += std::to_string(i) + ' ' + std::to_string(j) + ' ' + (ds.valid[c] ? '1' : '0');
      for (int k = 0; k < 3; ++k) {
        points += ' ';
        append_number(points, ds.points[c][k]);
      }
      points += '\n';
    }

  std::string joints = "# i j q_1 ... q_n\n";
  auto put_joints = [&](const std::string& prefix, const JointVector& q) {
    joints += prefix;
    for (Eigen::Index k = 0; k < q.size(); ++k) {
      joints += ' ';
      append_number(joints, q[k]);
    }
    joints += '\n';
  };
  if (layout == JointLayout::Frame) {
    if (ds.size() > 0) put_joints("* *", ds.joints[0]);
  } else if (layout == JointLayout::Column) {
    for (std::size_t j = 0; j < ds.cols; ++j) put_joints("* " + std::to_string(j), ds.joints[j]);
  } else {
    for (std::size_t i = 0; i < ds.rows; ++i)
      for (std::size_t j = 0; j < ds.cols; ++j)
        put_joints(std::to_string(i) + ' ' + std::to_string(j), ds.joints[ds.index(i, j)]);
  }

  auto write = [&](const char* name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    out << text;
  };
  write("meta", meta);
  write("points", points);
  write("joints", joints);
}

ScanDataset load_dataset(const fs::path& dir) {
  const std::string meta_file = (dir / "meta").string();
  const std::string meta_text = slurp(dir / "meta");
  std::map<std::string, std::pair<std::string, std::size_t>> meta;
  for (const Record& r : read_records(meta_text)) {
    if (r.fields.size() != 2)
      throw ParseError(meta_file, r.line, "expected 'key value'");
    meta[std::string(r.fields[0])] = {std::string(r.fields[1]), r.line};
  }
  auto need = [&](const char* key) -> const std::pair<std::string, std::size_t>& {
    auto it = meta.find(key);
    if (it == meta.end()) throw ParseError(meta_file, 0, std::string("missing key '") + key + "'");
    return it->second;
  };

  SensorKind kind;
  try {
    kind = sensor_kind_from_string(need("kind").first);
  } catch (const InvalidInputError& e) {
    throw ParseError(meta_file, need("kind").second, e.what());
  }
  const auto& rows_v = need("rows");
  const auto& cols_v = need("cols");
  const auto& jc_v = need("joint_count");
  const std::size_t rows = parse_index(rows_v.first, meta_file, rows_v.second, "rows");
  const std::size_t cols = parse_index(cols_v.first, meta_file, cols_v.second, "cols");
  const std::size_t jc = parse_index(jc_v.first, meta_file, jc_v.second, "joint_count");
  const std::string layout_name = meta.count("joint_layout") ? meta["joint_layout"].first : "cell";
  JointLayout layout;
  if (layout_name == "cell") {
    layout = JointLayout::Cell;
  } else if (layout_name == "column") {
    layout = JointLayout::Column;
  } else if (layout_name == "frame") {
    layout = JointLayout::Frame;
  } else {
    throw ParseError(meta_file, meta["joint_layout"].second,
                     "unknown joint_layout '" + layout_name + "'");
  }

  ScanDataset ds = ScanDataset::empty(kind, rows, cols, jc);
  std::vector<std::uint8_t> seen(ds.size(), 0);

  const std::string points_file = (dir / "points").string();
  const std::string points_text = slurp(dir / "points");
  for (const Record& r : read_records(points_text)) {
    if (r.fields.size() != 6)
      throw ParseError(points_file, r.line,
                       "expected 6 fields (i j valid x y z), got " + std::to_string(r.fields.size()));
    const std::size_t i = parse_index(r.fields[0], points_file, r.line, "i");
    const std::size_t j = parse_index(r.fields[1], points_file, r.line, "j");
    if (i >= rows || j >= cols) throw ParseError(points_file, r.line, "cell outside the grid");
    const std::size_t c = ds.index(i, j);
    if (seen[c]) throw ParseError(points_file, r.line, "duplicate cell");
    seen[c] = 1;
    if (r.fields[2] != "0" && r.fields[2] != "1")
      throw ParseError(points_file, r.line, "field valid must be 0 or 1");
    ds.valid[c] = r.fields[2] == "1";
    for (int k = 0; k < 3; ++k)
      ds.points[c][k] =
          parse_double(r.fields[3 + std::size_t(k)], points_file, r.line, k == 0 ? "x" : k == 1 ? "y" : "z");
  }
  for (std::size_t c = 0; c < ds.size(); ++c)
    if (!seen[c])
      throw ParseError(points_file, 0, "missing record for cell " + std::to_string(c / cols) + " " +
                                           std::to_string(c % cols));

  const std::string joints_file = (dir / "joints").string();
  const std::string joints_text = slurp(dir / "joints");
  std::fill(seen.begin(), seen.end(), 0);
  for (const Record& r : read_records(joints_text)) {
    if (r.fields.size() != 2 + jc)
      throw ParseError(joints_file, r.line,
                       "expected " + std::to_string(jc) + " joint values, got " +
                           std::to_string(r.fields.size() < 2 ? 0 : r.fields.size() - 2));
    JointVector q(static_cast<Eigen::Index>(jc));
    for (std::size_t k = 0; k < jc; ++k)
      q[static_cast<Eigen::Index>(k)] = parse_double(r.fields[2 + k], joints_file, r.line, "q");
    if (layout == JointLayout::Frame) {
      if (r.fields[0] != "*" || r.fields[1] != "*")
        throw ParseError(joints_file, r.line, "frame layout expects '* *'");
      for (std::size_t c = 0; c < ds.size(); ++c) {
        ds.joints[c] = q;
        seen[c] = 1;
      }
    } else if (layout == JointLayout::Column) {
      if (r.fields[0] != "*") throw ParseError(joints_file, r.line, "column layout expects '* j'");
      const std::size_t j = parse_index(r.fields[1], joints_file, r.line, "j");
      if (j >= cols) throw ParseError(joints_file, r.line, "column outside the grid");
      for (std::size_t i = 0; i < rows; ++i) {
        ds.joints[ds.index(i, j)] = q;
        seen[ds.index(i, j)] = 1;
      }
    } else {
      const std::size_t i = parse_index(r.fields[0], joints_file, r.line, "i");
      const std::size_t j = parse_index(r.fields[1], joints_file, r.line, "j");
      if (i >= rows || j >= cols) throw ParseError(joints_file, r.line, "cell outside the grid");
      ds.joints[ds.index(i, j)] = q;
      seen[ds.index(i, j)] = 1;
    }
  }
  for (std::size_t c = 0; c < ds.size(); ++c)
    if (!seen[c])
      throw ParseError(joints_file, 0, "no joint state for cell " + std::to_string(c / cols) +
                                           " " + std::to_string(c % cols));
  ds.check();
  return ds;
}

}  // namespace kincal
