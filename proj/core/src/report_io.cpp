#include "kincal/report_io.hpp"

#include <sstream>

#include "json_util.hpp"
#include "kincal/model_io.hpp"

namespace kincal {

using detail::json;

namespace {

int int_field(const json& obj, const char* key, int fallback, const std::string& origin) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number_integer())
    throw ParseError(origin, 0, std::string("'") + key + "' must be an integer");
  return obj.at(key).get<int>();
}

}  // namespace

CalibrationConfig parse_config(const std::string& text, const std::string& origin,
                               const CalibrationConfig& base) {
  const json doc = detail::parse_json(text, origin);
  if (!doc.is_object()) throw ParseError(origin, 1, "config must be a JSON object");
  static const char* known[] = {"n",          "m",      "g_min",        "d_max",
                                "f_min",      "epsilon", "i_max",       "orientation",
                                "center_shift", "anchored_datasets", "threads", "lm"};
  for (const auto& [key, value] : doc.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ParseError(origin, 0, "unknown config key '" + key + "'");
  }
  CalibrationConfig cfg = base;
  cfg.filter.half_rows = int_field(doc, "n", cfg.filter.half_rows, origin);
  cfg.filter.half_cols = int_field(doc, "m", cfg.filter.half_cols, origin);
  cfg.filter.g_min = detail::number_field_or(doc, "g_min", cfg.filter.g_min, origin, "config");
  cfg.d_max = detail::number_field_or(doc, "d_max", cfg.d_max, origin, "config");
  cfg.f_min = detail::number_field_or(doc, "f_min", cfg.f_min, origin, "config");
  cfg.epsilon = detail::number_field_or(doc, "epsilon", cfg.epsilon, origin, "config");
  cfg.i_max = int_field(doc, "i_max", cfg.i_max, origin);
  cfg.threads = int_field(doc, "threads", cfg.threads, origin);
  if (doc.contains("orientation")) {
    const json& o = doc.at("orientation");
    if (o == "view") {
      cfg.filter.orientation = NormalOrientation::ViewDirection;
    } else if (o == "origin") {
      cfg.filter.orientation = NormalOrientation::OriginPosition;
    } else {
      throw ParseError(origin, 0, "orientation must be \"view\" or \"origin\"");
    }
  }
  if (doc.contains("center_shift")) {
    if (!doc.at("center_shift").is_boolean())
      throw ParseError(origin, 0, "'center_shift' must be a boolean");
    cfg.center_shift = doc.at("center_shift").get<bool>();
  }
  if (doc.contains("anchored_datasets")) {
    const json& a = doc.at("anchored_datasets");
    if (!a.is_array()) throw ParseError(origin, 0, "'anchored_datasets' must be an array");
    cfg.anchored_datasets.clear();
    for (const json& v : a) {
      if (!v.is_number_unsigned())
        throw ParseError(origin, 0, "'anchored_datasets' entries must be indices");
      cfg.anchored_datasets.push_back(v.get<std::size_t>());
    }
  }
  if (doc.contains("lm")) {
    const json& lm = doc.at("lm");
    if (!lm.is_object()) throw ParseError(origin, 0, "'lm' must be an object");
    cfg.lm.initial_lambda =
        detail::number_field_or(lm, "initial_lambda", cfg.lm.initial_lambda, origin, "lm");
    cfg.lm.lambda_increase =
        detail::number_field_or(lm, "lambda_increase", cfg.lm.lambda_increase, origin, "lm");
    cfg.lm.lambda_decrease =
        detail::number_field_or(lm, "lambda_decrease", cfg.lm.lambda_decrease, origin, "lm");
    cfg.lm.max_iterations = int_field(lm, "max_iterations", cfg.lm.max_iterations, origin);
    cfg.lm.gradient_tolerance = detail::number_field_or(lm, "gradient_tolerance",
                                                        cfg.lm.gradient_tolerance, origin, "lm");
  }
  try {
    cfg.check();
  } catch (const InvalidParameterError& e) {
    throw ParseError(origin, 0, e.what());
  }
  return cfg;
}

CalibrationConfig load_config(const std::filesystem::path& path, const CalibrationConfig& base) {
  return parse_config(detail::read_text_file(path), path.string(), base);
}

std::string format_config(const CalibrationConfig& cfg) {
  json doc;
  doc["n"] = cfg.filter.half_rows;
  doc["m"] = cfg.filter.half_cols;
  doc["g_min"] = cfg.filter.g_min;
  doc["d_max"] = cfg.d_max;
  doc["f_min"] = cfg.f_min;
  doc["epsilon"] = cfg.epsilon;
  doc["i_max"] = cfg.i_max;
  doc["orientation"] =
      cfg.filter.orientation == NormalOrientation::ViewDirection ? "view" : "origin";
  doc["center_shift"] = cfg.center_shift;
  doc["anchored_datasets"] = cfg.anchored_datasets;
  doc["threads"] = cfg.threads;
  doc["lm"] = {{"initial_lambda", cfg.lm.initial_lambda},
               {"lambda_increase", cfg.lm.lambda_increase},
               {"lambda_decrease", cfg.lm.lambda_decrease},
               {"max_iterations", cfg.lm.max_iterations},
               {"gradient_tolerance", cfg.lm.gradient_tolerance}};
  return doc.dump(2) + "\n";
}

std::string format_report(const CalibrationReport& report) {
  json doc;
  doc["converged"] = report.converged;
  doc["iterations"] = report.iterations.size();
  doc["scale"] = report.scale;
  doc["wall_seconds"] = report.wall_seconds;
  json its = json::array();
  for (const IterationRecord& r : report.iterations) {
    json j;
    j["iteration"] = r.iteration;
    j["initial_cost"] = r.initial_cost;
    j["cost"] = r.cost;
    j["matches"] = r.matches;
    j["delta"] = r.delta;
    j["inner_iterations"] = r.inner_iterations;
    j["inner_costs"] = r.inner_costs;
    json pairs = json::array();
    for (const PairCount& p : r.pairs) pairs.push_back({p.dataset_a, p.dataset_b, p.count});
    j["pairs"] = pairs;
    its.push_back(j);
  }
  doc["history"] = its;
  return doc.dump(2) + "\n";
}

std::string format_iterations_csv(const CalibrationReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "iteration,cost,matches,delta\n";
  for (const IterationRecord& r : report.iterations)
    out << r.iteration << ',' << r.cost << ',' << r.matches << ',' << r.delta << '\n';
  return out.str();
}

void save_calibration(const std::filesystem::path& dir, const CalibrationReport& report) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  save_model(dir / "model.json", report.model, report.mask);
  detail::write_text_file(dir / "report.json", format_report(report));
  detail::write_text_file(dir / "iterations.csv", format_iterations_csv(report));
}

}  // namespace kincal
