#pragma once

#include <filesystem>
#include <string>

#include "kincal/optimizer.hpp"

namespace kincal {

/// Calibration config file (JSON). Every key is optional and overrides `base`:
///
///   {"n": 2, "m": 2, "g_min": 0.75, "d_max": 0.020, "f_min": 0.80,
///    "epsilon": 1e-4, "i_max": 50, "orientation": "view" | "origin",
///    "center_shift": false, "anchored_datasets": [0], "threads": 0,
///    "lm": {"initial_lambda": 1e-4, "lambda_increase": 10, "lambda_decrease": 10,
///           "max_iterations": 25, "gradient_tolerance": 1e-10}}
CalibrationConfig parse_config(const std::string& text, const std::string& origin = "<string>",
                               const CalibrationConfig& base = {});
CalibrationConfig load_config(const std::filesystem::path& path, const CalibrationConfig& base = {});
std::string format_config(const CalibrationConfig& cfg);

/// report.json: scale, convergence, wall time and the per-iteration records.
std::string format_report(const CalibrationReport& report);
/// iteration,cost,matches,delta
std::string format_iterations_csv(const CalibrationReport& report);

/// Writes model.json, report.json and iterations.csv into `dir` (created if needed).
void save_calibration(const std::filesystem::path& dir, const CalibrationReport& report);

}  // namespace kincal
