#pragma once

#include <string>
#include <vector>

#include "kincal/optimizer.hpp"
#include "kincal/simulator.hpp"

namespace kincal {

/// A sensor model with the calibration thresholds tuned for it.
struct SensorPreset {
  std::string name;
  SensorSpec spec;
  CalibrationConfig config;
};

/// hokuyo_utm30lx, wenglor_mlsl236, kinect_azure, motioncam_3d.
const std::vector<SensorPreset>& sensor_presets();
/// Throws ConfigurationError for unknown names.
const SensorPreset& find_preset(const std::string& name);

/// Calibration defaults: the kinect_azure thresholds.
CalibrationConfig default_calibration_config();

}  // namespace kincal
