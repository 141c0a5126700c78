#include "kincal/presets.hpp"

#include <cmath>

#include "kincal/errors.hpp"

namespace kincal {
namespace {

double deg(double d) { return d * M_PI / 180.0; }

CalibrationConfig thresholds(int n, int m, double g_min, double f_min) {
  CalibrationConfig c;
  c.filter.half_rows = n;
  c.filter.half_cols = m;
  c.filter.g_min = g_min;
  c.d_max = 0.020;
  c.f_min = f_min;
  c.epsilon = 1e-4;
  c.i_max = 50;
  return c;
}

std::vector<SensorPreset> build() {
  std::vector<SensorPreset> out;

  SensorPreset hokuyo{"hokuyo_utm30lx", {}, thresholds(2, 4, 0.60, 0.75)};
  hokuyo.spec.kind = SensorKind::SingleBeamLidar;
  hokuyo.spec.rows = 1080;
  hokuyo.spec.cols = 1;
  hokuyo.spec.fov_y = deg(270.0);
  hokuyo.spec.min_range = 0.10;
  hokuyo.spec.max_range = 40.0;
  hokuyo.spec.noise = {0.018, 0.0};
  hokuyo.spec.sample_rate = 40.0;
  out.push_back(hokuyo);

  SensorPreset wenglor{"wenglor_mlsl236", {}, thresholds(3, 2, 0.80, 0.80)};
  wenglor.spec.kind = SensorKind::LineScanner;
  wenglor.spec.rows = 1280;
  wenglor.spec.cols = 1;
  wenglor.spec.fov_y = deg(40.0);
  wenglor.spec.min_range = 0.30;
  wenglor.spec.max_range = 1.50;
  wenglor.spec.noise = {0.0002, 0.0};
  wenglor.spec.sample_rate = 200.0;
  out.push_back(wenglor);

  SensorPreset kinect{"kinect_azure", {}, thresholds(2, 2, 0.75, 0.80)};
  kinect.spec.kind = SensorKind::DepthCamera;
  kinect.spec.rows = 288;
  kinect.spec.cols = 320;
  kinect.spec.fov_x = deg(75.0);
  kinect.spec.fov_y = deg(65.0);
  kinect.spec.min_range = 0.50;
  kinect.spec.max_range = 5.46;
  kinect.spec.noise = {0.00253, 0.0021};
  kinect.spec.sample_rate = 30.0;
  out.push_back(kinect);

  SensorPreset motioncam{"motioncam_3d", {}, thresholds(2, 2, 0.80, 0.80)};
  motioncam.spec.kind = SensorKind::DepthCamera;
  motioncam.spec.rows = 800;
  motioncam.spec.cols = 1120;
  motioncam.spec.fov_x = deg(45.0);
  motioncam.spec.fov_y = deg(33.0);
  motioncam.spec.min_range = 0.497;
  motioncam.spec.max_range = 0.939;
  motioncam.spec.noise = {0.00018, 0.0};
  motioncam.spec.sample_rate = 20.0;
  out.push_back(motioncam);

  return out;
}

}  // namespace

const std::vector<SensorPreset>& sensor_presets() {
  static const std::vector<SensorPreset> presets = build();
  return presets;
}

const SensorPreset& find_preset(const std::string& name) {
  for (const auto& p : sensor_presets())
    if (p.name == name) return p;
  std::string known;
  for (const auto& p : sensor_presets()) known += (known.empty() ? "" : ", ") + p.name;
  throw ConfigurationError("unknown sensor preset '" + name + "' (known: " + known + ")");
}

CalibrationConfig default_calibration_config() { return find_preset("kinect_azure").config; }

}  // namespace kincal
