#pragma once

#include <filesystem>
#include <string>

#include "kincal/kinematics.hpp"

namespace kincal {

/// A model together with its per-scalar calibration mask.
struct ModelFile {
  KinematicModel model;
  ParamMask mask;
};

/// JSON model file:
///
///   {
///     "format": "kincal-model/1",
///     "segments": [
///       {"joint": "revolute", "alpha": 0.0, "beta": 0.0, "x": 0.0, "y": 0.0,
///        "mask": [0, 0, 0, 0]},
///       ...
///     ],
///     "ee": {"alpha": 0.0, "beta": 0.0, "gamma": 0.0, "x": 0.0, "y": 0.0, "z": 0.1,
///            "mask": [1, 1, 1, 1, 1, 1]}
///   }
///
/// Segments are listed base to EE; segment i is followed by joint i+1 of kind `joint`
/// ("revolute" or "prismatic"). Angles in radians, offsets in meters. Mask entries follow
/// the packed order (alpha, beta, x, y) and (alpha, beta, gamma, x, y, z); a missing "mask"
/// falls back to ParamMask::defaults_for for that block.
ModelFile load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const KinematicModel& model,
                const ParamMask& mask);

ModelFile parse_model(const std::string& text, const std::string& origin = "<string>");
std::string format_model(const KinematicModel& model, const ParamMask& mask);

}  // namespace kincal
