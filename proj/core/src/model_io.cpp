#include "kincal/model_io.hpp"

#include "json_util.hpp"

namespace kincal {

using detail::json;

namespace {

constexpr const char* kFormat = "kincal-model/1";

void read_mask(const json& block, std::size_t offset, std::size_t width, ParamMask& mask,
               const std::string& origin, const std::string& where) {
  if (!block.contains("mask")) return;
  const json& m = block.at("mask");
  if (!m.is_array() || m.size() != width)
    throw ParseError(origin, 0, where + ": 'mask' must be an array of " + std::to_string(width));
  for (std::size_t k = 0; k < width; ++k) {
    if (!m[k].is_number_integer() || (m[k].get<int>() != 0 && m[k].get<int>() != 1))
      throw ParseError(origin, 0, where + ": mask entries must be 0 or 1");
    mask.set(offset + k, m[k].get<int>() == 1);
  }
}

}  // namespace

ModelFile parse_model(const std::string& text, const std::string& origin) {
  const json doc = detail::parse_json(text, origin);
  if (!doc.is_object()) throw ParseError(origin, 1, "model file must be a JSON object");
  if (doc.contains("format") && doc.at("format") != kFormat)
    throw ParseError(origin, 0, "unsupported model format " + doc.at("format").dump());

  ModelFile out;
  const json segs = doc.value("segments", json::array());
  if (!segs.is_array()) throw ParseError(origin, 0, "'segments' must be an array");
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const json& s = segs[i];
    const std::string where = "segments[" + std::to_string(i) + "]";
    Segment seg;
    const std::string kind = s.value("joint", std::string("revolute"));
    if (kind == "revolute") {
      seg.joint = JointKind::Revolute;
    } else if (kind == "prismatic") {
      seg.joint = JointKind::Prismatic;
    } else {
      throw ParseError(origin, 0, where + ": unknown joint kind '" + kind + "'");
    }
    seg.alpha = detail::number_field(s, "alpha", origin, where);
    seg.beta = detail::number_field(s, "beta", origin, where);
    seg.x = detail::number_field_or(s, "x", 0.0, origin, where);
    seg.y = detail::number_field_or(s, "y", 0.0, origin, where);
    out.model.segments.push_back(seg);
  }
  if (!doc.contains("ee")) throw ParseError(origin, 0, "missing 'ee' block");
  const json& e = doc.at("ee");
  out.model.ee.alpha = detail::number_field(e, "alpha", origin, "ee");
  out.model.ee.beta = detail::number_field(e, "beta", origin, "ee");
  out.model.ee.gamma = detail::number_field(e, "gamma", origin, "ee");
  out.model.ee.x = detail::number_field(e, "x", origin, "ee");
  out.model.ee.y = detail::number_field(e, "y", origin, "ee");
  out.model.ee.z = detail::number_field(e, "z", origin, "ee");

  try {
    validate_model(out.model);
  } catch (const InvalidParameterError& err) {
    throw ParseError(origin, 0, err.what());
  }

  out.mask = ParamMask::defaults_for(out.model);
  for (std::size_t i = 0; i < segs.size(); ++i)
    read_mask(segs[i], 4 * i, 4, out.mask, origin, "segments[" + std::to_string(i) + "]");
  read_mask(e, 4 * segs.size(), 6, out.mask, origin, "ee");
  return out;
}

std::string format_model(const KinematicModel& model, const ParamMask& mask) {
  if (mask.size() != model.param_count())
    throw DimensionError("mask length does not match the model");
  json doc;
  doc["format"] = kFormat;
  json segs = json::array();
  for (std::size_t i = 0; i < model.segments.size(); ++i) {
    const Segment& s = model.segments[i];
    json j;
    j["joint"] = s.joint == JointKind::Revolute ? "revolute" : "prismatic";
    j["alpha"] = s.alpha;
    j["beta"] = s.beta;
    j["x"] = s.x;
    j["y"] = s.y;
    j["mask"] = {int(mask[4 * i]), int(mask[4 * i + 1]), int(mask[4 * i + 2]),
                 int(mask[4 * i + 3])};
    segs.push_back(j);
  }
  doc["segments"] = segs;
  const std::size_t b = 4 * model.segments.size();
  doc["ee"] = {{"alpha", model.ee.alpha}, {"beta", model.ee.beta}, {"gamma", model.ee.gamma},
               {"x", model.ee.x},         {"y", model.ee.y},       {"z", model.ee.z}};
  doc["ee"]["mask"] = {int(mask[b]),     int(mask[b + 1]), int(mask[b + 2]),
                       int(mask[b + 3]), int(mask[b + 4]), int(mask[b + 5])};
  return doc.dump(2) + "\n";
}

ModelFile load_model(const std::filesystem::path& path) {
  return parse_model(detail::read_text_file(path), path.string());
}

void save_model(const std::filesystem::path& path, const KinematicModel& model,
                const ParamMask& mask) {
  detail::write_text_file(path, format_model(model, mask));
}

}  // namespace kincal
