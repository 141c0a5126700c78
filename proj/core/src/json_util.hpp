#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "kincal/errors.hpp"

namespace kincal::detail {

using nlohmann::json;

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

inline json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) line += text[i] == '\n';
    throw ParseError(origin, line, e.what());
  }
}

inline double number_field(const json& obj, const char* key, const std::string& origin,
                           const std::string& where) {
  if (!obj.is_object() || !obj.contains(key) || !obj.at(key).is_number())
    throw ParseError(origin, 0, where + ": missing or non-numeric field '" + key + "'");
  return obj.at(key).get<double>();
}

inline double number_field_or(const json& obj, const char* key, double fallback,
                              const std::string& origin, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return number_field(obj, key, origin, where);
}

}  // namespace kincal::detail
