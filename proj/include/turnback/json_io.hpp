#pragma once

// File helpers shared by every reader and writer.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "turnback/errors.hpp"

namespace turnback {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

inline Json parse_json_text(std::string_view text, std::string_view origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string(origin) + ": " + e.what());
  }
}

inline Json read_json_file(const std::filesystem::path& path) {
  return parse_json_text(read_text_file(path), path.string());
}

namespace detail {

inline const Json& require_field(const Json& obj, std::string_view key, std::string_view where) {
  if (!obj.is_object()) throw SchemaError(std::string(where) + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw SchemaError(std::string(where) + ": missing field '" + std::string(key) + "'");
  }
  return *it;
}

inline std::string require_string(const Json& obj, std::string_view key, std::string_view where) {
  const Json& v = require_field(obj, key, where);
  if (!v.is_string()) {
    throw SchemaError(std::string(where) + ": field '" + std::string(key) + "' must be a string");
  }
  return v.get<std::string>();
}

inline long long require_integer(const Json& obj, std::string_view key, std::string_view where) {
  const Json& v = require_field(obj, key, where);
  if (!v.is_number_integer()) {
    throw SchemaError(std::string(where) + ": field '" + std::string(key) +
                      "' must be an integer");
  }
  return v.get<long long>();
}

inline const Json& require_array(const Json& obj, std::string_view key, std::string_view where) {
  const Json& v = require_field(obj, key, where);
  if (!v.is_array()) {
    throw SchemaError(std::string(where) + ": field '" + std::string(key) + "' must be a list");
  }
  return v;
}

}  // namespace detail
}  // namespace turnback
