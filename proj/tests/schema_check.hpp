#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

// Validator for the subset of JSON Schema the shipped schemas use:
// type, required, properties, items, enum. Throws std::runtime_error with a
// path-qualified message on the first violation.
namespace schema_check {

using json = nlohmann::json;

inline bool type_matches(const json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "integer") return value.is_number_integer() || value.is_number_unsigned();
  if (type == "number") return value.is_number();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  return false;
}

inline void validate(const json& value, const json& schema, const std::string& path = "$") {
  if (schema.contains("type")) {
    const std::string type = schema["type"].get<std::string>();
    if (!type_matches(value, type))
      throw std::runtime_error(path + ": expected " + type + ", got " + value.type_name());
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& candidate : schema["enum"])
      if (candidate == value) found = true;
    if (!found) throw std::runtime_error(path + ": value not in enum");
  }
  if (value.is_object()) {
    if (schema.contains("required"))
      for (const auto& key : schema["required"])
        if (!value.contains(key.get<std::string>()))
          throw std::runtime_error(path + ": missing required key " + key.get<std::string>());
    if (schema.contains("properties"))
      for (auto it = schema["properties"].begin(); it != schema["properties"].end(); ++it)
        if (value.contains(it.key())) validate(value.at(it.key()), it.value(), path + "." + it.key());
  }
  if (value.is_array() && schema.contains("items")) {
    std::size_t i = 0;
    for (const auto& element : value)
      validate(element, schema["items"], path + "[" + std::to_string(i++) + "]");
  }
}

}  // namespace schema_check
