#ifndef TASKPLAN_CORE_JSONIO_HPP
#define TASKPLAN_CORE_JSONIO_HPP

#include <string>

#include <json.hpp>

#include "core/error.hpp"

namespace taskplan {

using json = nlohmann::json;

// Parses JSON, rethrowing nlohmann's byte-offset diagnostics as a Parse
// error with line/column.
json parse_json(const std::string& text, const std::string& what);

const json& require_field(const json& j, const char* key, const std::string& where);
std::string require_string(const json& j, const char* key, const std::string& where);
const json& require_array(const json& j, const char* key, const std::string& where);
const json& require_object(const json& j, const char* key, const std::string& where);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

std::string to_hex(uint64_t v);

}  // namespace taskplan

#endif
