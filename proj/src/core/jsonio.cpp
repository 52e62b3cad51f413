#include "core/jsonio.hpp"

#include <fstream>
#include <sstream>

namespace taskplan {

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    size_t line = 1, col = 1;
    for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << what << ": parse error at line " << line << ", column " << col << ": " << e.what();
    throw Error(ErrorKind::Parse, os.str());
  }
}

const json& require_field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorKind::Validation, where + ": missing field '" + key + "'");
  return j.at(key);
}

std::string require_string(const json& j, const char* key, const std::string& where) {
  const json& f = require_field(j, key, where);
  if (!f.is_string())
    throw Error(ErrorKind::Validation, where + ": field '" + key + "' is not a string");
  return f.get<std::string>();
}

const json& require_array(const json& j, const char* key, const std::string& where) {
  const json& f = require_field(j, key, where);
  if (!f.is_array())
    throw Error(ErrorKind::Validation, where + ": field '" + key + "' is not an array");
  return f;
}

const json& require_object(const json& j, const char* key, const std::string& where) {
  const json& f = require_field(j, key, where);
  if (!f.is_object())
    throw Error(ErrorKind::Validation, where + ": field '" + key + "' is not an object");
  return f;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

std::string to_hex(uint64_t v) {
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[v & 0xf];
    v >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf);
}

}  // namespace taskplan
