#include "ops/common/json_io.hpp"

#include <fstream>
#include <sstream>

#include "ops/common/error.hpp"

namespace ops {

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw DocumentError(what + ": invalid JSON: " + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json_file(const std::filesystem::path& path) {
  return parse_json(read_text_file(path), path.string());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_json_file(const std::filesystem::path& path, const Json& j, bool pretty) {
  write_file_atomic(path, pretty ? j.dump(2) + "\n" : canonical(j));
}

void require_schema(const Json& j, const std::string& expected) {
  if (!j.is_object() || !j.contains("schema") || j["schema"] != expected) {
    throw DocumentError("expected a document with schema \"" + expected + "\"");
  }
}

}  // namespace ops
