#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace ops {

using Json = nlohmann::json;

// nlohmann::json keeps object keys in a std::map, so dump() is already
// lexicographically ordered; doubles are written as the shortest decimal that
// round-trips. That makes dump() our canonical byte form.
inline std::string canonical(const Json& j) { return j.dump(); }

Json parse_json(const std::string& text, const std::string& what = "document");
Json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

/// Writes via a sibling temp file and rename so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
void write_json_file(const std::filesystem::path& path, const Json& j, bool pretty = false);

/// Checks `j["schema"] == expected`; throws DocumentError otherwise.
void require_schema(const Json& j, const std::string& expected);

}  // namespace ops
