#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace covsched {

/// Serializes a JSON document with every number printed at 17 significant
/// digits, so artifact diffs are exact across runs and platforms.
std::string dump_json_17(const nlohmann::json& doc, int indent = 2);

/// %.17g rendering of one double, as used in CSV artifacts.
std::string format_17(double value);

/// Git-style content hash: SHA-1 over "blob <size>\0<bytes>".
std::string git_blob_sha1(const std::string& content);

void write_text_file(const std::string& path, const std::string& content);

/// Writes header + rows, every cell already formatted.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace covsched
