#pragma once

#include <nlohmann/json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace dioph {

/// Version stamped into every JSON artifact under "schema".
inline constexpr int kSchemaVersion = 1;

/// Shortest round-trip decimal form; identical inputs give identical text.
std::string format_double(double v);

/// Writes "# <comment>" followed by the comma-separated column names.
void write_csv_header(std::ostream& os, const std::string& comment, const std::vector<std::string>& columns);

/// Writes `content` to `path`, replacing it. Throws IoError.
void write_text_file(const std::string& path, const std::string& content);

/// Pretty-printed JSON with a trailing newline.
std::string dump_json(const nlohmann::ordered_json& j);

}  // namespace dioph
