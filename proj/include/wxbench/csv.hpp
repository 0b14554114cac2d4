#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace wxbench::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // index of a header column, -1 if absent
  int column_index(const std::string& name) const;
};

// Plain comma-separated values with optional double-quote quoting on read.
// Lines ending in \r\n are handled; empty trailing lines ignored.
Table read_file(const std::filesystem::path& path);
Table parse(const std::string& text);

// Quotes a field only when it contains a comma, quote or newline.
std::string escape_field(const std::string& field);

// Writes content to `path` atomically: temp file in the same directory, then
// rename. Parent directories are created as needed.
void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace wxbench::csv
