#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace fbcov {

/// Shortest decimal that round-trips to the same double.
std::string format_number(double v);

/// Writes `text` verbatim (binary mode, so LF stays LF). Creates parent dirs.
void write_text_file(const std::filesystem::path& path, std::string_view text);

std::string read_text_file(const std::filesystem::path& path);

/// Minimal CSV builder; fields are numbers or plain identifiers, never quoted.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row(std::vector<std::string> fields);
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace fbcov
