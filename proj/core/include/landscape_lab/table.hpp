#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace landscape_lab {

// Shortest decimal string that round-trips; "inf", "-inf", "nan" for
// non-finite values.
std::string format_double(double v);

using Cell = std::variant<std::int64_t, double, std::string>;

// A named result table. CSV output is LF-terminated with a mandatory header.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  std::string to_csv() const;
  // Array of objects, one per row, keys in column order.
  std::string to_json() const;
};

enum class TableFormat { kCsv, kJson };

// Writes <dir>/<name>.csv or <dir>/<name>.json and returns the path.
std::filesystem::path write_table(const Table& table, const std::filesystem::path& dir,
                                  TableFormat format);

// Minimal CSV reader for the tables this library writes (no quoting).
struct CsvData {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};
CsvData read_csv(const std::filesystem::path& path);
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace landscape_lab
