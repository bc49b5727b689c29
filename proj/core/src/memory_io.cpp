#include <charconv>
#include <fstream>
#include <string>

#include "landscape_lab/errors.hpp"
#include "landscape_lab/landscape.hpp"
#include "landscape_lab/table.hpp"

namespace landscape_lab {

namespace {

double parse_double(const std::string& text, const std::string& where) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw InputError(where + ": not a number: '" + text + "'");
  }
  return v;
}

ClassId parse_label(const std::string& text, const std::string& where) {
  ClassId v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw InputError(where + ": label must be an integer class id, got '" + text + "'");
  }
  return v;
}

}  // namespace

MemorySet read_memory_csv(const std::filesystem::path& path) {
  const CsvData data = read_csv(path);
  if (data.header.size() < 2 || data.header.back() != "label") {
    throw InputError(path.string() + ": header must be x_0,...,x_{d-1},label");
  }
  const std::size_t d = data.header.size() - 1;
  for (std::size_t k = 0; k < d; ++k) {
    if (data.header[k] != "x_" + std::to_string(k)) {
      throw InputError(path.string() + ": expected column x_" + std::to_string(k) + ", got '" +
                       data.header[k] + "'");
    }
  }
  std::vector<Vector> points;
  std::vector<ClassId> labels;
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    const std::string where = path.string() + " row " + std::to_string(r + 1);
    Vector p(static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) {
      p[static_cast<Eigen::Index>(k)] = parse_double(data.rows[r][k], where);
    }
    points.push_back(std::move(p));
    labels.push_back(parse_label(data.rows[r][d], where));
  }
  return MemorySet(points, std::move(labels));
}

void write_memory_csv(const std::filesystem::path& path, const MemorySet& memories) {
  Table t;
  t.name = path.stem().string();
  for (int k = 0; k < memories.dim(); ++k) t.columns.push_back("x_" + std::to_string(k));
  t.columns.push_back("label");
  for (std::size_t i = 0; i < memories.size(); ++i) {
    std::vector<Cell> row;
    for (int k = 0; k < memories.dim(); ++k) {
      row.emplace_back(memories.points()(k, static_cast<Eigen::Index>(i)));
    }
    row.emplace_back(static_cast<std::int64_t>(memories.label(i)));
    t.add_row(std::move(row));
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << t.to_csv();
}

}  // namespace landscape_lab
