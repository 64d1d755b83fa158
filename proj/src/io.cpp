#include "harmoniq/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "harmoniq/errors.hpp"

namespace harmoniq {

std::string format_double(double x) {
  char buf[64];
  const int len = std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf, static_cast<std::size_t>(len));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for " + path);
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write failed for " + path);
}

void CsvDocument::meta(const std::string& key, const std::string& value) {
  meta_.emplace_back(key, value);
}

void CsvDocument::meta(const std::string& key, double value) {
  meta_.emplace_back(key, format_double(value));
}

void CsvDocument::meta(const std::string& key, std::uint64_t value) {
  meta_.emplace_back(key, std::to_string(value));
}

void CsvDocument::header(const std::vector<std::string>& columns) {
  std::string line;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) line += ',';
    line += columns[i];
  }
  header_.assign(1, line);
}

void CsvDocument::row(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  rows_.push_back(std::move(line));
}

void CsvDocument::row_values(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  row(cells);
}

std::string CsvDocument::str() const {
  std::string out;
  for (const auto& [k, v] : meta_) out += "# " + k + " = " + v + "\n";
  for (const std::string& h : header_) out += h + "\n";
  for (const std::string& r : rows_) out += r + "\n";
  return out;
}

void CsvDocument::write(const std::string& path) const {
  write_text_file(path, str());
}

std::vector<std::string> snapshot_header(int block_size) {
  std::vector<std::string> cols = {"time", "site"};
  for (int c = 0; c < block_size; ++c) cols.push_back("u_" + std::to_string(c));
  for (int c = 0; c < block_size; ++c) cols.push_back("v_" + std::to_string(c));
  return cols;
}

void append_snapshot_rows(CsvDocument& doc, double time,
                          const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                          int block_size) {
  if (u.size() != v.size() || u.size() % block_size != 0)
    throw InvalidInputError("snapshot vectors do not tile into site blocks");
  const Eigen::Index n_sites = u.size() / block_size;
  for (Eigen::Index site = 0; site < n_sites; ++site) {
    std::vector<std::string> cells;
    cells.reserve(static_cast<std::size_t>(2 * block_size) + 2);
    cells.push_back(format_double(time));
    cells.push_back(std::to_string(site));
    for (int c = 0; c < block_size; ++c)
      cells.push_back(format_double(u[site * block_size + c]));
    for (int c = 0; c < block_size; ++c)
      cells.push_back(format_double(v[site * block_size + c]));
    doc.row(cells);
  }
}

}  // namespace harmoniq
