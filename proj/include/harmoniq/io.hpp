#pragma once

#include <map>
#include <string>
#include <vector>

#include "harmoniq/classical.hpp"
#include "harmoniq/schrodinger.hpp"

namespace harmoniq {

// Round-trip-exact decimal rendering (17 significant digits), the one number
// format used in every CSV so identical inputs give byte-identical files.
std::string format_double(double x);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Deterministic CSV document: '#' metadata header (artifact version,
// preset name, parameters, seeds; insertion order preserved), one header
// row, then data rows.
class CsvDocument {
 public:
  void meta(const std::string& key, const std::string& value);
  void meta(const std::string& key, double value);
  void meta(const std::string& key, std::uint64_t value);
  void header(const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& cells);
  void row_values(const std::vector<double>& values);

  std::string str() const;
  void write(const std::string& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<std::string> header_;
  std::vector<std::string> rows_;
};

// Snapshot schema shared by the quantum and classical integrators:
// time, site, u_0.., v_0.. so trajectories diff directly.
void append_snapshot_rows(CsvDocument& doc, double time,
                          const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                          int block_size);
std::vector<std::string> snapshot_header(int block_size);

}  // namespace harmoniq
