#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace corrkit {

struct CsvTable {
  std::vector<std::string> header;
  // cells[r][c]; empty optional = blank cell (missing value)
  std::vector<std::vector<std::optional<double>>> cells;
};

// Reads a numeric CSV with a mandatory header row. Blank cells become empty
// optionals; any other non-numeric cell is a parse error naming the row.
CsvTable read_numeric_csv(const std::string& path);

// Fixed "%.12g" formatting: round-trips doubles in CSV/JSON output while
// keeping files diffable across runs.
std::string format_double(double v);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values);

// Variant with a leading int64 column (timestamps, dates, horizon seconds).
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<long long>& key_column, const Eigen::MatrixXd& values);

}  // namespace corrkit
