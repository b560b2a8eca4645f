#include "corrkit/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "corrkit/errors.hpp"

namespace corrkit {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

CsvTable read_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);

  CsvTable table;
  std::string line;
  size_t row_number = 0;
  while (std::getline(in, line)) {
    ++row_number;
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (table.header.empty()) {
      table.header = cells;
      continue;
    }
    if (cells.size() != table.header.size())
      throw ValidationError(path + ": row " + std::to_string(row_number) + " has " +
                            std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(table.header.size()));
    std::vector<std::optional<double>> row;
    row.reserve(cells.size());
    for (size_t c = 0; c < cells.size(); ++c) {
      if (cells[c].empty()) {
        row.push_back(std::nullopt);
        continue;
      }
      char* end = nullptr;
      double v = std::strtod(cells[c].c_str(), &end);
      if (end == cells[c].c_str() || *end != '\0')
        throw ValidationError(path + ": row " + std::to_string(row_number) +
                              ": cannot parse cell '" + cells[c] + "'");
      row.push_back(v);
    }
    table.cells.push_back(std::move(row));
  }
  if (table.header.empty()) throw ValidationError(path + ": missing header row");
  return table;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace {

void write_header(std::ofstream& out, const std::vector<std::string>& header) {
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) out << ',';
    out << header[i];
  }
  out << '\n';
}

}  // namespace

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values) {
  if (static_cast<Eigen::Index>(header.size()) != values.cols())
    throw ValidationError("write_csv: header/column mismatch for " + path);
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write file: " + path);
  write_header(out, header);
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (c) out << ',';
      out << format_double(values(r, c));
    }
    out << '\n';
  }
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<long long>& key_column, const Eigen::MatrixXd& values) {
  if (static_cast<Eigen::Index>(header.size()) != values.cols() + 1)
    throw ValidationError("write_csv: header/column mismatch for " + path);
  if (static_cast<Eigen::Index>(key_column.size()) != values.rows())
    throw ValidationError("write_csv: key column length mismatch for " + path);
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write file: " + path);
  write_header(out, header);
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    out << key_column[static_cast<size_t>(r)];
    for (Eigen::Index c = 0; c < values.cols(); ++c) out << ',' << format_double(values(r, c));
    out << '\n';
  }
}

}  // namespace corrkit
