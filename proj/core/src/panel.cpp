#include "corrkit/panel.hpp"

#include <cmath>
#include <filesystem>

#include "corrkit/csv.hpp"
#include "corrkit/errors.hpp"

namespace corrkit {

void ReturnPanel::validate() const {
  const Eigen::Index t = returns.rows();
  const Eigen::Index n = returns.cols();
  if (n < 2) throw ValidationError("return panel needs at least 2 assets");
  if (t < 2) throw ValidationError("return panel needs at least 2 periods");
  if (static_cast<Eigen::Index>(timestamps.size()) != t)
    throw ValidationError("return panel: timestamp count != row count");
  if (static_cast<Eigen::Index>(assets.size()) != n)
    throw ValidationError("return panel: asset count != column count");
  if (period_seconds <= 0) throw ValidationError("return panel: period_seconds must be positive");
  for (size_t i = 1; i < timestamps.size(); ++i) {
    if (timestamps[i] - timestamps[i - 1] != period_seconds)
      throw ValidationError("return panel: non-uniform timestamp spacing at row " +
                            std::to_string(i + 1));
  }
  if (!returns.allFinite()) throw ValidationError("return panel contains non-finite values");
}

void CriterionPanel::validate() const {
  const Eigen::Index d = values.rows();
  const Eigen::Index n = values.cols();
  if (static_cast<Eigen::Index>(dates.size()) != d)
    throw ValidationError("criterion panel: date count != row count");
  if (static_cast<Eigen::Index>(assets.size()) != n)
    throw ValidationError("criterion panel: asset count != column count");
  for (size_t i = 1; i < dates.size(); ++i)
    if (dates[i] <= dates[i - 1]) throw ValidationError("criterion panel: dates not increasing");
  for (Eigen::Index r = 0; r < d; ++r) {
    double first = std::nan("");
    bool two_distinct = false;
    int finite = 0;
    for (Eigen::Index c = 0; c < n; ++c) {
      const double v = values(r, c);
      if (!std::isfinite(v)) continue;
      ++finite;
      if (std::isnan(first))
        first = v;
      else if (v != first)
        two_distinct = true;
    }
    if (finite < 2 || !two_distinct)
      throw ValidationError("criterion panel '" + name + "': row " + std::to_string(r + 1) +
                            " is not rankable (needs >= 2 distinct finite values)");
  }
}

namespace {

std::int64_t parse_key(const std::optional<double>& cell, size_t row, const std::string& path) {
  if (!cell) throw ValidationError(path + ": row " + std::to_string(row) + ": missing key value");
  const double v = *cell;
  if (v != std::floor(v))
    throw ValidationError(path + ": row " + std::to_string(row) + ": key must be an integer");
  return static_cast<std::int64_t>(v);
}

}  // namespace

ReturnPanel load_return_panel(const std::string& path, MissingPolicy policy) {
  CsvTable table = read_numeric_csv(path);
  if (table.header.size() < 3)
    throw ValidationError(path + ": need a timestamp column plus at least 2 assets");
  const size_t t = table.cells.size();
  const size_t n = table.header.size() - 1;
  if (t < 2) throw ValidationError(path + ": need at least 2 rows");

  std::vector<std::int64_t> timestamps(t);
  Eigen::MatrixXd values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(n));
  Eigen::MatrixXi missing =
      Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(n));
  for (size_t r = 0; r < t; ++r) {
    timestamps[r] = parse_key(table.cells[r][0], r + 2, path);
    for (size_t c = 0; c < n; ++c) {
      const auto& cell = table.cells[r][c + 1];
      if (cell) {
        values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = *cell;
      } else {
        values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = 0.0;
        missing(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = 1;
      }
    }
  }

  std::vector<std::string> assets(table.header.begin() + 1, table.header.end());

  std::vector<Eigen::Index> keep;
  if (policy == MissingPolicy::drop_asset) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const double frac = missing.col(c).cast<double>().sum() / static_cast<double>(t);
      if (frac <= 0.10) keep.push_back(c);
    }
  } else {
    for (Eigen::Index c = 0; c < values.cols(); ++c) keep.push_back(c);
  }
  if (keep.size() < 2)
    throw ValidationError(path + ": fewer than 2 assets remain after missing-data policy");

  ReturnPanel panel;
  panel.timestamps = std::move(timestamps);
  panel.returns.resize(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(keep.size()));
  for (size_t k = 0; k < keep.size(); ++k) {
    panel.returns.col(static_cast<Eigen::Index>(k)) = values.col(keep[k]);
    panel.assets.push_back(assets[static_cast<size_t>(keep[k])]);
  }
  if (panel.timestamps.size() >= 2) panel.period_seconds = panel.timestamps[1] - panel.timestamps[0];
  panel.validate();
  return panel;
}

CriterionPanel load_criteria(const std::string& path) {
  CsvTable table = read_numeric_csv(path);
  if (table.header.size() < 3)
    throw ValidationError(path + ": need a date column plus at least 2 assets");
  const size_t d = table.cells.size();
  if (d < 1) throw ValidationError(path + ": need at least 1 data row");
  const size_t n = table.header.size() - 1;

  CriterionPanel panel;
  panel.name = std::filesystem::path(path).stem().string();
  panel.assets.assign(table.header.begin() + 1, table.header.end());
  panel.dates.resize(d);
  panel.values.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
  for (size_t r = 0; r < d; ++r) {
    panel.dates[r] = parse_key(table.cells[r][0], r + 2, path);
    for (size_t c = 0; c < n; ++c) {
      const auto& cell = table.cells[r][c + 1];
      panel.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          cell ? *cell : std::nan("");
    }
  }
  panel.validate();
  return panel;
}

void write_return_panel(const ReturnPanel& panel, const std::string& path) {
  std::vector<std::string> header;
  header.reserve(panel.assets.size() + 1);
  header.push_back("timestamp");
  header.insert(header.end(), panel.assets.begin(), panel.assets.end());
  std::vector<long long> keys(panel.timestamps.begin(), panel.timestamps.end());
  write_csv(path, header, keys, panel.returns);
}

ReturnPanel aggregate_returns(const ReturnPanel& panel, int m) {
  if (m < 1) throw ValidationError("aggregate_returns: factor must be >= 1");
  const Eigen::Index t = panel.returns.rows();
  if (static_cast<Eigen::Index>(m) > t)
    throw ValidationError("aggregate_returns: factor " + std::to_string(m) +
                          " exceeds panel length " + std::to_string(t));
  if (m == 1) return panel;

  const Eigen::Index blocks = t / m;
  ReturnPanel out;
  out.assets = panel.assets;
  out.period_seconds = panel.period_seconds * m;
  out.returns.resize(blocks, panel.returns.cols());
  out.timestamps.resize(static_cast<size_t>(blocks));
  for (Eigen::Index b = 0; b < blocks; ++b) {
    Eigen::ArrayXd acc = Eigen::ArrayXd::Ones(panel.returns.cols());
    for (Eigen::Index k = 0; k < m; ++k) acc *= 1.0 + panel.returns.row(b * m + k).array();
    out.returns.row(b) = acc - 1.0;
    // block stamped at its last constituent period
    out.timestamps[static_cast<size_t>(b)] = panel.timestamps[static_cast<size_t>(b * m + m - 1)];
  }
  out.validate();
  return out;
}

}  // namespace corrkit
