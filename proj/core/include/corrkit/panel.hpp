#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace corrkit {

// Uniformly spaced arithmetic-return observations, T rows × N assets.
struct ReturnPanel {
  std::vector<std::int64_t> timestamps;  // seconds, strictly increasing, uniform
  std::int64_t period_seconds = 0;
  std::vector<std::string> assets;
  Eigen::MatrixXd returns;  // T×N

  Eigen::Index n_periods() const { return returns.rows(); }
  Eigen::Index n_assets() const { return returns.cols(); }

  // Enforces shape, N>=2, T>=2, uniform spacing, and finiteness.
  void validate() const;
};

// Raw financial-criterion values (e.g. capitalization) on ranking dates.
struct CriterionPanel {
  std::vector<std::int64_t> dates;  // ordered
  std::vector<std::string> assets;
  Eigen::MatrixXd values;  // D×N
  std::string name;

  // Every row must carry >= 2 distinct finite values, else it cannot rank.
  void validate() const;
};

enum class MissingPolicy { drop_asset, zero_fill };

// CSV `timestamp,asset_1,...`; drop_asset removes assets with > 10% blanks
// (residual blanks in surviving assets become 0 so the panel is gap-free),
// zero_fill keeps every asset and sets all blanks to 0.
ReturnPanel load_return_panel(const std::string& path, MissingPolicy policy);

// CSV `date,asset_1,...`; the criterion name defaults to the file stem.
CriterionPanel load_criteria(const std::string& path);

void write_return_panel(const ReturnPanel& panel, const std::string& path);

// Compounds non-overlapping blocks of m rows: r' = prod(1+r) - 1. The trailing
// remainder of fewer than m rows is dropped; period_seconds scales by m.
ReturnPanel aggregate_returns(const ReturnPanel& panel, int m);

}  // namespace corrkit
