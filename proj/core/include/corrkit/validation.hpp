#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace corrkit {

struct CriterionResult {
  int index = 0;
  std::string name;
  bool passed = false;
  std::string detail;  // measured values and the thresholds they met or missed
  double seconds = 0.0;
};

struct AcceptanceReport {
  std::vector<CriterionResult> criteria;
  bool all_passed = false;
  double total_seconds = 0.0;
};

// The full acceptance battery: eleven pinned-seed criteria covering spectrum
// oracles, estimator consistency against the synthetic generators, statistical
// size/power, and byte-level determinism. Thread count parallelizes the Monte
// Carlo criteria without changing any computed number. Progress lines stream
// to `progress` as criteria finish when it is non-null.
AcceptanceReport run_acceptance(int n_threads, std::ostream* progress = nullptr);

}  // namespace corrkit
