// Runs the full acceptance battery and prints one pass/fail line per
// criterion. Exit code 0 only if every criterion passes.

#include <cstdlib>
#include <iostream>
#include <string>

#include "corrkit/validation.hpp"

int main(int argc, char** argv) {
  int threads = 1;
  if (argc > 1) {
    try {
      threads = std::stoi(argv[1]);
    } catch (...) {
      std::cerr << "usage: " << argv[0] << " [n_threads]\n";
      return 2;
    }
  }
  const corrkit::AcceptanceReport report = corrkit::run_acceptance(threads, &std::cout);
  std::cout << (report.all_passed ? "ALL CRITERIA PASSED" : "CRITERIA FAILED") << " ("
            << report.total_seconds << "s total)\n";
  return report.all_passed ? EXIT_SUCCESS : EXIT_FAILURE;
}
