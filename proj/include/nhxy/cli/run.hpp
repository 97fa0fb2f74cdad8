#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "nhxy/cli/config.hpp"
#include "nhxy/cli/output.hpp"

namespace nhxy::cli {

enum ExitCode : int { kSuccess = 0, kConfigFailure = 1, kResourceFailure = 2, kNumericalFailure = 3 };

// Runs one command. Per-cell failures are flagged rows; errors that stop the
// whole command propagate as exceptions.
Table execute(const RunConfig& cfg, int jobs, std::ostream* log = nullptr);

// True when the table has a flag column and every row carries a flag, or the
// command's own success criterion failed (verify mismatch).
bool total_failure(const Table& t);

// (x, y) pairs from a CSV for the given fit kind.
std::vector<std::pair<double, double>> read_fit_points(const std::string& path, const std::string& kind);

// Full command-line entry point; returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace nhxy::cli
