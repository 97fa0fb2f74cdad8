#pragma once

// Run configuration read from a JSON file. Every schema violation is reported
// as a ConfigError naming the offending field path, e.g. "model.n".

#include <optional>
#include <string>

#include <json.hpp>

#include "nhxy/model.hpp"
#include "nhxy/parameters.hpp"

namespace nhxy::cli {

class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& msg)
      : Error(path.empty() ? msg : path + ": " + msg), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

enum class Command { spectrum, verify, phase_diagram, fidelity_scan, entropy_scan, quench, eta_scan, fit };

std::string to_string(Command c);
Command parse_command(const std::string& name);  // throws ConfigError("command", ...)

enum class Format { csv, json };

struct ScanBlock {
  Axis axis1;
  std::optional<Axis> axis2;
  std::string quantity = "winding";  // phase-diagram: winding | delta12
};

struct NumericsBlock {
  double dt = 0.01;
  double horizon = 200.0;
  double delta_lambda = 1e-4;
  long grid_points = 4096;
  unsigned long long seed = 1;
  int samples = 20;               // verify: random draws
  int site_cap = kDefaultDenseSiteCap;
  int subsystem_size = 0;         // entropy-scan with a scan block; 0 = N/2
  bool find_peak = false;         // fidelity-scan: refine the chi_F maximum
  double boundary_tolerance = 0.05;
};

struct FitBlock {
  std::string kind;   // nu | critical | central_charge
  std::string input;  // CSV path
  int n_sites = 0;    // central_charge only
  bool keep_edges = false;
};

struct RunConfig {
  ChainSpecd model;
  Command command = Command::spectrum;
  std::optional<ScanBlock> scan;
  NumericsBlock numerics;
  FitBlock fit;
  Format format = Format::csv;
  std::string output_path;  // empty = stdout
  nlohmann::json raw;       // the document as read, echoed into the manifest
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

}  // namespace nhxy::cli
