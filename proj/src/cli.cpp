#include <chrono>
#include <iostream>

#include <CLI11.hpp>

#include "nhxy/cli/run.hpp"

namespace nhxy::cli {

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Non-Hermitian XY chain numerics"};
  std::string config_path, output_path, format;
  int jobs = default_jobs();
  bool verbose = false;
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--jobs", jobs, "worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_option("--output", output_path, "output file (overrides output.path)");
  app.add_option("--format", format, "csv or json (overrides output.format)")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--verbose", verbose, "progress messages on stderr");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kConfigFailure;
  }

  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg;
  try {
    cfg = load_config(config_path);
    if (!output_path.empty()) cfg.output_path = output_path;
    if (!format.empty()) cfg.format = format == "json" ? Format::json : Format::csv;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigFailure;
  }

  Table table;
  try {
    table = execute(cfg, jobs, verbose ? &err : nullptr);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const ResourceError& e) {
    err << "resource cap: " << e.what() << '\n';
    return kResourceFailure;
  } catch (const Error& e) {
    err << "numerical failure (" << error_code(e) << "): " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kNumericalFailure;
  }

  const std::string body = cfg.format == Format::csv ? to_csv(table) : to_json(table).dump(2) + "\n";
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    if (cfg.output_path.empty()) {
      out << body;
      if (cfg.format == Format::csv && verbose) err << "[nhxy] summary " << table.summary.dump() << '\n';
    } else {
      atomic_write(cfg.output_path, body);
      nlohmann::json manifest = {
          {"schema_version", kSchemaVersion},
          {"tool", "nhxy"},
          {"tool_version", kToolVersion},
          {"command", table.command},
          {"config", cfg.raw},
          {"effective", {{"format", cfg.format == Format::csv ? "csv" : "json"},
                         {"output", cfg.output_path},
                         {"jobs", jobs}}},
          {"conventions",
           {{"g_ratio", "h = g (1 + i)"},
            {"gamma_diag", "gamma = t (1 + i)"},
            {"basis", "site 1 is the most significant bit; bit value 0 is spin up"}}},
          {"summary", table.summary},
          {"wall_time_seconds", wall}};
      atomic_write(cfg.output_path + ".manifest.json", manifest.dump(2) + "\n");
      if (verbose) err << "[nhxy] wrote " << cfg.output_path << " in " << wall << " s\n";
    }
  } catch (const Error& e) {
    err << "output error: " << e.what() << '\n';
    return kConfigFailure;
  }
  if (total_failure(table)) {
    err << "numerical failure: no usable result (see flag column)\n";
    return kNumericalFailure;
  }
  return kSuccess;
}

}  // namespace nhxy::cli
