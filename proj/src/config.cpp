#include "nhxy/cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace nhxy::cli {

using nlohmann::json;

std::string to_string(Command c) {
  switch (c) {
    case Command::spectrum: return "spectrum";
    case Command::verify: return "verify";
    case Command::phase_diagram: return "phase-diagram";
    case Command::fidelity_scan: return "fidelity-scan";
    case Command::entropy_scan: return "entropy-scan";
    case Command::quench: return "quench";
    case Command::eta_scan: return "eta-scan";
    case Command::fit: return "fit";
  }
  return "?";
}

Command parse_command(const std::string& name) {
  for (auto c : {Command::spectrum, Command::verify, Command::phase_diagram, Command::fidelity_scan,
                 Command::entropy_scan, Command::quench, Command::eta_scan, Command::fit})
    if (to_string(c) == name) return c;
  throw ConfigError("command", "unknown command '" + name + "'");
}

namespace {

std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

const char* type_name(const json& j) { return j.type_name(); }

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(path, std::string("expected object, got ") + type_name(obj));
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError(join(path, it.key()), "unknown field");
}

double get_number(const json& obj, const std::string& path, const char* key, std::optional<double> def) {
  const std::string p = join(path, key);
  if (!obj.contains(key)) {
    if (def) return *def;
    throw ConfigError(p, "required field missing");
  }
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(p, std::string("expected number, got ") + type_name(v));
  return v.get<double>();
}

long get_integer(const json& obj, const std::string& path, const char* key, std::optional<long> def) {
  const std::string p = join(path, key);
  if (!obj.contains(key)) {
    if (def) return *def;
    throw ConfigError(p, "required field missing");
  }
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(p, std::string("expected integer, got ") + type_name(v));
  return v.get<long>();
}

std::string get_string(const json& obj, const std::string& path, const char* key,
                       std::optional<std::string> def) {
  const std::string p = join(path, key);
  if (!obj.contains(key)) {
    if (def) return *def;
    throw ConfigError(p, "required field missing");
  }
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(p, std::string("expected string, got ") + type_name(v));
  return v.get<std::string>();
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(join(path, key), std::string("expected boolean, got ") + type_name(v));
  return v.get<bool>();
}

ChainSpecd parse_model(const json& m) {
  check_keys(m, "model", {"n", "gamma_re", "gamma_im", "h_re", "h_im", "boundary"});
  ChainSpecd s;
  const long n = get_integer(m, "model", "n", std::nullopt);
  if (n < 2) throw ConfigError("model.n", "must be >= 2");
  if (n > 2048) throw ConfigError("model.n", "must be <= 2048");
  s.n_sites = int(n);
  s.gamma = {get_number(m, "model", "gamma_re", 1.0), get_number(m, "model", "gamma_im", 0.0)};
  s.field = {get_number(m, "model", "h_re", 0.0), get_number(m, "model", "h_im", 0.0)};
  const std::string b = get_string(m, "model", "boundary", std::string("periodic"));
  if (b == "open")
    s.boundary = Boundary::open;
  else if (b == "periodic")
    s.boundary = Boundary::periodic;
  else
    throw ConfigError("model.boundary", "expected 'open' or 'periodic', got '" + b + "'");
  return s;
}

Axis parse_axis(const json& s, const std::string& suffix) {
  const std::string pk = "param" + suffix, sk = "start" + suffix, ek = "stop" + suffix,
                    nk = "steps" + suffix;
  Parameter p;
  try {
    p = parse_parameter(get_string(s, "scan", pk.c_str(), std::nullopt));
  } catch (const PreconditionError& e) {
    throw ConfigError("scan." + pk, e.what());
  }
  const double start = get_number(s, "scan", sk.c_str(), std::nullopt);
  const double stop = get_number(s, "scan", ek.c_str(), std::nullopt);
  const long steps = get_integer(s, "scan", nk.c_str(), std::nullopt);
  if (steps < 1) throw ConfigError("scan." + nk, "must be >= 1");
  if (start > stop) throw ConfigError("scan." + sk, "start must be <= stop");
  return Axis::linspace(p, start, stop, int(steps));
}

ScanBlock parse_scan(const json& s) {
  check_keys(s, "scan",
             {"param", "start", "stop", "steps", "param2", "start2", "stop2", "steps2", "quantity"});
  ScanBlock b;
  b.axis1 = parse_axis(s, "");
  if (s.contains("param2") || s.contains("start2") || s.contains("stop2") || s.contains("steps2"))
    b.axis2 = parse_axis(s, "2");
  b.quantity = get_string(s, "scan", "quantity", std::string("winding"));
  if (b.quantity != "winding" && b.quantity != "delta12")
    throw ConfigError("scan.quantity", "expected 'winding' or 'delta12'");
  return b;
}

NumericsBlock parse_numerics(const json& n) {
  check_keys(n, "numerics",
             {"dt", "horizon", "delta_lambda", "grid_points", "seed", "samples", "site_cap",
              "subsystem_size", "find_peak", "boundary_tolerance"});
  NumericsBlock b;
  b.dt = get_number(n, "numerics", "dt", b.dt);
  b.horizon = get_number(n, "numerics", "horizon", b.horizon);
  b.delta_lambda = get_number(n, "numerics", "delta_lambda", b.delta_lambda);
  b.grid_points = get_integer(n, "numerics", "grid_points", b.grid_points);
  const long seed = get_integer(n, "numerics", "seed", 1);
  if (seed < 0) throw ConfigError("numerics.seed", "must be >= 0");
  b.seed = static_cast<unsigned long long>(seed);
  b.samples = int(get_integer(n, "numerics", "samples", b.samples));
  b.site_cap = int(get_integer(n, "numerics", "site_cap", b.site_cap));
  b.subsystem_size = int(get_integer(n, "numerics", "subsystem_size", b.subsystem_size));
  b.find_peak = get_bool(n, "numerics", "find_peak", b.find_peak);
  b.boundary_tolerance = get_number(n, "numerics", "boundary_tolerance", b.boundary_tolerance);
  if (!(b.delta_lambda > 0)) throw ConfigError("numerics.delta_lambda", "must be > 0");
  if (b.grid_points < 64) throw ConfigError("numerics.grid_points", "must be >= 64");
  if (b.samples < 1) throw ConfigError("numerics.samples", "must be >= 1");
  if (b.site_cap < 2) throw ConfigError("numerics.site_cap", "must be >= 2");
  if (b.subsystem_size < 0) throw ConfigError("numerics.subsystem_size", "must be >= 0");
  return b;
}

FitBlock parse_fit(const json& f) {
  check_keys(f, "fit", {"kind", "input", "n_sites", "keep_edges"});
  FitBlock b;
  b.kind = get_string(f, "fit", "kind", std::nullopt);
  if (b.kind != "nu" && b.kind != "critical" && b.kind != "central_charge")
    throw ConfigError("fit.kind", "expected 'nu', 'critical' or 'central_charge'");
  b.input = get_string(f, "fit", "input", std::nullopt);
  b.n_sites = int(get_integer(f, "fit", "n_sites", 0));
  if (b.kind == "central_charge" && b.n_sites < 2)
    throw ConfigError("fit.n_sites", "required (>= 2) for central_charge fits");
  b.keep_edges = get_bool(f, "fit", "keep_edges", false);
  return b;
}

}  // namespace

RunConfig parse_config(const json& doc) {
  check_keys(doc, "", {"model", "command", "scan", "numerics", "output", "fit"});
  RunConfig cfg;
  cfg.raw = doc;
  cfg.command = parse_command(get_string(doc, "", "command", std::nullopt));

  if (cfg.command != Command::fit) {
    if (!doc.contains("model")) throw ConfigError("model", "required block missing");
    cfg.model = parse_model(doc.at("model"));
  } else if (doc.contains("model")) {
    cfg.model = parse_model(doc.at("model"));
  }
  if (doc.contains("scan")) cfg.scan = parse_scan(doc.at("scan"));
  if (doc.contains("numerics")) cfg.numerics = parse_numerics(doc.at("numerics"));
  if (doc.contains("output")) {
    const json& o = doc.at("output");
    check_keys(o, "output", {"format", "path"});
    const std::string f = get_string(o, "output", "format", std::string("csv"));
    if (f == "csv")
      cfg.format = Format::csv;
    else if (f == "json")
      cfg.format = Format::json;
    else
      throw ConfigError("output.format", "expected 'csv' or 'json'");
    cfg.output_path = get_string(o, "output", "path", std::string());
  }

  switch (cfg.command) {
    case Command::phase_diagram:
      if (!cfg.scan || !cfg.scan->axis2) throw ConfigError("scan", "phase-diagram needs two axes");
      break;
    case Command::fidelity_scan:
    case Command::eta_scan:
      if (!cfg.scan) throw ConfigError("scan", "required block missing");
      break;
    case Command::fit:
      if (!doc.contains("fit")) throw ConfigError("fit", "required block missing");
      cfg.fit = parse_fit(doc.at("fit"));
      break;
    default: break;
  }
  if ((cfg.command == Command::quench || cfg.command == Command::eta_scan)) {
    if (!(cfg.numerics.dt > 0)) throw ConfigError("numerics.dt", "must be > 0");
    if (!(cfg.numerics.horizon >= cfg.numerics.dt))
      throw ConfigError("numerics.horizon", "must be >= numerics.dt");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace nhxy::cli
