#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "nhxy/cli/run.hpp"
#include "nhxy/dynamics.hpp"
#include "nhxy/freefermion.hpp"
#include "nhxy/observables.hpp"
#include "nhxy/scaling.hpp"
#include "nhxy/topology.hpp"

namespace nhxy::cli {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json spec_json(const ChainSpecd& s) {
  return {{"n", s.n_sites},
          {"gamma_re", s.gamma.real()},
          {"gamma_im", s.gamma.imag()},
          {"h_re", s.field.real()},
          {"h_im", s.field.imag()},
          {"boundary", to_string(s.boundary)}};
}

GroundStateOptions ground_options(const RunConfig& cfg) {
  GroundStateOptions o;
  o.site_cap = cfg.numerics.site_cap;
  return o;
}

void log_line(std::ostream* log, const std::string& msg) {
  if (log) *log << "[nhxy] " << msg << '\n';
}

Table spectrum(const RunConfig& cfg) {
  const auto& s = cfg.model;
  Table t{"spectrum", {"source", "index", "re", "im"}, {}, {}};
  t.summary["model"] = spec_json(s);
  if (s.n_sites <= cfg.numerics.site_cap || s.boundary == Boundary::periodic) {
    const auto values = eigenvalues(build_hamiltonian(s, cfg.numerics.site_cap));
    const auto order = real_part_order(values);
    for (std::size_t i = 0; i < order.size(); ++i) {
      const auto e = values(order[i]);
      t.rows.push_back({std::string("ed"), (long long)i, e.real(), e.imag()});
    }
    t.summary["ground_energy"] = {values(order[0]).real(), values(order[0]).imag()};
  }
  if (s.boundary == Boundary::open) {
    const auto qs = quasi_energies(s);
    for (std::size_t i = 0; i < qs.epsilons.size(); ++i)
      t.rows.push_back({std::string("quasi"), (long long)i, qs.epsilons[i].real(), qs.epsilons[i].imag()});
    try {
      t.summary["delta12"] = delta12(qs);
    } catch (const Error& e) {
      t.summary["delta12"] = nullptr;
      t.summary["delta12_flag"] = error_code(e);
    }
  }
  return t;
}

// Uniform draw from the disk |z| <= radius, from 53-bit mantissas so the
// sequence only depends on the engine.
cd disk_draw(std::mt19937_64& rng, double radius) {
  auto unit = [&] { return double(rng() >> 11) * 0x1.0p-53; };
  const double r = radius * std::sqrt(unit());
  const double phi = 2.0 * std::numbers::pi * unit();
  return std::polar(r, phi);
}

Table verify(const RunConfig& cfg, int jobs) {
  const int n = cfg.model.n_sites;
  if (n > cfg.numerics.site_cap)
    throw ResourceError("verify: N=" + std::to_string(n) + " exceeds dense cap " +
                        std::to_string(cfg.numerics.site_cap));
  std::mt19937_64 rng(cfg.numerics.seed);
  std::vector<ChainSpecd> draws;
  for (int i = 0; i < cfg.numerics.samples; ++i) {
    ChainSpecd s{n, {}, {}, Boundary::open};
    s.gamma = disk_draw(rng, 2.0);
    s.field = disk_draw(rng, 2.0);
    draws.push_back(s);
  }
  std::vector<std::vector<Cell>> rows(draws.size());
  std::vector<double> ratio(draws.size(), kNaN);
  parallel_for(draws.size(), jobs, [&](std::size_t i) {
    const auto& s = draws[i];
    double mismatch = kNaN, tol = kNaN;
    std::string status = "ok";
    try {
      const auto ed = eigenvalues(build_hamiltonian(s, cfg.numerics.site_cap));
      std::vector<cd> a(ed.data(), ed.data() + ed.size());
      const auto ff = full_spectrum(s);
      double emax = 0;
      for (auto e : a) emax = std::max(emax, std::abs(e));
      mismatch = matched_spectrum_distance(a, ff);
      tol = 1e-8 * (1 + emax);
      ratio[i] = mismatch / tol;
      if (!(mismatch <= tol)) status = "mismatch";
    } catch (const Error& e) {
      status = error_code(e);
    }
    rows[i] = {(long long)i, s.gamma.real(), s.gamma.imag(), s.field.real(), s.field.imag(), mismatch, tol,
               status};
  });
  Table t{"verify", {"draw", "gamma_re", "gamma_im", "h_re", "h_im", "mismatch", "tolerance", "flag"},
          std::move(rows), {}};
  double worst = 0, worst_ratio = 0;
  bool all_ok = true;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    all_ok = all_ok && std::get<std::string>(t.rows[i][7]) == "ok";
    if (!std::isnan(ratio[i])) {
      worst = std::max(worst, std::get<double>(t.rows[i][5]));
      worst_ratio = std::max(worst_ratio, ratio[i]);
    }
  }
  t.summary = {{"n_sites", n},
               {"samples", cfg.numerics.samples},
               {"seed", cfg.numerics.seed},
               {"max_mismatch", worst},
               {"max_mismatch_over_tolerance", worst_ratio},
               {"pass", all_ok},
               {"report", all_ok ? "max mismatch < 1e-8 (1 + max|E|)" : "mismatch above 1e-8 (1 + max|E|)"}};
  return t;
}

Table phase_diagram(const RunConfig& cfg, int jobs) {
  const auto& sc = *cfg.scan;
  ScanGrid grid;
  if (sc.quantity == "winding") {
    grid = scan_winding(cfg.model, sc.axis1, *sc.axis2, cfg.numerics.grid_points, jobs);
  } else {
    if (cfg.model.boundary != Boundary::open)
      throw ConfigError("model.boundary", "delta12 is defined for the open chain; set 'open'");
    grid = scan_delta12(cfg.model, sc.axis1, *sc.axis2, jobs);
  }
  Table t{"phase-diagram",
          {to_string(sc.axis1.parameter), to_string(sc.axis2->parameter), sc.quantity, "near_boundary", "flag"},
          {},
          {}};
  for (std::size_t i = 0; i < sc.axis1.values.size(); ++i) {
    for (std::size_t j = 0; j < sc.axis2->values.size(); ++j) {
      const auto s = with_parameter(with_parameter(cfg.model, sc.axis1.parameter, sc.axis1.values[i]),
                                    sc.axis2->parameter, sc.axis2->values[j]);
      const auto c = BlochCoefficientsd::from(s);
      long long near = -1;
      if (c.gamma_i == 0 && c.gamma_r != 0) near = boundary_predicate(c, cfg.numerics.boundary_tolerance);
      t.rows.push_back({sc.axis1.values[i], sc.axis2->values[j], grid.at(i, j), near, grid.flag(i, j)});
    }
  }
  t.summary = {{"model", spec_json(cfg.model)}, {"quantity", sc.quantity}};
  if (sc.quantity == "winding") t.summary["grid_points"] = cfg.numerics.grid_points;
  return t;
}

std::string join_flags(std::initializer_list<std::pair<bool, const char*>> flags) {
  std::string out;
  for (auto [on, name] : flags)
    if (on) out += (out.empty() ? "" : ";") + std::string(name);
  return out;
}

Table fidelity_scan(const RunConfig& cfg, int jobs, std::ostream* log) {
  const auto& ax = cfg.scan->axis1;
  const auto gopt = ground_options(cfg);
  const double d = cfg.numerics.delta_lambda;
  std::vector<std::vector<Cell>> rows(ax.values.size());
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    const double x = ax.values[i];
    try {
      const auto r = susceptibility(cfg.model, ax.parameter, x, d, gopt);
      rows[i] = {x, std::abs(r.fidelity), r.fidelity.real(), r.fidelity.imag(), r.value, r.half_step_value,
                 join_flags({{r.crossing, "crossing"},
                             {r.not_converged, "not_converged"},
                             {r.complex_log, "complex_log"}})};
    } catch (const Error& e) {
      rows[i] = {x, kNaN, kNaN, kNaN, kNaN, kNaN, std::string(error_code(e))};
    }
  });
  Table t{"fidelity-scan",
          {to_string(ax.parameter), "fidelity_abs", "fidelity_re", "fidelity_im", "chi", "chi_half", "flag"},
          std::move(rows),
          {}};
  t.summary = {{"model", spec_json(cfg.model)}, {"delta_lambda", d}, {"parameter", to_string(ax.parameter)}};
  if (cfg.numerics.find_peak) {
    log_line(log, "refining chi_F maximum");
    try {
      const auto pk = susceptibility_peak(cfg.model, ax.parameter, ax.values.front(), ax.values.back(), d,
                                          PeakOptions{}, gopt, jobs);
      t.summary["peak"] = {{"location", pk.location}, {"value", pk.value}};
    } catch (const Error& e) {
      t.summary["peak"] = {{"error", error_code(e)}, {"message", e.what()}};
    }
  }
  return t;
}

Table entropy_scan(const RunConfig& cfg, int jobs) {
  const auto gopt = ground_options(cfg);
  if (!cfg.scan) {
    const auto gs = ground_state(cfg.model, gopt);
    Table t{"entropy-scan", {"L_A", "re_S", "im_S"}, {}, {}};
    for (const auto& p : entropy_subsystem_scan(gs))
      t.rows.push_back({(long long)p.subsystem_size, p.entropy.real(), p.entropy.imag()});
    t.summary = {{"model", spec_json(cfg.model)},
                 {"ground_energy", {gs.energy.real(), gs.energy.imag()}},
                 {"sector", {{"parity", gs.sector.parity}, {"momentum", gs.sector.momentum}}}};
    return t;
  }
  const auto& ax = cfg.scan->axis1;
  const int la = cfg.numerics.subsystem_size > 0 ? cfg.numerics.subsystem_size : cfg.model.n_sites / 2;
  if (la > cfg.model.n_sites - 1) throw ConfigError("numerics.subsystem_size", "must be <= N-1");
  std::vector<std::vector<Cell>> rows(ax.values.size());
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    const double x = ax.values[i];
    try {
      const auto gs = ground_state(with_parameter(cfg.model, ax.parameter, x), gopt);
      const auto s = entanglement_entropy(reduced_density(gs, la));
      rows[i] = {x, (long long)la, s.real(), s.imag(), std::string()};
    } catch (const Error& e) {
      rows[i] = {x, (long long)la, kNaN, kNaN, std::string(error_code(e))};
    }
  });
  Table t{"entropy-scan", {to_string(ax.parameter), "L_A", "re_S", "im_S", "flag"}, std::move(rows), {}};
  t.summary = {{"model", spec_json(cfg.model)}, {"subsystem_size", la}};
  return t;
}

Table quench_cmd(const RunConfig& cfg) {
  auto run = evolve(cfg.model, cfg.numerics.horizon, cfg.numerics.dt, cfg.numerics.site_cap);
  Table t{"quench", {"t", "L", "drift"}, {}, {}};
  for (const auto& s : run.samples) t.rows.push_back({s.t, s.echo, s.drift});
  t.summary = {{"model", spec_json(cfg.model)}, {"dt", run.dt}, {"horizon", run.horizon}};
  std::vector<double> v;
  for (const auto& s : run.samples) v.push_back(s.echo);
  t.summary["local_maxima"] = local_maxima(v).size();
  if (run.samples.size() >= 100) {
    const auto e = eta(run, cfg.model.n_sites);
    t.summary["eta"] = e.value;
    t.summary["eta_tail"] = e.tail_value;
    t.summary["eta_converged"] = e.converged;
  }
  return t;
}

Table eta_scan_cmd(const RunConfig& cfg, int jobs) {
  const auto& ax = cfg.scan->axis1;
  const auto pts = eta_scan(cfg.model, ax, cfg.numerics.horizon, cfg.numerics.dt, jobs);
  Table t{"eta-scan", {to_string(ax.parameter), "eta", "deta", "flag"}, {}, {}};
  std::vector<double> x, f;
  bool usable = true;
  for (const auto& p : pts) {
    t.rows.push_back({p.lambda, p.eta, p.derivative, p.flag});
    x.push_back(p.lambda);
    f.push_back(p.eta);
    usable = usable && !std::isnan(p.eta);
  }
  t.summary = {{"model", spec_json(cfg.model)}, {"dt", cfg.numerics.dt}, {"horizon", cfg.numerics.horizon}};
  if (usable && x.size() >= 4) {
    const auto k = detect_kink(x, f);
    t.summary["kink"] = {{"location", k.location}, {"ratio", k.ratio}, {"detected", k.detected}};
  }
  return t;
}

Table fit_cmd(const RunConfig& cfg) {
  const auto pts = read_fit_points(cfg.fit.input, cfg.fit.kind);
  FitResult r;
  Table t{"fit", {}, {}, {}};
  if (cfg.fit.kind == "nu") {
    r = fit_nu(pts);
    t.columns = {"N", "chi_max"};
  } else if (cfg.fit.kind == "critical") {
    r = extrapolate_critical(pts);
    t.columns = {"N", "lambda_max"};
  } else {
    r = fit_central_charge(pts, cfg.fit.n_sites, cfg.fit.keep_edges);
    t.columns = {"L_A", "S"};
  }
  for (auto [x, y] : r.points) t.rows.push_back({x, y});
  json points = json::array();
  for (auto [x, y] : r.points) points.push_back({x, y});
  t.summary = {{"kind", to_string(r.kind)},           {"slope", r.slope},
               {"intercept", r.intercept},            {"derived_quantity", r.derived_quantity},
               {"rms_residual", r.rms_residual},      {"n_points", r.n_points},
               {"points", points}};
  return t;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::vector<std::pair<double, double>> read_fit_points(const std::string& path, const std::string& kind) {
  std::ifstream in(path);
  if (!in) throw ConfigError("fit.input", "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("fit.input", "empty file");
  const auto header = split_csv_line(line);
  auto find = [&](std::initializer_list<const char*> names) -> std::size_t {
    for (const char* n : names)
      for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == n) return i;
    return header.size();
  };
  std::size_t cx, cy;
  std::string want;
  if (kind == "nu") {
    cx = find({"N"});
    cy = find({"chi_max"});
    want = "N, chi_max";
  } else if (kind == "critical") {
    cx = find({"N"});
    cy = find({"lambda_max"});
    want = "N, lambda_max";
  } else {
    cx = find({"L_A"});
    cy = find({"S", "re_S"});
    want = "L_A, S (or re_S)";
  }
  if (cx == header.size() || cy == header.size())
    throw ConfigError("fit.input", "column mismatch: expected columns " + want);
  std::vector<std::pair<double, double>> pts;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size())
      throw ConfigError("fit.input", "line " + std::to_string(lineno) + ": wrong number of fields");
    auto num = [&](const std::string& s) {
      double v = 0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError("fit.input", "line " + std::to_string(lineno) + ": not a number: '" + s + "'");
      return v;
    };
    pts.emplace_back(num(f[cx]), num(f[cy]));
  }
  return pts;
}

Table execute(const RunConfig& cfg, int jobs, std::ostream* log) {
  log_line(log, "command " + to_string(cfg.command) + ", jobs " + std::to_string(jobs));
  switch (cfg.command) {
    case Command::spectrum: return spectrum(cfg);
    case Command::verify: return verify(cfg, jobs);
    case Command::phase_diagram: return phase_diagram(cfg, jobs);
    case Command::fidelity_scan: return fidelity_scan(cfg, jobs, log);
    case Command::entropy_scan: return entropy_scan(cfg, jobs);
    case Command::quench: return quench_cmd(cfg);
    case Command::eta_scan: return eta_scan_cmd(cfg, jobs);
    case Command::fit: return fit_cmd(cfg);
  }
  throw Error("unreachable command");
}

bool total_failure(const Table& t) {
  if (t.command == "verify") return !t.summary.value("pass", false);
  std::size_t col = t.columns.size();
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    if (t.columns[i] == "flag") col = i;
  if (col == t.columns.size() || t.rows.empty()) return false;
  // Diagnostic flags accompany a valid value; anything else is an error code.
  auto diagnostic = [](const std::string& f) {
    std::stringstream ss(f);
    std::string tok;
    while (std::getline(ss, tok, ';'))
      if (tok != "crossing" && tok != "not_converged" && tok != "complex_log") return false;
    return true;
  };
  for (const auto& row : t.rows)
    if (diagnostic(std::get<std::string>(row[col]))) return false;
  return true;
}

}  // namespace nhxy::cli
