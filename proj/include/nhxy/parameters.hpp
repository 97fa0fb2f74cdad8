#pragma once

// Driving parameters for sweeps and scans, and a deterministic parallel map.

#include <atomic>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "nhxy/model.hpp"

namespace nhxy {

enum class Parameter {
  h_r,         // Re h
  h_i,         // Im h
  gamma_r,     // Re gamma
  gamma_i,     // Im gamma
  g_ratio,     // h = g (1 + i): equal real and imaginary field
  gamma_diag,  // gamma = t (1 + i)
};

inline std::string to_string(Parameter p) {
  switch (p) {
    case Parameter::h_r: return "h_r";
    case Parameter::h_i: return "h_i";
    case Parameter::gamma_r: return "gamma_r";
    case Parameter::gamma_i: return "gamma_i";
    case Parameter::g_ratio: return "g_ratio";
    case Parameter::gamma_diag: return "gamma_diag";
  }
  return "?";
}

inline Parameter parse_parameter(std::string_view name) {
  if (name == "h_r") return Parameter::h_r;
  if (name == "h_i") return Parameter::h_i;
  if (name == "gamma_r") return Parameter::gamma_r;
  if (name == "gamma_i") return Parameter::gamma_i;
  if (name == "g_ratio") return Parameter::g_ratio;
  if (name == "gamma_diag") return Parameter::gamma_diag;
  throw PreconditionError("unknown parameter name '" + std::string(name) +
                          "' (expected h_r, h_i, gamma_r, gamma_i, g_ratio, gamma_diag)");
}

template <typename Real>
ChainSpec<Real> with_parameter(ChainSpec<Real> spec, Parameter p, Real value) {
  switch (p) {
    case Parameter::h_r: spec.field.real(value); break;
    case Parameter::h_i: spec.field.imag(value); break;
    case Parameter::gamma_r: spec.gamma.real(value); break;
    case Parameter::gamma_i: spec.gamma.imag(value); break;
    case Parameter::g_ratio: spec.field = Complex<Real>(value, value); break;
    case Parameter::gamma_diag: spec.gamma = Complex<Real>(value, value); break;
  }
  return spec;
}

template <typename Real>
Real parameter_value(const ChainSpec<Real>& spec, Parameter p) {
  switch (p) {
    case Parameter::h_r:
    case Parameter::g_ratio: return spec.field.real();
    case Parameter::h_i: return spec.field.imag();
    case Parameter::gamma_r:
    case Parameter::gamma_diag: return spec.gamma.real();
    case Parameter::gamma_i: return spec.gamma.imag();
  }
  return Real(0);
}

struct Axis {
  Parameter parameter = Parameter::h_r;
  std::vector<double> values;

  // `steps` points from start to stop inclusive; steps == 1 gives {start}.
  static Axis linspace(Parameter p, double start, double stop, int steps) {
    if (steps < 1) throw PreconditionError("Axis: steps must be >= 1");
    if (start > stop) throw PreconditionError("Axis: start must be <= stop");
    Axis a{p, {}};
    a.values.reserve(std::size_t(steps));
    for (int i = 0; i < steps; ++i)
      a.values.push_back(steps == 1 ? start : start + (stop - start) * double(i) / double(steps - 1));
    return a;
  }
};

// Result of a two-axis scan; values stored row-major (axis1 outer).
struct ScanGrid {
  Axis axis1;
  Axis axis2;
  std::vector<double> values;             // NaN where flagged
  std::vector<std::string> flags;         // empty = ok, else error_code()

  double at(std::size_t i, std::size_t j) const { return values[i * axis2.values.size() + j]; }
  const std::string& flag(std::size_t i, std::size_t j) const {
    return flags[i * axis2.values.size() + j];
  }
  bool flagged(std::size_t i, std::size_t j) const { return !flag(i, j).empty(); }
};

inline int default_jobs() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(hw);
}

// Calls fn(i) for i in [0, count) on up to `jobs` threads. Each call writes
// only to its own output slot, so results do not depend on scheduling. The
// first exception thrown by any call is rethrown after all workers join.
template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  const auto n_threads = std::min<std::size_t>(std::size_t(jobs), count);
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

// Evaluates fn(spec) over the grid, flagging cells whose evaluation throws
// nhxy::Error.
template <typename Fn>
ScanGrid scan_grid(const ChainSpecd& base, const Axis& axis1, const Axis& axis2, int jobs, Fn&& fn) {
  if (axis1.values.empty() || axis2.values.empty())
    throw PreconditionError("scan: axes must be non-empty");
  ScanGrid grid{axis1, axis2, {}, {}};
  const std::size_t n1 = axis1.values.size(), n2 = axis2.values.size();
  grid.values.assign(n1 * n2, std::numeric_limits<double>::quiet_NaN());
  grid.flags.assign(n1 * n2, std::string{});
  parallel_for(n1 * n2, jobs, [&](std::size_t cell) {
    const auto spec = with_parameter(with_parameter(base, axis1.parameter, axis1.values[cell / n2]),
                                     axis2.parameter, axis2.values[cell % n2]);
    try {
      grid.values[cell] = fn(spec);
    } catch (const Error& e) {
      grid.flags[cell] = error_code(e);
    }
  });
  return grid;
}

}  // namespace nhxy
