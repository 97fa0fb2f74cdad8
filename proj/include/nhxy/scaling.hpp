#pragma once

// Finite-size-scaling fits by unweighted least squares.
//   nu:        ln chi_max = s ln N + b,          nu = 2 / (s + 1)
//   critical:  lambda_max(N) = lambda_c - a / N^2, fitted against 1/N^2
//   central:   S(L_A) = (c/3) ln sin(pi L_A / N) + b

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "nhxy/core.hpp"

namespace nhxy {

enum class FitKind { nu, critical_point, central_charge };

inline std::string to_string(FitKind k) {
  switch (k) {
    case FitKind::nu: return "nu";
    case FitKind::critical_point: return "critical_point";
    case FitKind::central_charge: return "central_charge";
  }
  return "?";
}

struct FitResult {
  FitKind kind = FitKind::nu;
  double slope = 0;
  double intercept = 0;
  double derived_quantity = 0;
  double rms_residual = 0;
  int n_points = 0;
  std::vector<std::pair<double, double>> points;  // raw input (x, y)
};

struct LineFit {
  double slope = 0, intercept = 0, rms_residual = 0;
};

// Ordinary least squares of y on x. Points are sorted first so the result is
// independent of input order.
inline LineFit fit_line(std::vector<std::pair<double, double>> xy) {
  if (xy.size() < 2) throw FitError("fit_line: need at least two points");
  std::sort(xy.begin(), xy.end());
  const double n = double(xy.size());
  double mx = 0, my = 0;
  for (auto [x, y] : xy) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, scale = 0;
  for (auto [x, y] : xy) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    scale = std::max(scale, std::abs(x));
  }
  if (!(sxx > 1e-24 * n * std::max(scale * scale, 1e-300)))
    throw FitError("fit_line: degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (auto [x, y] : xy) {
    const double r = y - (f.intercept + f.slope * x);
    ss += r * r;
  }
  f.rms_residual = std::sqrt(ss / n);
  return f;
}

namespace detail {

inline int distinct_sizes(const std::vector<std::pair<double, double>>& pts) {
  std::vector<double> n;
  for (auto& p : pts) n.push_back(p.first);
  std::sort(n.begin(), n.end());
  return int(std::unique(n.begin(), n.end()) - n.begin());
}

}  // namespace detail

// points: (N, chi_max)
inline FitResult fit_nu(const std::vector<std::pair<double, double>>& points) {
  if (detail::distinct_sizes(points) < 3) throw FitError("fit_nu: need at least 3 distinct sizes");
  std::vector<std::pair<double, double>> xy;
  for (auto [n, chi] : points) {
    if (!(n > 0)) throw FitError("fit_nu: sizes must be positive");
    if (!(chi > 0)) throw FitError("fit_nu: chi_max must be positive");
    xy.emplace_back(std::log(n), std::log(chi));
  }
  const auto line = fit_line(xy);
  if (line.slope <= -1) throw FitError("fit_nu: slope <= -1 gives an unphysical exponent");
  return {FitKind::nu, line.slope, line.intercept, 2.0 / (line.slope + 1.0), line.rms_residual,
          int(points.size()), points};
}

// points: (N, lambda_max)
inline FitResult extrapolate_critical(const std::vector<std::pair<double, double>>& points) {
  if (detail::distinct_sizes(points) < 3)
    throw FitError("extrapolate_critical: need at least 3 distinct sizes");
  std::vector<std::pair<double, double>> xy;
  for (auto [n, lam] : points) {
    if (!(n > 0)) throw FitError("extrapolate_critical: sizes must be positive");
    xy.emplace_back(1.0 / (n * n), lam);
  }
  const auto line = fit_line(xy);
  return {FitKind::critical_point, line.slope, line.intercept, line.intercept, line.rms_residual,
          int(points.size()), points};
}

// points: (L_A, S). L_A in {1, N-1} are dropped unless keep_edges is set.
inline FitResult fit_central_charge(const std::vector<std::pair<double, double>>& points, int n_sites,
                                    bool keep_edges = false) {
  std::vector<std::pair<double, double>> used, xy;
  for (auto [la, s] : points) {
    if (la < 1 || la > n_sites - 1) throw FitError("fit_central_charge: L_A outside [1, N-1]");
    if (!keep_edges && (la == 1 || la == n_sites - 1)) continue;
    used.emplace_back(la, s);
    xy.emplace_back(std::log(std::sin(std::numbers::pi * la / n_sites)), s);
  }
  if (used.size() < 4) throw FitError("fit_central_charge: need at least 4 points");
  const auto line = fit_line(xy);
  return {FitKind::central_charge, line.slope, line.intercept, 3.0 * line.slope, line.rms_residual,
          int(used.size()), used};
}

}  // namespace nhxy
