#pragma once

// Momentum-space Bloch Hamiltonian of the periodic chain and its
// non-Hermitian winding number.
//
//   H(k) = (u_y - i v_y) sigma_y + (u_z - i v_z) sigma_z
//   u_y = -gamma_R sin k, u_z = cos k - h_R, v_y = gamma_I sin k, v_z = h_I
//
// The winding angle phi = arctan(h_y / h_z) with h_y = u_y - i v_y and
// h_z = u_z - i v_z satisfies phi = (1/2i) ln(q+ / q-) for q+- = h_z +- i h_y,
// so w = (w+ - w-) / 2 with w+- the integer phase windings of q+-(k).

#include <cmath>
#include <numbers>

#include "nhxy/model.hpp"
#include "nhxy/parameters.hpp"

namespace nhxy {

template <typename Real = double>
struct BlochCoefficients {
  Real gamma_r = 1, gamma_i = 0, h_r = 0, h_i = 0;

  static BlochCoefficients from(const ChainSpec<Real>& spec) {
    return {spec.gamma.real(), spec.gamma.imag(), spec.field.real(), spec.field.imag()};
  }

  Real u_y(Real k) const { return -gamma_r * std::sin(k); }
  Real u_z(Real k) const { return std::cos(k) - h_r; }
  Real v_y(Real k) const { return gamma_i * std::sin(k); }
  Real v_z(Real) const { return h_i; }

  Complex<Real> h_y(Real k) const { return {u_y(k), -v_y(k)}; }
  Complex<Real> h_z(Real k) const { return {u_z(k), -v_z(k)}; }
  Complex<Real> q_plus(Real k) const { return h_z(k) + Complex<Real>(0, 1) * h_y(k); }
  Complex<Real> q_minus(Real k) const { return h_z(k) - Complex<Real>(0, 1) * h_y(k); }
};

using BlochCoefficientsd = BlochCoefficients<double>;

template <typename Real>
Eigen::Matrix<Complex<Real>, 2, 2> bloch_hamiltonian(const BlochCoefficients<Real>& c, Real k) {
  const Complex<Real> i(0, 1);
  const Real s = std::sin(k);
  Eigen::Matrix<Complex<Real>, 2, 2> m;
  m(0, 0) = std::cos(k) - c.h_r - i * c.h_i;
  m(0, 1) = i * c.gamma_r * s - c.gamma_i * s;
  m(1, 0) = -i * c.gamma_r * s + c.gamma_i * s;
  m(1, 1) = c.h_r + i * c.h_i - std::cos(k);
  return m;
}

template <typename Real = double>
struct Winding {
  Real value = 0;   // w = (w+ - w-) / 2
  Real plus = 0;    // phase winding of q+
  Real minus = 0;   // phase winding of q-
  long grid_points = 0;
};

inline constexpr long kDefaultWindingGrid = 4096;
inline constexpr long kMaxWindingGrid = long{1} << 22;

// Unwrapped phase windings on a uniform grid over [-pi, pi), doubling the
// grid until every increment satisfies |d arg| < pi/2.
template <typename Real>
Winding<Real> compute_winding(const BlochCoefficients<Real>& c, long grid_points = kDefaultWindingGrid) {
  if (grid_points < 64) throw PreconditionError("winding_number: grid_points must be >= 64");
  const Real pi = std::numbers::pi_v<Real>;
  for (long m = grid_points; m <= kMaxWindingGrid; m *= 2) {
    Real total_plus = 0, total_minus = 0;
    bool refine = false;
    auto k_at = [&](long j) { return -pi + Real(2) * pi * Real(j) / Real(m); };
    Complex<Real> prev_p = c.q_plus(k_at(0)), prev_m = c.q_minus(k_at(0));
    const Complex<Real> first_p = prev_p, first_m = prev_m;
    for (long j = 1; j <= m && !refine; ++j) {
      const Complex<Real> cur_p = j == m ? first_p : c.q_plus(k_at(j));
      const Complex<Real> cur_m = j == m ? first_m : c.q_minus(k_at(j));
      if (std::abs(cur_p) < Real(1e-12) || std::abs(cur_m) < Real(1e-12))
        throw GaplessPointError("winding_number: Bloch vector vanishes; parameter lies on a phase boundary");
      const Real dp = std::arg(cur_p / prev_p);
      const Real dm = std::arg(cur_m / prev_m);
      if (std::abs(dp) >= pi / 2 || std::abs(dm) >= pi / 2) refine = true;
      total_plus += dp;
      total_minus += dm;
      prev_p = cur_p;
      prev_m = cur_m;
    }
    if (refine) continue;
    Winding<Real> w;
    w.plus = total_plus / (Real(2) * pi);
    w.minus = total_minus / (Real(2) * pi);
    w.value = (w.plus - w.minus) / Real(2);
    w.grid_points = m;
    return w;
  }
  throw RefinementError("winding_number: phase increments unresolved at maximal grid refinement");
}

template <typename Real>
Real winding_number(const BlochCoefficients<Real>& c, long grid_points = kDefaultWindingGrid) {
  return compute_winding(c, grid_points).value;
}

// The ChainSpec supplies gamma and h; n_sites and boundary are ignored.
inline ScanGrid scan_winding(const ChainSpecd& coeff_template, const Axis& axis1, const Axis& axis2,
                             long grid_points = kDefaultWindingGrid, int jobs = default_jobs()) {
  return scan_grid(coeff_template, axis1, axis2, jobs, [grid_points](const ChainSpecd& s) {
    return winding_number(BlochCoefficientsd::from(s), grid_points);
  });
}

// |h_R^2 + h_I^2 / gamma_R^2 - 1| < tol (gamma_I = 0 phase boundary).
template <typename Real>
bool boundary_predicate(const BlochCoefficients<Real>& c, Real tol) {
  if (c.gamma_r == 0) throw PreconditionError("boundary_predicate: undefined for gamma_R = 0");
  return std::abs(c.h_r * c.h_r + c.h_i * c.h_i / (c.gamma_r * c.gamma_r) - Real(1)) < tol;
}

}  // namespace nhxy
