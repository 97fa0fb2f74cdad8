#pragma once

// Open-chain free-fermion solution. With x = (1+gamma)/2, y = (1-gamma)/2 the
// quasi-energies are eps_j = sqrt(a_j), a_j the eigenvalues of the
// pentadiagonal complex-symmetric matrix C, and the 2^N many-body energies
// are all sign choices of sum_j (+/-) eps_j.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "nhxy/model.hpp"
#include "nhxy/parameters.hpp"
#include "nhxy/spectral.hpp"

namespace nhxy {

template <typename Real = double>
struct QuasiSpectrum {
  std::vector<Complex<Real>> epsilons;      // ascending modulus
  std::vector<Complex<Real>> c_eigenvalues; // a_j, same order as epsilons
};

inline constexpr int kFullSpectrumSiteCap = 20;

// Principal square root with the tie rule Re = 0 => Im >= 0.
template <typename Real>
Complex<Real> principal_sqrt(Complex<Real> a) {
  Complex<Real> r = std::sqrt(a);
  if (r.real() < 0 || (r.real() == 0 && r.imag() < 0)) r = -r;
  return r;
}

template <typename Real>
CMatrix<Real> build_c_matrix(const ChainSpec<Real>& spec) {
  spec.validate();
  if (spec.boundary != Boundary::open)
    throw UnsupportedBoundaryError("build_c_matrix: free-fermion solution requires open boundary");
  const int n = spec.n_sites;
  const Complex<Real> x = (Real(1) + spec.gamma) / Real(2);
  const Complex<Real> y = (Real(1) - spec.gamma) / Real(2);
  const Complex<Real> h = spec.field;
  CMatrix<Real> c = CMatrix<Real>::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    c(i, i) = h * h + x * x + y * y;
    if (i + 1 < n) c(i, i + 1) = c(i + 1, i) = h;
    if (i + 2 < n) c(i, i + 2) = c(i + 2, i) = x * y;
  }
  c(0, 0) = h * h + y * y;
  c(n - 1, n - 1) = h * h + x * x;
  return c;
}

namespace detail {

// Sort order: ascending modulus; moduli within `tie` (relative) are ordered
// by ascending real part, then imaginary part.
template <typename Real>
std::vector<std::size_t> modulus_order(const std::vector<Complex<Real>>& v, Real tie = Real(1e-12)) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    if (std::abs(v[a]) != std::abs(v[b])) return std::abs(v[a]) < std::abs(v[b]);
    if (v[a].real() != v[b].real()) return v[a].real() < v[b].real();
    return v[a].imag() < v[b].imag();
  });
  std::size_t start = 0;
  while (start < order.size()) {
    const Real base = std::abs(v[order[start]]);
    std::size_t stop = start + 1;
    while (stop < order.size() &&
           std::abs(v[order[stop]]) - base <= tie * std::max(Real(1), base))
      ++stop;
    std::stable_sort(order.begin() + long(start), order.begin() + long(stop), [&](auto a, auto b) {
      if (v[a].real() != v[b].real()) return v[a].real() < v[b].real();
      return v[a].imag() < v[b].imag();
    });
    start = stop;
  }
  return order;
}

}  // namespace detail

template <typename Real>
QuasiSpectrum<Real> quasi_energies(const ChainSpec<Real>& spec) {
  const CVector<Real> a = eigenvalues(build_c_matrix(spec));
  std::vector<Complex<Real>> eps(std::size_t(a.size()));
  for (Eigen::Index j = 0; j < a.size(); ++j) eps[std::size_t(j)] = principal_sqrt(a(j));
  const auto order = detail::modulus_order(eps);
  QuasiSpectrum<Real> qs;
  for (auto j : order) {
    qs.epsilons.push_back(eps[j]);
    qs.c_eigenvalues.push_back(a(Eigen::Index(j)));
  }
  return qs;
}

// All sign assignments of sum_j (+/-) eps_j. Element 0 is the ground value
// -sum_j eps_j; the remaining energies follow in ascending (Re, Im) order.
template <typename Real>
std::vector<Complex<Real>> full_spectrum(const QuasiSpectrum<Real>& qs) {
  const auto n = qs.epsilons.size();
  if (n > std::size_t(kFullSpectrumSiteCap))
    throw ResourceError("full_spectrum: 2^N enumeration capped at N=" +
                        std::to_string(kFullSpectrumSiteCap));
  std::vector<Complex<Real>> energies{Complex<Real>(0)};
  energies.reserve(std::size_t{1} << n);
  for (const auto& e : qs.epsilons) {
    const auto half = energies.size();
    energies.resize(2 * half);
    for (std::size_t i = 0; i < half; ++i) {
      energies[half + i] = energies[i] + e;
      energies[i] -= e;
    }
  }
  // energies[0] is now the all-minus assignment.
  std::sort(energies.begin() + 1, energies.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return energies;
}

template <typename Real>
std::vector<Complex<Real>> full_spectrum(const ChainSpec<Real>& spec) {
  spec.validate();
  if (spec.n_sites > kFullSpectrumSiteCap)
    throw ResourceError("full_spectrum: 2^N enumeration capped at N=" +
                        std::to_string(kFullSpectrumSiteCap));
  return full_spectrum(quasi_energies(spec));
}

template <typename Real>
Real delta12(const QuasiSpectrum<Real>& qs) {
  if (qs.epsilons.size() < 2) throw PreconditionError("delta12: need at least two quasi-energies");
  const auto e1 = qs.epsilons[0];
  const auto e2 = qs.epsilons[1];
  const Real denom = std::abs(e1 + e2);
  if (!(denom > Real(1e-14))) throw UndefinedRatioError("delta12: |eps1 + eps2| vanishes");
  return std::abs(e1 - e2) / denom;
}

// Delta_12 over a two-parameter grid; cells where the decomposition or the
// ratio fails are flagged rather than dropped.
inline ScanGrid scan_delta12(const ChainSpecd& spec_template, const Axis& axis1, const Axis& axis2,
                             int jobs = default_jobs()) {
  return scan_grid(spec_template, axis1, axis2, jobs,
                   [](const ChainSpecd& s) { return delta12(quasi_energies(s)); });
}

// Minimum-cost perfect matching (Hungarian algorithm, O(n^3)) between two
// equally sized spectra under the cost |a_i - b_j|. Returns the largest
// matched distance.
template <typename Real>
Real matched_spectrum_distance(const std::vector<Complex<Real>>& a,
                               const std::vector<Complex<Real>>& b) {
  if (a.size() != b.size()) throw PreconditionError("matched_spectrum_distance: size mismatch");
  const std::size_t n = a.size();
  if (n == 0) return Real(0);
  const Real inf = std::numeric_limits<Real>::infinity();
  // 1-based potentials formulation.
  std::vector<Real> u(n + 1, 0), v(n + 1, 0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  auto cost = [&](std::size_t i, std::size_t j) { return std::abs(a[i - 1] - b[j - 1]); };
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<Real> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      Real delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const Real cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  Real worst = 0;
  for (std::size_t j = 1; j <= n; ++j) worst = std::max(worst, cost(p[j], j));
  return worst;
}

}  // namespace nhxy
