#pragma once

// Non-unitary quench from the fully polarized state |up ... up>, Loschmidt
// echo and its time-averaged rate eta.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "nhxy/model.hpp"
#include "nhxy/parameters.hpp"

namespace nhxy {

template <typename Real = double>
struct QuenchSample {
  Real t = 0;
  Real echo = 1;   // L(t)
  Real drift = 1;  // 2-norm of the state before renormalization
};

template <typename Real = double>
struct QuenchRun {
  Real dt = 0;
  Real horizon = 0;
  std::vector<QuenchSample<Real>> samples;
  Real eta = std::numeric_limits<Real>::quiet_NaN();
  bool eta_converged = true;
};

using QuenchRund = QuenchRun<double>;

// |<psi0|psit>|^2 / <psit|psit>, conventional inner product.
template <typename Real>
Real loschmidt_echo(const CVector<Real>& psi0, const CVector<Real>& psit) {
  const Real n0 = psi0.squaredNorm(), nt = psit.squaredNorm();
  if (!(n0 > 0) || !(nt > 0)) throw PreconditionError("loschmidt_echo: zero-norm state");
  return std::norm(psi0.dot(psit)) / (n0 * nt);
}

template <typename Real>
CVector<Real> polarized_state(int n_sites) {
  CVector<Real> psi = CVector<Real>::Zero(Eigen::Index(1) << n_sites);
  psi(0) = Real(1);
  return psi;
}

// RK4 for d psi/dt = -i H psi with renormalization after every step.
template <typename Real>
QuenchRun<Real> evolve(const ChainSpec<Real>& spec, Real horizon, Real dt,
                       int site_cap = kDefaultDenseSiteCap) {
  if (!(dt > 0)) throw PreconditionError("evolve: dt must be > 0");
  if (!(horizon >= dt)) throw PreconditionError("evolve: horizon must be >= dt");
  spec.validate_basis();
  if (spec.n_sites > site_cap)
    throw ResourceError("evolve: N=" + std::to_string(spec.n_sites) + " exceeds cap " +
                        std::to_string(site_cap));
  const SparseOperator<Real> h = build_sparse_hamiltonian(spec, site_cap);
  const Complex<Real> mi(0, -1);
  const CVector<Real> psi0 = polarized_state<Real>(spec.n_sites);
  CVector<Real> psi = psi0, k1, k2, k3, k4;
  // Evolve with H - c, c = <psi0|H|psi0>. The dropped factor exp(-i c t) is a
  // scalar, so L is unchanged; removing the common phase keeps the RK4
  // truncation error set by the energy spread instead of |c|.
  const Complex<Real> c = psi0.dot(h * psi0);
  const Real scalar_gain = std::exp(c.imag() * dt);
  auto rhs = [&](const CVector<Real>& v) -> CVector<Real> { return mi * (h * v - c * v); };

  const long steps = std::lround(horizon / dt);
  QuenchRun<Real> run;
  run.dt = dt;
  run.horizon = Real(steps) * dt;
  run.samples.reserve(std::size_t(steps + 1));
  run.samples.push_back({Real(0), Real(1), Real(1)});
  for (long s = 1; s <= steps; ++s) {
    k1 = rhs(psi);
    k2 = rhs(psi + (dt / 2) * k1);
    k3 = rhs(psi + (dt / 2) * k2);
    k4 = rhs(psi + dt * k3);
    psi += (dt / 6) * (k1 + Real(2) * k2 + Real(2) * k3 + k4);
    const Real norm = psi.norm();
    if (!(norm >= Real(1e-300)) || !std::isfinite(norm))
      throw NumericalError("evolve: state norm collapsed at t=" + std::to_string(double(s * dt)) +
                           "; use a smaller horizon");
    psi /= norm;
    run.samples.push_back({Real(s) * dt, std::norm(psi0.dot(psi)), norm * scalar_gain});
  }
  return run;
}

template <typename Real = double>
struct EtaResult {
  Real value = 0;
  Real tail_value = 0;  // same average with the first half of the samples dropped
  bool converged = true;
};

inline constexpr double kDefaultHorizon = 200.0;
inline constexpr double kDefaultTimeStep = 0.01;

namespace detail {

template <typename Real>
Real trapezoid_average(const std::vector<QuenchSample<Real>>& s, std::size_t from) {
  Real area = 0;
  for (std::size_t i = from + 1; i < s.size(); ++i)
    area += (s[i].t - s[i - 1].t) * (s[i].echo + s[i - 1].echo) / 2;
  return area / (s.back().t - s[from].t);
}

}  // namespace detail

// eta = -(1/N) ln( (1/T) int_0^T L dt ).
template <typename Real>
EtaResult<Real> eta(const std::vector<QuenchSample<Real>>& samples, int n_sites) {
  if (samples.size() < 100) throw PreconditionError("eta: need at least 100 samples");
  if (n_sites < 1) throw PreconditionError("eta: n_sites must be positive");
  const Real full = detail::trapezoid_average(samples, 0);
  const Real tail = detail::trapezoid_average(samples, samples.size() / 2);
  if (!(full > 0) || !(tail > 0)) throw NumericalError("eta: non-positive time average of the echo");
  EtaResult<Real> r;
  r.value = -std::log(full) / Real(n_sites);
  r.tail_value = -std::log(tail) / Real(n_sites);
  const Real scale = std::max(std::abs(r.value), std::abs(r.tail_value));
  r.converged = !(std::abs(r.value - r.tail_value) > Real(0.02) * scale);
  return r;
}

template <typename Real>
EtaResult<Real> eta(const QuenchRun<Real>& run, int n_sites) {
  return eta(run.samples, n_sites);
}

// evolve() followed by eta(), stored on the run.
template <typename Real>
QuenchRun<Real> quench(const ChainSpec<Real>& spec, Real horizon = Real(kDefaultHorizon),
                       Real dt = Real(kDefaultTimeStep)) {
  auto run = evolve(spec, horizon, dt);
  const auto e = eta(run, spec.n_sites);
  run.eta = e.value;
  run.eta_converged = e.converged;
  return run;
}

struct EtaPoint {
  double lambda = 0;
  double eta = std::numeric_limits<double>::quiet_NaN();
  double derivative = std::numeric_limits<double>::quiet_NaN();  // d eta / d lambda
  std::string flag;  // empty, "not_converged", or an error code
};

// eta over a one-parameter grid with the first discrete derivative alongside
// (central differences inside, one-sided at the ends).
inline std::vector<EtaPoint> eta_scan(const ChainSpecd& base, const Axis& axis,
                                      double horizon = kDefaultHorizon, double dt = kDefaultTimeStep,
                                      int jobs = default_jobs()) {
  if (axis.values.empty()) throw PreconditionError("eta_scan: empty axis");
  std::vector<EtaPoint> out(axis.values.size());
  parallel_for(out.size(), jobs, [&](std::size_t i) {
    out[i].lambda = axis.values[i];
    try {
      const auto run = quench(with_parameter(base, axis.parameter, axis.values[i]), horizon, dt);
      out[i].eta = run.eta;
      if (!run.eta_converged) out[i].flag = "not_converged";
    } catch (const Error& e) {
      out[i].flag = error_code(e);
    }
  });
  const std::size_t n = out.size();
  for (std::size_t i = 0; n > 1 && i < n; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
    out[i].derivative = (out[hi].eta - out[lo].eta) / (out[hi].lambda - out[lo].lambda);
  }
  return out;
}

// ------------------------------------------------------------ trace analysis

// Strict three-point local maxima whose topographic prominence is at least
// `prominence`. Returns their indices.
template <typename Real>
std::vector<std::size_t> local_maxima(const std::vector<Real>& v, Real prominence = Real(1e-6)) {
  std::vector<std::size_t> peaks;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (!(v[i] > v[i - 1] && v[i] > v[i + 1])) continue;
    Real left = v[i], right = v[i];
    for (std::size_t j = i; j-- > 0;) {
      if (v[j] > v[i]) break;
      left = std::min(left, v[j]);
    }
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      if (v[j] > v[i]) break;
      right = std::min(right, v[j]);
    }
    if (v[i] - std::max(left, right) >= prominence) peaks.push_back(i);
  }
  return peaks;
}

template <typename Real>
std::vector<Real> echo_values(const QuenchRun<Real>& run, Real t_from = 0,
                              Real t_to = std::numeric_limits<Real>::infinity()) {
  std::vector<Real> v;
  const Real eps = run.dt / 2;
  for (const auto& s : run.samples)
    if (s.t >= t_from - eps && s.t <= t_to + eps) v.push_back(s.echo);
  return v;
}

// True if no sample rises above its predecessor by more than `tol`.
template <typename Real>
bool is_nonincreasing(const std::vector<Real>& v, Real tol) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1] + tol) return false;
  return true;
}

struct KinkResult {
  std::size_t index = 0;
  double location = 0;
  double ratio = 0;  // max |second difference| / median |second difference|
  bool detected = false;
};

// Kink in a sampled curve: the largest |f[i-1] - 2 f[i] + f[i+1]| must exceed
// `threshold` times the median of the same quantity.
inline KinkResult detect_kink(const std::vector<double>& x, const std::vector<double>& f,
                              double threshold = 5.0) {
  if (x.size() != f.size()) throw PreconditionError("detect_kink: size mismatch");
  if (x.size() < 4) throw PreconditionError("detect_kink: need at least 4 points");
  std::vector<double> d2(x.size() - 2);
  for (std::size_t i = 1; i + 1 < x.size(); ++i) d2[i - 1] = std::abs(f[i - 1] - 2 * f[i] + f[i + 1]);
  for (double d : d2)
    if (std::isnan(d)) throw NumericalError("detect_kink: curve contains flagged points");
  const auto top = std::max_element(d2.begin(), d2.end());
  std::vector<double> sorted = d2;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  const double median = m % 2 ? sorted[m / 2] : (sorted[m / 2 - 1] + sorted[m / 2]) / 2;
  KinkResult k;
  k.index = std::size_t(top - d2.begin()) + 1;
  k.location = x[k.index];
  k.ratio = median > 0 ? *top / median : std::numeric_limits<double>::infinity();
  k.detected = *top > threshold * median;
  return k;
}

}  // namespace nhxy
