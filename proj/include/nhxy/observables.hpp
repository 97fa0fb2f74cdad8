#pragma once

// Biorthogonal ground-state observables: fidelity, fidelity susceptibility,
// the reduced density matrix of |R><L| and its entanglement entropy.
//
// The ground state is the eigenstate with the lowest real part of the
// energy. It is found block by block in the parity x momentum sectors (see
// sectors.hpp) or, on request, from the full dense matrix.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "nhxy/model.hpp"
#include "nhxy/parameters.hpp"
#include "nhxy/sectors.hpp"
#include "nhxy/spectral.hpp"

namespace nhxy {

class GroundLevelExceptionalPointError : public ExceptionalPointError {
 public:
  using ExceptionalPointError::ExceptionalPointError;
};

enum class GroundStateMethod {
  sectors,     // symmetry blocks (default)
  full_dense,  // one dense decomposition of the 2^N matrix
};

struct SectorLabel {
  int parity = 1;
  int momentum = 0;
  friend bool operator==(const SectorLabel&, const SectorLabel&) = default;
};

struct GroundStateOptions {
  GroundStateMethod method = GroundStateMethod::sectors;
  int site_cap = kDefaultDenseSiteCap;
  // Search only this block (used for nearby parameter values once the
  // ground sector is known to be isolated).
  std::optional<SectorLabel> restrict_to;
  DecomposeOptions decompose{};
};

template <typename Real = double>
struct GroundStatePair {
  Complex<Real> energy;
  CVector<Real> right;  // unit 2-norm
  CVector<Real> left;   // <left|right> = 1
  SectorLabel sector;
  // Re-distance from the ground energy to the lowest level of any other
  // block (infinity when only one block was searched or exists).
  Real sector_gap = std::numeric_limits<Real>::infinity();
  int n_sites = 0;
};

using GroundStatePaird = GroundStatePair<double>;

namespace detail {

// Right/left eigenpair of `block` for the (already known) eigenvalue `e0`
// from the sorted biorthogonal decomposition; if some other level makes the
// whole basis ill-conditioned, falls back to inverse iteration on the
// shifted matrix and its adjoint.
template <typename Real>
std::pair<CVector<Real>, CVector<Real>> ground_pair(const CMatrix<Real>& block, Complex<Real> e0,
                                                    const DecomposeOptions& opt) {
  try {
    const auto sys = sort_by_real_part(decompose(block, opt));
    return {sys.right_vectors.col(0), sys.left_vectors.col(0)};
  } catch (const ExceptionalPointError& err) {
    const Real scale = std::max<Real>(Real(1), std::abs(e0));
    for (const auto& z : err.cluster()) {
      if (std::abs(Complex<Real>(Real(z.real()), Real(z.imag())) - e0) <= Real(1e-8) * scale &&
          err.cluster().size() <= 4)
        throw GroundLevelExceptionalPointError(
            std::string("ground state at an exceptional point: ") + err.what(), err.cluster());
    }
  }
  const Eigen::Index n = block.rows();
  const Real scale = std::max<Real>(Real(1), std::abs(e0));
  const Complex<Real> shift = e0 + Complex<Real>(Real(1e-11), Real(1e-11)) * scale;
  auto inverse_iterate = [&](const CMatrix<Real>& m, Complex<Real> s) {
    Eigen::PartialPivLU<CMatrix<Real>> lu(m - s * CMatrix<Real>::Identity(n, n));
    CVector<Real> v = CVector<Real>::Ones(n) / std::sqrt(Real(n));
    for (int it = 0; it < 4; ++it) {
      v = lu.solve(v);
      v /= v.norm();
    }
    return v;
  };
  CVector<Real> r = inverse_iterate(block, shift);
  CVector<Real> l = inverse_iterate(CMatrix<Real>(block.adjoint()), std::conj(shift));
  const Complex<Real> ov = l.dot(r);
  if (!(std::abs(ov) > Real(opt.defect_tolerance)))
    throw GroundLevelExceptionalPointError("ground state: vanishing left/right overlap",
                                           {cd(double(e0.real()), double(e0.imag()))});
  l /= std::conj(ov);
  const Real res = (block * r - e0 * r).norm() / (Real(1) + std::abs(e0));
  if (!(res <= Real(1e-8)))
    throw GroundLevelExceptionalPointError("ground state: inverse iteration did not converge",
                                           {cd(double(e0.real()), double(e0.imag()))});
  return {r, l};
}

template <typename Real>
bool lower_level(Complex<Real> a, Complex<Real> b) {
  if (std::abs(a.real() - b.real()) > Real(1e-12)) return a.real() < b.real();
  return a.imag() < b.imag();
}

}  // namespace detail

template <typename Real>
GroundStatePair<Real> ground_state(const ChainSpec<Real>& spec, const GroundStateOptions& opt = {}) {
  spec.validate_basis();
  if (spec.n_sites > opt.site_cap)
    throw ResourceError("ground_state: N=" + std::to_string(spec.n_sites) + " exceeds dense cap " +
                        std::to_string(opt.site_cap));
  GroundStatePair<Real> gs;
  gs.n_sites = spec.n_sites;

  if (opt.method == GroundStateMethod::full_dense) {
    const auto sys = sort_by_real_part(decompose(build_hamiltonian(spec, opt.site_cap), opt.decompose));
    gs.energy = sys.eigenvalues(0);
    gs.right = sys.right_vectors.col(0);
    gs.left = sys.left_vectors.col(0);
    gs.sector = {0, 0};
    return gs;
  }

  const SectorLayout layout(spec.n_sites, spec.boundary);
  const SectorLayout::Sector* best = nullptr;
  CMatrix<Real> best_block;
  Complex<Real> best_e;
  Real runner_up = std::numeric_limits<Real>::infinity();
  for (const auto& sec : layout.sectors()) {
    if (opt.restrict_to && !(SectorLabel{sec.parity, sec.momentum} == *opt.restrict_to)) continue;
    CMatrix<Real> block = layout.block(spec, sec);
    const CVector<Real> ev = eigenvalues(block);
    Complex<Real> low = ev(0);
    for (Eigen::Index i = 1; i < ev.size(); ++i)
      if (detail::lower_level(ev(i), low)) low = ev(i);
    if (best == nullptr || detail::lower_level(low, best_e)) {
      if (best != nullptr) runner_up = std::min(runner_up, best_e.real());
      best = &sec;
      best_e = low;
      best_block = std::move(block);
    } else {
      runner_up = std::min(runner_up, low.real());
    }
  }
  if (best == nullptr) throw PreconditionError("ground_state: requested sector does not exist");

  auto [r_block, l_block] = detail::ground_pair(best_block, best_e, opt.decompose);
  gs.energy = best_e;
  gs.right = layout.expand(*best, CVector<Real>(r_block));
  gs.left = layout.expand(*best, CVector<Real>(l_block));
  gs.sector = {best->parity, best->momentum};
  gs.sector_gap = runner_up - best_e.real();
  return gs;
}

// ---------------------------------------------------------------- fidelity

template <typename Real = double>
struct FidelityResult {
  Complex<Real> value{1, 0};
  bool crossing = false;  // an overlap fell below 0.1: ground states from different branches
};

// Principal square root of <L(b)|R(a)> <L(a)|R(b)>.
template <typename Real>
FidelityResult<Real> fidelity(const GroundStatePair<Real>& a, const GroundStatePair<Real>& b) {
  const Complex<Real> ab = b.left.dot(a.right);
  const Complex<Real> ba = a.left.dot(b.right);
  FidelityResult<Real> f;
  f.value = std::sqrt(ab * ba);
  f.crossing = std::abs(ab) < Real(0.1) || std::abs(ba) < Real(0.1);
  return f;
}

namespace detail {

// Ground state at a nearby parameter value, reusing the reference block when
// the block gap excludes a crossing for a step of size |step|.
template <typename Real>
GroundStatePair<Real> nearby_ground_state(const ChainSpec<Real>& spec, const GroundStatePair<Real>& ref,
                                          Real step, GroundStateOptions opt) {
  if (opt.method == GroundStateMethod::sectors && !opt.restrict_to &&
      ref.sector_gap > Real(20) * Real(spec.n_sites) * std::abs(step)) {
    opt.restrict_to = ref.sector;
    auto gs = ground_state(spec, opt);
    gs.sector_gap = ref.sector_gap;
    return gs;
  }
  return ground_state(spec, opt);
}

}  // namespace detail

template <typename Real>
FidelityResult<Real> fidelity(const ChainSpec<Real>& spec, Parameter param, Real lambda, Real delta,
                              const GroundStateOptions& opt = {}) {
  const auto a = ground_state(with_parameter(spec, param, lambda), opt);
  if (delta == Real(0)) return {};  // identical states: F = 1
  const auto b = detail::nearby_ground_state(with_parameter(spec, param, lambda + delta), a, delta, opt);
  return fidelity(a, b);
}

// ---------------------------------------------------------- susceptibility

template <typename Real = double>
struct SusceptibilityResult {
  Real value = 0;           // chi_F at step delta
  Real half_step_value = 0; // chi_F at delta / 2
  Complex<Real> fidelity{1, 0};
  bool crossing = false;
  bool not_converged = false;  // chi(delta) and chi(delta/2) differ by > 1%
  bool complex_log = false;    // |Im ln F| > 0.1 |Re ln F|

  bool flagged() const { return crossing || not_converged || complex_log; }
};

inline constexpr double kDefaultDeltaLambda = 1e-4;

template <typename Real>
Real chi_from_fidelity(Complex<Real> f, int n_sites, Real delta) {
  return std::real(Real(-2) * std::log(f) / (Real(n_sites) * delta * delta));
}

template <typename Real>
SusceptibilityResult<Real> susceptibility(const ChainSpec<Real>& spec, Parameter param, Real lambda,
                                          Real delta = Real(kDefaultDeltaLambda),
                                          const GroundStateOptions& opt = {}) {
  if (!(delta > 0)) throw PreconditionError("susceptibility: delta_lambda must be > 0");
  const auto a = ground_state(with_parameter(spec, param, lambda), opt);
  const auto b = detail::nearby_ground_state(with_parameter(spec, param, lambda + delta), a, delta, opt);
  const auto c = detail::nearby_ground_state(with_parameter(spec, param, lambda + delta / 2), a,
                                             delta / 2, opt);
  const auto f_full = fidelity(a, b);
  const auto f_half = fidelity(a, c);
  SusceptibilityResult<Real> out;
  out.fidelity = f_full.value;
  out.crossing = f_full.crossing || f_half.crossing;
  out.value = chi_from_fidelity(f_full.value, spec.n_sites, delta);
  out.half_step_value = chi_from_fidelity(f_half.value, spec.n_sites, delta / 2);
  const Real scale = std::max(std::abs(out.value), std::abs(out.half_step_value));
  out.not_converged = std::abs(out.value - out.half_step_value) > Real(0.01) * scale;
  const Complex<Real> lf = std::log(f_full.value);
  out.complex_log = std::abs(lf.imag()) > Real(0.1) * std::abs(lf.real());
  return out;
}

// ----------------------------------------------------------- peak finding

struct PeakOptions {
  int coarse_points = 41;
  double tolerance = 1e-5;      // final bracket width
  double ambiguity = 0.01;      // competing local maxima within 1% -> error
};

struct Peak {
  double location = 0;
  double value = 0;
  std::vector<std::pair<double, double>> coarse;  // (lambda, f) samples, NaN = excluded
};

class BracketingError : public Error {
 public:
  using Error::Error;
};

class AmbiguousPeakError : public Error {
 public:
  using Error::Error;
};

// Coarse grid followed by golden-section refinement of the bracket around the
// best interior sample. `f` may return NaN for points to ignore.
inline Peak find_peak(const std::function<double(double)>& f, double lo, double hi,
                      const PeakOptions& opt = {}, int jobs = 1) {
  if (!(hi > lo)) throw PreconditionError("find_peak: empty interval");
  if (opt.coarse_points < 3) throw PreconditionError("find_peak: need >= 3 coarse points");
  const int n = opt.coarse_points;
  Peak peak;
  peak.coarse.resize(std::size_t(n));
  parallel_for(std::size_t(n), jobs, [&](std::size_t i) {
    const double x = lo + (hi - lo) * double(i) / double(n - 1);
    peak.coarse[i] = {x, f(x)};
  });

  int best = -1;
  for (int i = 0; i < n; ++i) {
    const double v = peak.coarse[std::size_t(i)].second;
    if (std::isnan(v)) continue;
    if (best < 0 || v > peak.coarse[std::size_t(best)].second) best = i;
  }
  if (best < 0) throw BracketingError("find_peak: no valid samples");
  if (best == 0 || best == n - 1)
    throw BracketingError("find_peak: maximum at interval endpoint; no interior peak");

  const double top = peak.coarse[std::size_t(best)].second;
  auto sample = [&](int i) { return peak.coarse[std::size_t(i)].second; };
  for (int i = 1; i < n - 1; ++i) {
    if (std::abs(i - best) <= 1) continue;
    const double v = sample(i);
    if (std::isnan(v)) continue;
    const bool local_max = (std::isnan(sample(i - 1)) || v >= sample(i - 1)) &&
                           (std::isnan(sample(i + 1)) || v >= sample(i + 1));
    if (local_max && v >= top * (1.0 - opt.ambiguity))
      throw AmbiguousPeakError("find_peak: competing maxima within 1% at " +
                               std::to_string(peak.coarse[std::size_t(i)].first) + " and " +
                               std::to_string(peak.coarse[std::size_t(best)].first));
  }

  // Golden-section search on [x_{best-1}, x_{best+1}].
  double a = peak.coarse[std::size_t(best - 1)].first;
  double b = peak.coarse[std::size_t(best + 1)].first;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  auto safe = [&](double x) {
    const double v = f(x);
    return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
  };
  double fc = safe(c), fd = safe(d);
  while (b - a > opt.tolerance) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = safe(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = safe(d);
    }
  }
  peak.location = fc >= fd ? c : d;
  peak.value = std::max(fc, fd);
  if (top > peak.value) {
    peak.location = peak.coarse[std::size_t(best)].first;
    peak.value = top;
  }
  return peak;
}

// Maximum of chi_F(lambda) over [lo, hi]. Points with a crossing flag are
// excluded from the search.
template <typename Real>
Peak susceptibility_peak(const ChainSpec<Real>& spec, Parameter param, Real lo, Real hi,
                         Real delta = Real(kDefaultDeltaLambda), const PeakOptions& popt = {},
                         const GroundStateOptions& gopt = {}, int jobs = 1) {
  auto chi = [&](double x) -> double {
    try {
      const auto r = susceptibility(spec, param, Real(x), delta, gopt);
      if (r.crossing) return std::numeric_limits<double>::quiet_NaN();
      return double(r.value);
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  return find_peak(chi, double(lo), double(hi), popt, jobs);
}

// ------------------------------------------------------------ entanglement

template <typename Real = double>
struct ReducedDensity {
  int subsystem_size = 0;
  CMatrix<Real> matrix;
};

// rho_A = Tr_B |R><L| / <L|R>, with A the first `subsystem_size` sites.
template <typename Real>
ReducedDensity<Real> reduced_density(const CVector<Real>& right, const CVector<Real>& left, int n_sites,
                                     int subsystem_size) {
  if (subsystem_size < 1 || subsystem_size > n_sites - 1)
    throw PreconditionError("reduced_density: L_A must lie in [1, N-1]");
  const Eigen::Index dim_a = Eigen::Index(1) << subsystem_size;
  const Eigen::Index dim_b = Eigen::Index(1) << (n_sites - subsystem_size);
  if (right.size() != dim_a * dim_b || left.size() != dim_a * dim_b)
    throw PreconditionError("reduced_density: vector length does not match 2^N");
  // index = a * dim_b + b  =>  column-major (dim_b x dim_a) view has (b, a).
  const Eigen::Map<const CMatrix<Real>> r(right.data(), dim_b, dim_a);
  const Eigen::Map<const CMatrix<Real>> l(left.data(), dim_b, dim_a);
  ReducedDensity<Real> rho;
  rho.subsystem_size = subsystem_size;
  rho.matrix = r.transpose() * l.conjugate();
  const Complex<Real> tr = rho.matrix.trace();
  if (!(std::abs(tr) > Real(1e-300))) throw NumericalError("reduced_density: vanishing trace");
  rho.matrix /= tr;
  return rho;
}

template <typename Real>
ReducedDensity<Real> reduced_density(const GroundStatePair<Real>& gs, int subsystem_size) {
  return reduced_density(gs.right, gs.left, gs.n_sites, subsystem_size);
}

// S = -sum_i lambda_i ln lambda_i over eigenvalues with |lambda_i| > 1e-12
// (principal log). Re S is the entanglement entropy; Im S is diagnostic.
template <typename Real>
Complex<Real> entanglement_entropy(const ReducedDensity<Real>& rho) {
  // rho = U S V^H has the same nonzero eigenvalues as S V^H U restricted to
  // the numerical range; dropping the null space keeps the QR sweep away from
  // a large cluster of near-zero eigenvalues.
  Eigen::JacobiSVD<CMatrix<Real>> svd(rho.matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > sv(0) * Real(1e-14)) ++rank;
  const CMatrix<Real> core = sv.head(rank).asDiagonal() *
                             (svd.matrixV().leftCols(rank).adjoint() * svd.matrixU().leftCols(rank));
  CVector<Real> ev;
  try {
    ev = eigenvalues(core);
  } catch (const NumericalError& e) {
    throw ExceptionalPointError(std::string("entanglement_entropy: ") + e.what(), {});
  }
  Complex<Real> s(0);
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (std::abs(ev(i)) > Real(1e-12)) s -= ev(i) * std::log(ev(i));
  return s;
}

template <typename Real = double>
struct EntropyPoint {
  int subsystem_size = 0;
  Complex<Real> entropy;
};

template <typename Real>
std::vector<EntropyPoint<Real>> entropy_subsystem_scan(const GroundStatePair<Real>& gs) {
  std::vector<EntropyPoint<Real>> out;
  for (int la = 1; la <= gs.n_sites - 1; ++la)
    out.push_back({la, entanglement_entropy(reduced_density(gs, la))});
  return out;
}

template <typename Real>
std::vector<EntropyPoint<Real>> entropy_subsystem_scan(const ChainSpec<Real>& spec,
                                                       const GroundStateOptions& opt = {}) {
  return entropy_subsystem_scan(ground_state(spec, opt));
}

}  // namespace nhxy
