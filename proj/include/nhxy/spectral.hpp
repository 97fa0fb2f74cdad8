#pragma once

// Dense non-Hermitian eigendecomposition with biorthonormal left/right
// eigenvector pairs:
//
//   H  R_n = E_n  R_n,      H^dagger L_n = conj(E_n) L_n,
//   <L_n|R_m> = delta_nm,   sum_n |R_n><L_n| = 1.
//
// Right vectors are unit 2-norm; left vectors carry the normalization.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <type_traits>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#ifdef NHXY_HAVE_LAPACKE
#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>
#endif

#include "nhxy/core.hpp"

namespace nhxy {

enum class LeftVectorRoute {
  adjoint_decomposition,  // independent decomposition of H^dagger, then pairing
  inverse,                // rows of R^{-1}
};

struct DecomposeOptions {
  LeftVectorRoute route = LeftVectorRoute::adjoint_decomposition;
  // Eigenvalues closer than cluster_tolerance * max(1, max|E|) are treated as
  // one (possibly degenerate) cluster and biorthonormalized as a block.
  double cluster_tolerance = 1e-8;
  // Two candidate clusters for one left vector within this distance: ambiguous.
  double ambiguity_tolerance = 1e-10;
  // Smallest admissible |<L|R>| (unit vectors) or singular value of the
  // cluster overlap block.
  double defect_tolerance = 1e-12;
  // Input equal to its adjoint within this relative tolerance is treated as
  // Hermitian: orthonormal eigenvectors, left = right. Negative disables.
  double hermitian_tolerance = 1e-14;
  // Re-check biorthonormality/completeness after construction.
  bool verify = true;
  double verify_tolerance = 1e-8;
};

template <typename Real = double>
struct EigenSystem {
  CVector<Real> eigenvalues;
  CMatrix<Real> right_vectors;  // columns R_n
  CMatrix<Real> left_vectors;   // columns L_n
  Real pairing_residual = 0;    // max |conj(mu_m) - E_n| over accepted pairs

  Eigen::Index dim() const { return eigenvalues.size(); }

  // max_{n,m} |<L_n|R_m> - delta_nm|
  Real biorthonormality_residual() const {
    const Eigen::Index n = dim();
    return (left_vectors.adjoint() * right_vectors - CMatrix<Real>::Identity(n, n))
        .cwiseAbs()
        .maxCoeff();
  }

  // max-entry norm of sum_n |R_n><L_n| - 1
  Real completeness_residual() const {
    const Eigen::Index n = dim();
    return (right_vectors * left_vectors.adjoint() - CMatrix<Real>::Identity(n, n))
        .cwiseAbs()
        .maxCoeff();
  }

  // max_n |H R_n - E_n R_n| / (1 + |E_n|)
  Real eigen_residual(const CMatrix<Real>& h) const {
    Real worst = 0;
    for (Eigen::Index n = 0; n < dim(); ++n) {
      const Real r = (h * right_vectors.col(n) - eigenvalues(n) * right_vectors.col(n)).norm();
      worst = std::max(worst, r / (Real(1) + std::abs(eigenvalues(n))));
    }
    return worst;
  }
};

using EigenSystemd = EigenSystem<double>;

namespace detail {

template <typename Real>
std::vector<cd> to_cd_list(const CVector<Real>& values, const std::vector<Eigen::Index>& idx) {
  std::vector<cd> out;
  out.reserve(idx.size());
  for (auto i : idx) out.emplace_back(double(values(i).real()), double(values(i).imag()));
  return out;
}

// Single-linkage clustering of eigenvalues; returns cluster id per index.
template <typename Real>
std::vector<int> cluster_eigenvalues(const CVector<Real>& values, Real tol) {
  const Eigen::Index n = values.size();
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](auto a, auto b) { return values(a).real() < values(b).real(); });
  for (std::size_t a = 0; a < order.size(); ++a) {
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      if (values(order[b]).real() - values(order[a]).real() > tol) break;
      if (std::abs(values(order[b]) - values(order[a])) <= tol) {
        const int ra = find(int(order[a]));
        const int rb = find(int(order[b]));
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
      }
    }
  }
  std::vector<int> id(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) id[i] = find(int(i));
  return id;
}

template <typename Real>
void normalize_columns(CMatrix<Real>& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const Real nrm = m.col(c).norm();
    if (nrm > 0) m.col(c) /= nrm;
  }
}

template <typename Real>
CMatrix<Real> left_by_inverse(const CMatrix<Real>& right, const DecomposeOptions& opt,
                              const CVector<Real>& values) {
  Eigen::PartialPivLU<CMatrix<Real>> lu(right);
  const Real rcond = lu.rcond();
  if (!(rcond > Real(opt.defect_tolerance))) {
    std::vector<Eigen::Index> all(static_cast<std::size_t>(values.size()));
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    throw DefectiveMatrixError("decompose: right eigenvector matrix is singular (rcond " +
                                   std::to_string(double(rcond)) + ")",
                               to_cd_list(values, all));
  }
  return lu.inverse().adjoint();
}

// General complex eigenproblem. Double precision goes to LAPACK zgeev when
// available; everything else, and any zgeev failure, uses Eigen.
template <typename Real>
bool general_eigen(const CMatrix<Real>& matrix, bool vectors, CVector<Real>& values, CMatrix<Real>& right) {
#ifdef NHXY_HAVE_LAPACKE
  if constexpr (std::is_same_v<Real, double>) {
    const lapack_int n = lapack_int(matrix.rows());
    CMatrix<double> a = matrix;
    values.resize(n);
    if (vectors) right.resize(n, n);
    const lapack_int info =
        LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', vectors ? 'V' : 'N', n, a.data(), std::max<lapack_int>(n, 1),
                      values.data(), nullptr, 1, vectors ? right.data() : nullptr, std::max<lapack_int>(n, 1));
    if (info == 0) return true;
  }
#endif
  Eigen::ComplexEigenSolver<CMatrix<Real>> solver;
  // Eigen's default of 30 sweeps per row is too tight for some
  // rank-deficient inputs.
  solver.setMaxIterations(300 * std::max<Eigen::Index>(matrix.rows(), 1));
  solver.compute(matrix, vectors);
  if (solver.info() != Eigen::Success) return false;
  values = solver.eigenvalues();
  if (vectors) right = solver.eigenvectors();
  return true;
}

}  // namespace detail

// Eigenvalues only.
template <typename Real>
CVector<Real> eigenvalues(const CMatrix<Real>& matrix) {
  if (matrix.rows() != matrix.cols()) throw PreconditionError("eigenvalues: matrix not square");
  CVector<Real> values;
  CMatrix<Real> unused;
  if (!detail::general_eigen(matrix, false, values, unused))
    throw NumericalError("eigenvalues: QR iteration failed");
  return values;
}

template <typename Real>
EigenSystem<Real> decompose(const CMatrix<Real>& matrix, const DecomposeOptions& opt = {}) {
  if (matrix.rows() != matrix.cols()) throw PreconditionError("decompose: matrix not square");
  const Eigen::Index n = matrix.rows();

  EigenSystem<Real> sys;
  const Real size = matrix.cwiseAbs().maxCoeff();
  if (opt.hermitian_tolerance >= 0 && n > 0 &&
      (matrix - matrix.adjoint()).cwiseAbs().maxCoeff() <= Real(opt.hermitian_tolerance) * size) {
    // Degenerate levels would otherwise get left vectors that are only a
    // block mixture of the right ones.
    const CMatrix<Real> sym = (matrix + matrix.adjoint()) / Real(2);
    Eigen::SelfAdjointEigenSolver<CMatrix<Real>> solver(sym);
    if (solver.info() != Eigen::Success) throw NumericalError("decompose: Hermitian eigensolver failed");
    sys.eigenvalues = solver.eigenvalues().template cast<Complex<Real>>();
    sys.right_vectors = solver.eigenvectors();
    sys.left_vectors = sys.right_vectors;
    return sys;
  }
  if (!detail::general_eigen(matrix, true, sys.eigenvalues, sys.right_vectors))
    throw NumericalError("decompose: QR iteration failed");
  detail::normalize_columns(sys.right_vectors);

  const Real scale = std::max<Real>(Real(1), sys.eigenvalues.cwiseAbs().maxCoeff());

  if (opt.route == LeftVectorRoute::inverse) {
    sys.left_vectors = detail::left_by_inverse(sys.right_vectors, opt, sys.eigenvalues);
  } else {
    CVector<Real> mu;
    CMatrix<Real> left_raw;
    if (!detail::general_eigen(CMatrix<Real>(matrix.adjoint()), true, mu, left_raw))
      throw NumericalError("decompose: QR iteration failed on adjoint");
    detail::normalize_columns(left_raw);

    const auto cluster = detail::cluster_eigenvalues(sys.eigenvalues, Real(opt.cluster_tolerance) * scale);

    // Assign each left vector to the cluster of the nearest right eigenvalue.
    std::vector<int> left_cluster(static_cast<std::size_t>(n));
    Real worst_pair = 0;
    for (Eigen::Index m = 0; m < n; ++m) {
      const Complex<Real> target = std::conj(mu(m));
      Real best = std::numeric_limits<Real>::infinity();
      Real second = std::numeric_limits<Real>::infinity();
      int best_cluster = -1;
      Eigen::Index best_idx = 0, second_idx = 0;
      for (Eigen::Index k = 0; k < n; ++k) {
        const Real d = std::abs(sys.eigenvalues(k) - target);
        if (d < best) {
          if (best_cluster >= 0 && cluster[k] != best_cluster) {
            second = best;
            second_idx = best_idx;
          }
          best = d;
          best_cluster = cluster[k];
          best_idx = k;
        } else if (d < second && cluster[k] != best_cluster) {
          second = d;
          second_idx = k;
        }
      }
      if (second - best < Real(opt.ambiguity_tolerance) * scale)
        throw ExceptionalPointError(
            "decompose: ambiguous left/right pairing (near-defective / exceptional point)",
            detail::to_cd_list(sys.eigenvalues, {best_idx, second_idx}));
      left_cluster[m] = best_cluster;
      worst_pair = std::max(worst_pair, best);
    }
    sys.pairing_residual = worst_pair;

    // Block-biorthonormalize each cluster.
    sys.left_vectors.resize(n, n);
    std::vector<int> ids(cluster.begin(), cluster.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (int c : ids) {
      std::vector<Eigen::Index> ri, li;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (cluster[k] == c) ri.push_back(k);
        if (left_cluster[k] == c) li.push_back(k);
      }
      if (ri.size() != li.size())
        throw ExceptionalPointError(
            "decompose: left/right pairing is not a bijection (near-defective / exceptional point)",
            detail::to_cd_list(sys.eigenvalues, ri));
      const auto k = static_cast<Eigen::Index>(ri.size());
      CMatrix<Real> rc(n, k), lc(n, k);
      for (Eigen::Index j = 0; j < k; ++j) {
        rc.col(j) = sys.right_vectors.col(ri[j]);
        lc.col(j) = left_raw.col(li[j]);
      }
      CMatrix<Real> overlap = lc.adjoint() * rc;
      Real smallest;
      if (k == 1) {
        smallest = std::abs(overlap(0, 0));
      } else {
        Eigen::JacobiSVD<CMatrix<Real>> svd(overlap);
        smallest = svd.singularValues()(k - 1);
      }
      if (!(smallest > Real(opt.defect_tolerance)))
        throw DefectiveMatrixError("decompose: vanishing left/right overlap (defective matrix)",
                                   detail::to_cd_list(sys.eigenvalues, ri));
      const CMatrix<Real> fixed = lc * overlap.inverse().adjoint();
      for (Eigen::Index j = 0; j < k; ++j) sys.left_vectors.col(ri[j]) = fixed.col(j);
    }
  }

  if (opt.verify) {
    const Real bi = sys.biorthonormality_residual();
    const Real co = sys.completeness_residual();
    if (!(bi <= Real(opt.verify_tolerance)) || !(co <= Real(opt.verify_tolerance))) {
      std::ostringstream msg;
      msg << "decompose: biorthonormal basis ill-conditioned (biorthonormality " << double(bi)
          << ", completeness " << double(co) << "); near-defective / exceptional point";
      std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
      std::iota(all.begin(), all.end(), Eigen::Index{0});
      throw ExceptionalPointError(msg.str(), detail::to_cd_list(sys.eigenvalues, all));
    }
  }
  return sys;
}

// Ascending Re E; values with Re within 1e-12 are ordered by ascending Im,
// then by original position.
template <typename Real>
std::vector<Eigen::Index> real_part_order(const CVector<Real>& values, Real tie = Real(1e-12)) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto lex = [&](Eigen::Index a, Eigen::Index b) {
    if (values(a).real() != values(b).real()) return values(a).real() < values(b).real();
    if (values(a).imag() != values(b).imag()) return values(a).imag() < values(b).imag();
    return a < b;
  };
  std::sort(order.begin(), order.end(), lex);
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t stop = start + 1;
    while (stop < order.size() &&
           values(order[stop]).real() - values(order[start]).real() <= tie)
      ++stop;
    std::sort(order.begin() + long(start), order.begin() + long(stop),
              [&](Eigen::Index a, Eigen::Index b) {
                if (values(a).imag() != values(b).imag()) return values(a).imag() < values(b).imag();
                return a < b;
              });
    start = stop;
  }
  return order;
}

template <typename Real>
EigenSystem<Real> sort_by_real_part(const EigenSystem<Real>& sys) {
  const auto order = real_part_order(sys.eigenvalues);
  EigenSystem<Real> out;
  const Eigen::Index n = sys.dim();
  out.eigenvalues.resize(n);
  out.right_vectors.resize(sys.right_vectors.rows(), n);
  out.left_vectors.resize(sys.left_vectors.rows(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto src = order[static_cast<std::size_t>(j)];
    out.eigenvalues(j) = sys.eigenvalues(src);
    out.right_vectors.col(j) = sys.right_vectors.col(src);
    out.left_vectors.col(j) = sys.left_vectors.col(src);
  }
  out.pairing_residual = sys.pairing_residual;
  return out;
}

}  // namespace nhxy
