#pragma once

// Spin-1/2 XY chain with complex anisotropy and complex transverse field,
//
//   H = -sum_n [ (1+gamma)/2 sx_n sx_{n+1} + (1-gamma)/2 sy_n sy_{n+1} ]
//       + h sum_n sz_n ,
//
// with the (N,1) bond present only for periodic boundaries. Coupling J = 1.
//
// Basis convention: a computational basis state is an integer s in [0, 2^N);
// site 1 is the most significant bit. Bit value 0 is spin up (sz = +1),
// bit value 1 is spin down (sz = -1). Index 0 is therefore |up up ... up>.

#include <bit>
#include <cstdint>
#include <string>

#include <Eigen/Sparse>

#include "nhxy/core.hpp"

namespace nhxy {

enum class Boundary { open, periodic };

inline std::string to_string(Boundary b) { return b == Boundary::open ? "open" : "periodic"; }

template <typename Real = double>
struct ChainSpec {
  int n_sites = 2;
  Complex<Real> gamma{1, 0};
  Complex<Real> field{0, 0};
  Boundary boundary = Boundary::open;

  bool is_ising() const { return gamma == Complex<Real>(1, 0); }
  bool is_imaginary_field_xy() const { return gamma.imag() == 0 && field.real() == 0; }
  bool is_real_field_xy() const { return field.imag() == 0; }
  bool is_hermitian() const { return gamma.imag() == 0 && field.imag() == 0; }

  std::size_t dimension() const { return std::size_t{1} << n_sites; }

  void validate() const {
    if (n_sites < 2) throw PreconditionError("ChainSpec: n_sites must be >= 2");
  }

  // Many-body code indexes basis states with 64-bit words.
  void validate_basis() const {
    validate();
    if (n_sites > 62) throw ResourceError("ChainSpec: n_sites exceeds basis-state width");
  }
};

using ChainSpecd = ChainSpec<double>;

inline constexpr int kDefaultDenseSiteCap = 14;

inline int site_bit(int n_sites, int site) { return n_sites - 1 - site; }

// sz eigenvalue (+1 / -1) of 0-based `site` in basis state `s`.
inline int sz_value(std::uint64_t s, int n_sites, int site) {
  return ((s >> site_bit(n_sites, site)) & 1u) ? -1 : 1;
}

// Visits every nonzero matrix element <target|H|state> of column `state`.
// The callback receives (target, amplitude); the diagonal entry comes first.
// Bond terms flip both spins: amplitude -1 on antiparallel pairs (sx sx + sy sy
// hopping) and -gamma on parallel pairs (pair creation/annihilation).
template <typename Real, typename Visitor>
void for_each_element(const ChainSpec<Real>& spec, std::uint64_t state, Visitor&& visit) {
  const int n = spec.n_sites;
  const int n_bonds = spec.boundary == Boundary::periodic ? n : n - 1;

  int magnetization = 0;
  for (int i = 0; i < n; ++i) magnetization += sz_value(state, n, i);
  visit(state, spec.field * Real(magnetization));

  for (int b = 0; b < n_bonds; ++b) {
    const int i = b;
    const int j = (b + 1) % n;
    const std::uint64_t mask =
        (std::uint64_t{1} << site_bit(n, i)) | (std::uint64_t{1} << site_bit(n, j));
    const bool parallel = sz_value(state, n, i) == sz_value(state, n, j);
    visit(state ^ mask, parallel ? -spec.gamma : Complex<Real>(-1, 0));
  }
}

// Dense 2^N x 2^N matrix. Throws ResourceError above `site_cap`.
template <typename Real>
CMatrix<Real> build_hamiltonian(const ChainSpec<Real>& spec, int site_cap = kDefaultDenseSiteCap) {
  spec.validate_basis();
  if (spec.n_sites > site_cap)
    throw ResourceError("build_hamiltonian: N=" + std::to_string(spec.n_sites) +
                        " exceeds dense cap " + std::to_string(site_cap));
  const auto dim = static_cast<Eigen::Index>(spec.dimension());
  CMatrix<Real> h = CMatrix<Real>::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    for_each_element(spec, static_cast<std::uint64_t>(col),
                     [&](std::uint64_t row, Complex<Real> amp) {
                       h(static_cast<Eigen::Index>(row), col) += amp;
                     });
  }
  return h;
}

template <typename Real>
using SparseOperator = Eigen::SparseMatrix<Complex<Real>, Eigen::RowMajor>;

// Same operator in compressed sparse form; used where repeated matrix-vector
// products dominate (time evolution).
template <typename Real>
SparseOperator<Real> build_sparse_hamiltonian(const ChainSpec<Real>& spec, int site_cap = 24) {
  spec.validate_basis();
  if (spec.n_sites > site_cap)
    throw ResourceError("build_sparse_hamiltonian: N=" + std::to_string(spec.n_sites) +
                        " exceeds cap " + std::to_string(site_cap));
  const auto dim = static_cast<Eigen::Index>(spec.dimension());
  std::vector<Eigen::Triplet<Complex<Real>>> triplets;
  triplets.reserve(static_cast<std::size_t>(dim) * (spec.n_sites + 1));
  for (Eigen::Index col = 0; col < dim; ++col) {
    for_each_element(spec, static_cast<std::uint64_t>(col),
                     [&](std::uint64_t row, Complex<Real> amp) {
                       if (amp != Complex<Real>(0)) triplets.emplace_back(row, col, amp);
                     });
  }
  SparseOperator<Real> h(dim, dim);
  h.setFromTriplets(triplets.begin(), triplets.end());
  return h;
}

// Spin-flip parity eigenvalue of a basis state under prod_n sz_n.
inline int parity_of(std::uint64_t state) { return (std::popcount(state) % 2 == 0) ? 1 : -1; }

}  // namespace nhxy
