#pragma once

// Symmetry-resolved dense blocks of the chain Hamiltonian.
//
// Every parameter choice commutes with the spin-flip parity prod_n sz_n and,
// for periodic chains, with the one-site translation T. The Hilbert space
// splits into blocks labelled by (parity, momentum m), k = 2 pi m / N. Each
// block is spanned by orthonormal Bloch states
//
//   |r, m> = R_r^{-1/2} sum_{j<R_r} e^{-i k j} T^j |r>,
//
// where r is the smallest integer in its translation orbit and R_r is the
// orbit length. Open chains use parity only (orbits of length one).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "nhxy/model.hpp"

namespace nhxy {

class SectorLayout {
 public:
  struct Sector {
    int parity = 1;
    int momentum = 0;
    std::vector<std::uint64_t> representatives;
    std::vector<int> periods;
    std::vector<int> index_of_rep;  // full-space state -> block index, -1 if absent
    Eigen::Index size() const { return Eigen::Index(representatives.size()); }
  };

  SectorLayout(int n_sites, Boundary boundary)
      : n_(n_sites), translations_(boundary == Boundary::periodic ? n_sites : 1) {
    if (n_sites < 2) throw PreconditionError("SectorLayout: n_sites must be >= 2");
    if (n_sites > 24) throw ResourceError("SectorLayout: n_sites exceeds cap 24");
    const std::uint64_t dim = std::uint64_t{1} << n_;
    rep_.assign(dim, 0);
    shift_.assign(dim, 0);
    std::vector<int> period(dim, 0);
    for (std::uint64_t s = 0; s < dim; ++s) {
      std::uint64_t best = s;
      int best_j = 0;
      std::uint64_t cur = s;
      int orbit = translations_;
      for (int j = 1; j < translations_; ++j) {
        cur = rotate(cur);
        if (cur == s) {
          orbit = j;
          break;
        }
        if (cur < best) {
          best = cur;
          best_j = j;
        }
      }
      rep_[s] = best;
      // rotate^{best_j}(s) = best, hence s = rotate^{N - best_j}(best)
      shift_[s] = (translations_ - best_j) % translations_;
      if (best == s) period[s] = orbit;
    }
    for (int parity : {1, -1}) {
      for (int m = 0; m < translations_; ++m) {
        Sector sec;
        sec.parity = parity;
        sec.momentum = m;
        sec.index_of_rep.assign(dim, -1);
        for (std::uint64_t s = 0; s < dim; ++s) {
          if (rep_[s] != s || parity_of(s) != parity) continue;
          if ((m * period[s]) % translations_ != 0) continue;
          sec.index_of_rep[s] = int(sec.representatives.size());
          sec.representatives.push_back(s);
          sec.periods.push_back(period[s]);
        }
        if (!sec.representatives.empty()) sectors_.push_back(std::move(sec));
      }
    }
  }

  int n_sites() const { return n_; }
  int translations() const { return translations_; }
  const std::vector<Sector>& sectors() const { return sectors_; }

  // T: the spin on site i moves to site i+1 (cyclically).
  std::uint64_t rotate(std::uint64_t s) const {
    return (s >> 1) | ((s & 1u) << (n_ - 1));
  }

  template <typename Real>
  Complex<Real> phase(int momentum, int steps) const {
    const Real k = Real(2) * std::numbers::pi_v<Real> * Real(momentum) / Real(translations_);
    return std::polar(Real(1), k * Real(steps));
  }

  template <typename Real>
  CMatrix<Real> block(const ChainSpec<Real>& spec, const Sector& sec) const {
    if (spec.n_sites != n_ ||
        (spec.boundary == Boundary::periodic) != (translations_ == n_))
      throw PreconditionError("SectorLayout::block: spec does not match layout");
    const Eigen::Index d = sec.size();
    CMatrix<Real> h = CMatrix<Real>::Zero(d, d);
    for (Eigen::Index c = 0; c < d; ++c) {
      const std::uint64_t r = sec.representatives[std::size_t(c)];
      const Real rc = Real(sec.periods[std::size_t(c)]);
      for_each_element(spec, r, [&](std::uint64_t s, Complex<Real> amp) {
        const int row = sec.index_of_rep[rep_[s]];
        if (row < 0) return;
        const Real rr = Real(sec.periods[std::size_t(row)]);
        h(row, c) += amp * phase<Real>(sec.momentum, shift_[s]) * std::sqrt(rc / rr);
      });
    }
    return h;
  }

  // Block coefficients -> full 2^N vector.
  template <typename Real>
  CVector<Real> expand(const Sector& sec, const CVector<Real>& coeffs) const {
    CVector<Real> full = CVector<Real>::Zero(Eigen::Index(std::uint64_t{1} << n_));
    for (Eigen::Index c = 0; c < sec.size(); ++c) {
      const int period = sec.periods[std::size_t(c)];
      const Real norm = Real(1) / std::sqrt(Real(period));
      std::uint64_t s = sec.representatives[std::size_t(c)];
      for (int j = 0; j < period; ++j) {
        full(Eigen::Index(s)) += coeffs(c) * norm * phase<Real>(sec.momentum, -j);
        s = rotate(s);
      }
    }
    return full;
  }

 private:
  int n_;
  int translations_;
  std::vector<std::uint64_t> rep_;
  std::vector<int> shift_;
  std::vector<Sector> sectors_;
};

}  // namespace nhxy
