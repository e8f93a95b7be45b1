#ifndef FLUCTLIM_QUBIT_SPACE_HPP
#define FLUCTLIM_QUBIT_SPACE_HPP

#include <bit>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "fluctlim/common.hpp"

// Dense 2^M qubit-register helpers. These back the brute-force oracles and
// the decomposition of explicitly given multi-qubit states; everything here
// is meant for small M (<= 10, dimension <= 1024).

namespace fluctlim {

inline Eigen::Matrix2cd pauli(int k) {
  Eigen::Matrix2cd s;
  switch (k) {
    case 0: s << 1, 0, 0, 1; break;
    case 1: s << 0, 1, 1, 0; break;
    case 2: s << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case 3: s << 1, 0, 0, -1; break;
    default: throw std::invalid_argument("pauli: index outside 0..3");
  }
  return s;
}

inline int qubit_dim(int m) {
  if (m < 1 || m > 20) throw std::invalid_argument("qubit_dim: M outside 1..20");
  return 1 << m;
}

// Basis convention: bit i of the index is 0 for site i in the sigma3 = +1
// state. The all-zero index is the fully polarised highest-weight vector.
inline int site_bit(int index, int site) { return (index >> site) & 1; }

// Sum over sites of a one-site operator: sum_i A^(i).
inline TruncatedOperator site_sum(const Eigen::Matrix2cd& a, int m) {
  const int dim = qubit_dim(m);
  TruncatedOperator out = TruncatedOperator::Zero(dim, dim);
  for (int site = 0; site < m; ++site) {
    for (int col = 0; col < dim; ++col) {
      const int b = site_bit(col, site);
      // rows reachable from col by acting on this site only
      for (int br = 0; br < 2; ++br) {
        Complex v = a(br, b);
        if (v == Complex(0, 0)) continue;
        int row = (col & ~(1 << site)) | (br << site);
        out(row, col) += v;
      }
    }
  }
  return out;
}

// Collective spin components L_k = (1/2) sum_i sigma_k^(i); L+ = L1 + i L2.
inline TruncatedOperator collective_spin(int k, int m) {
  return 0.5 * site_sum(pauli(k), m);
}

inline TruncatedOperator collective_plus(int m) {
  Eigen::Matrix2cd sp;
  sp << 0, 1, 0, 0;  // sigma+ = (sigma1 + i sigma2)/2
  return site_sum(sp, m);
}

// Conjugate by the transposition of sites i and j (an index-bit swap).
inline TruncatedOperator conjugate_by_swap(const TruncatedOperator& rho,
                                           int i, int j, int m) {
  const int dim = qubit_dim(m);
  if (rho.rows() != dim || rho.cols() != dim)
    throw std::invalid_argument("conjugate_by_swap: dimension mismatch");
  auto swapped = [&](int b) {
    int bi = site_bit(b, i), bj = site_bit(b, j);
    if (bi == bj) return b;
    return b ^ (1 << i) ^ (1 << j);
  };
  TruncatedOperator out(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) out(swapped(r), swapped(c)) = rho(r, c);
  return out;
}

// Largest deviation from invariance under adjacent transpositions.
inline double permutation_defect(const TruncatedOperator& rho, int m) {
  double worst = 0.0;
  for (int i = 0; i + 1 < m; ++i) {
    TruncatedOperator g = conjugate_by_swap(rho, i, i + 1, m) - rho;
    worst = std::max(worst, max_abs(g));
  }
  return worst;
}

// Average over the full symmetric group, built one site at a time: the
// average over S_k is the average of transposition cosets (j k) applied to
// the S_{k-1} average.
inline TruncatedOperator symmetrize(TruncatedOperator rho, int m) {
  for (int k = 1; k < m; ++k) {
    TruncatedOperator acc = rho;  // identity coset
    for (int j = 0; j < k; ++j) acc += conjugate_by_swap(rho, j, k, m);
    rho = acc / static_cast<double>(k + 1);
  }
  return rho;
}

// Seeded random pure state on 2^M qubits, symmetrized. The result is exactly
// permutation invariant up to roundoff and has unit trace.
inline TruncatedOperator random_symmetrized_state(int m, std::uint64_t seed) {
  const int dim = qubit_dim(m);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector psi(dim);
  for (int i = 0; i < dim; ++i) psi(i) = Complex(gauss(rng), gauss(rng));
  psi.normalize();
  TruncatedOperator rho = psi * psi.adjoint();
  rho = symmetrize(rho, m);
  rho /= rho.trace().real();
  return rho;
}

}  // namespace fluctlim

#endif
