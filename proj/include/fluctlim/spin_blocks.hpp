#ifndef FLUCTLIM_SPIN_BLOCKS_HPP
#define FLUCTLIM_SPIN_BLOCKS_HPP

#include <cmath>
#include <stdexcept>

#include "fluctlim/common.hpp"

namespace fluctlim {

// One total-spin sector of an M-qubit permutation-invariant state. twoJ and
// M share parity; the sector carrier has dimension twoJ + 1 and its grid
// coordinate is x = twoJ / M.
struct BlockIndex {
  int two_j = 0;
  int qubits = 0;

  double x() const { return static_cast<double>(two_j) / qubits; }
};

inline void validate_block_index(const BlockIndex& idx) {
  if (idx.qubits < 1)
    throw std::invalid_argument("BlockIndex: qubit count < 1");
  if (idx.two_j < 0 || idx.two_j > idx.qubits)
    throw std::invalid_argument("BlockIndex: twoJ outside [0, M]");
  if ((idx.two_j & 1) != (idx.qubits & 1))
    throw std::invalid_argument("BlockIndex: twoJ and M differ in parity");
}

// Deformation profile beta_M(x, n) = sqrt(x - n/M) on [0, 1], zero outside.
// Negative n (a shifted index that fell off the bottom) gives zero; this is
// what makes the shifted diagonals below match the support of a*^2.
inline double beta(long m, double x, long n) {
  if (m < 1) throw std::invalid_argument("beta: M < 1");
  if (n < 0) return 0.0;
  double arg = x - static_cast<double>(n) / static_cast<double>(m);
  if (arg <= 0.0 || arg > 1.0) return 0.0;
  return std::sqrt(arg);
}

// Spin-j ladder matrices in the basis psi_n, n = 0..2j, where psi_0 is the
// highest-weight vector (L3 psi_n = (j - n) psi_n):
//   L+ psi_n = sqrt(n (2j - n + 1)) psi_{n-1}
//   L- psi_n = sqrt((2j - n)(n + 1)) psi_{n+1}
struct SpinLadder {
  TruncatedOperator plus;
  TruncatedOperator minus;
  TruncatedOperator z;
};

inline SpinLadder spin_ladder(int two_j) {
  if (two_j < 0) throw std::invalid_argument("spin_ladder: twoJ < 0");
  const int dim = two_j + 1;
  const double j = 0.5 * two_j;
  SpinLadder l;
  l.plus = TruncatedOperator::Zero(dim, dim);
  for (int n = 1; n < dim; ++n)
    l.plus(n - 1, n) =
        std::sqrt(static_cast<double>(n) * (two_j - n + 1));
  l.minus = l.plus.adjoint();
  l.z = TruncatedOperator::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) l.z(n, n) = j - n;
  return l;
}

// Deformed ladder pair a_M(x) = beta_M(x, N) a on the first D levels:
//   <n-1| a_M(x) |n> = beta_M(x, n-1) sqrt(n).
// At x = twoJ/M and D = twoJ+1 this is exactly L+ / sqrt(M) in the spin-j
// basis above, and the pair closes on [a_M, a_M*] = 2 L3 / M there.
struct DeformedLadder {
  TruncatedOperator annihilator;
  TruncatedOperator creator;
};

inline DeformedLadder deformed_ladder(long m, double x, int dim) {
  if (dim < 1) throw std::invalid_argument("deformed_ladder: dim < 1");
  DeformedLadder d;
  d.annihilator = TruncatedOperator::Zero(dim, dim);
  for (int n = 1; n < dim; ++n)
    d.annihilator(n - 1, n) =
        beta(m, x, n - 1) * std::sqrt(static_cast<double>(n));
  d.creator = d.annihilator.adjoint();
  return d;
}

}  // namespace fluctlim

#endif
