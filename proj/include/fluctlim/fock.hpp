#ifndef FLUCTLIM_FOCK_HPP
#define FLUCTLIM_FOCK_HPP

#include <cmath>
#include <stdexcept>

#include "fluctlim/common.hpp"

namespace fluctlim {

// Ladder and quadrature matrices on the first D Hermite levels.
struct CanonicalOperators {
  TruncatedOperator annihilator;  // <n-1| a |n> = sqrt(n)
  TruncatedOperator creator;      // adjoint of annihilator
  TruncatedOperator number;       // diag(0, 1, ..., D-1)
  TruncatedOperator position;     // (a + a*) / sqrt(2)
  TruncatedOperator momentum;     // (a - a*) / (i sqrt(2))
};

inline CanonicalOperators canonical_operators(int dim) {
  if (dim < 1) throw std::invalid_argument("canonical_operators: dim < 1");
  CanonicalOperators ops;
  ops.annihilator = TruncatedOperator::Zero(dim, dim);
  for (int n = 1; n < dim; ++n)
    ops.annihilator(n - 1, n) = std::sqrt(static_cast<double>(n));
  ops.creator = ops.annihilator.adjoint();
  ops.number = TruncatedOperator::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) ops.number(n, n) = static_cast<double>(n);
  ops.position = (ops.annihilator + ops.creator) / std::sqrt(2.0);
  ops.momentum =
      (ops.annihilator - ops.creator) / (Complex(0.0, 1.0) * std::sqrt(2.0));
  return ops;
}

// exp(-i t H) for Hermitian H, by full eigendecomposition. Deterministic for
// fixed input (eigenvalues in ascending order).
inline TruncatedOperator hermitian_evolve(const TruncatedOperator& h,
                                          double t) {
  require_hermitian(h, tol::eig, "hermitian_evolve");
  Eigen::SelfAdjointEigenSolver<TruncatedOperator> es(h);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("hermitian_evolve: eigendecomposition failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  Vector phases(ev.size());
  for (Eigen::Index k = 0; k < ev.size(); ++k)
    phases(k) = std::exp(Complex(0.0, -t * ev(k)));
  return es.eigenvectors() * phases.asDiagonal() *
         es.eigenvectors().adjoint();
}

// Weyl operator W(x1, x2) = exp(i (x2 Q - x1 P)) on the first D levels.
// Exactly unitary up to eigensolver noise; the truncation shows up as wrong
// matrix elements near the boundary, not as a unitarity defect.
inline TruncatedOperator weyl_operator(int dim, double x1, double x2) {
  CanonicalOperators ops = canonical_operators(dim);
  TruncatedOperator gen = x2 * ops.position - x1 * ops.momentum;
  return hermitian_evolve(gen, -1.0);
}

inline double unitarity_defect(const TruncatedOperator& u) {
  TruncatedOperator g = u.adjoint() * u;
  g -= TruncatedOperator::Identity(u.rows(), u.cols());
  return max_abs(g);
}

// Sum of singular values.
inline double trace_norm(const TruncatedOperator& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<TruncatedOperator> svd(a);
  return svd.singularValues().sum();
}

}  // namespace fluctlim

#endif
