#ifndef FLUCTLIM_DYNAMICS_HPP
#define FLUCTLIM_DYNAMICS_HPP

#include <cmath>
#include <optional>
#include <stdexcept>

#include "fluctlim/common.hpp"
#include "fluctlim/fock.hpp"
#include "fluctlim/spin_blocks.hpp"

namespace fluctlim {

// H = c0 a^2 + c1 a a* + c2 a* a + c3 a*^2 with c3 = conj(c0) and c1, c2
// real, so that H is self-adjoint.
struct QuadraticHamiltonian {
  Complex c0;
  double c1 = 0.0;
  double c2 = 0.0;
  Complex c3;

  double cmax() const {
    return std::max(std::max(std::abs(c0), std::abs(c3)),
                    std::max(std::abs(c1), std::abs(c2)));
  }
};

inline void validate_quadratic(const QuadraticHamiltonian& c) {
  if (std::abs(c.c3 - std::conj(c.c0)) > 1e-14)
    throw std::invalid_argument(
        "QuadraticHamiltonian: c3 must equal conj(c0)");
}

// H = a*a, the harmonic generator.
inline QuadraticHamiltonian harmonic_hamiltonian() {
  return {Complex(0.0, 0.0), 0.0, 1.0, Complex(0.0, 0.0)};
}

// H = (i/2)(a^2 - a*^2), the standard squeezing generator.
inline QuadraticHamiltonian squeezing_hamiltonian() {
  return {Complex(0.0, 0.5), 0.0, 0.0, Complex(0.0, -0.5)};
}

// Largest safe-evolution horizon scale: 1 / (32 max_k |c_k|).
inline double t0_threshold(const QuadraticHamiltonian& c) {
  validate_quadratic(c);
  const double m = c.cmax();
  if (m == 0.0)
    throw std::invalid_argument("t0_threshold: all coefficients vanish");
  return 1.0 / (32.0 * m);
}

namespace detail {

// Pentadiagonal representation of the sector Hamiltonian
//   H_M(x) = c0 B0 a^2 + c1 B1 a a* + c2 B2 a*a + c3 B3 a*^2
// where the B_k are the shifted diagonal deformation profiles; m = 0 selects
// the limit-side operator x * (c0 a^2 + ...). Entries follow the truncated
// ladder products, so the top diagonal entry of the a a* term is zero.
struct QuadraticBand {
  Eigen::VectorXd main;  // H(n, n)
  Vector upper;          // H(n, n+2)
  Vector lower;          // H(n+2, n)
};

inline QuadraticBand quadratic_band(const QuadraticHamiltonian& c, long m,
                                    double x, int dim) {
  validate_quadratic(c);
  if (dim < 1) throw std::invalid_argument("quadratic_band: dim < 1");
  auto b = [&](long n) {
    if (m == 0) return n < 0 ? 0.0 : std::sqrt(std::max(x, 0.0));
    return beta(m, x, n);
  };
  QuadraticBand band;
  band.main.resize(dim);
  band.upper.resize(std::max(0, dim - 2));
  band.lower.resize(std::max(0, dim - 2));
  for (int n = 0; n < dim; ++n) {
    const double b1 = b(n) * b(n);
    const double b2 = b(n - 1) * b(n - 1);
    const double aadag = (n + 1 < dim) ? n + 1.0 : 0.0;
    band.main(n) = c.c1 * b1 * aadag + c.c2 * b2 * n;
  }
  for (int n = 0; n + 2 < dim; ++n) {
    const double amp = std::sqrt((n + 1.0) * (n + 2.0));
    band.upper(n) = c.c0 * b(n) * b(n + 1) * amp;
    band.lower(n) = c.c3 * b(n + 1) * b(n) * amp;
  }
  return band;
}

inline TruncatedOperator band_to_dense(const QuadraticBand& band) {
  const Eigen::Index dim = band.main.size();
  TruncatedOperator h = TruncatedOperator::Zero(dim, dim);
  for (Eigen::Index n = 0; n < dim; ++n) h(n, n) = band.main(n);
  for (Eigen::Index n = 0; n + 2 < dim; ++n) {
    h(n, n + 2) = band.upper(n);
    h(n + 2, n) = band.lower(n);
  }
  return h;
}

inline void band_multiply(const QuadraticBand& band, const Vector& v,
                          Vector& out) {
  const Eigen::Index dim = v.size();
  out.resize(dim);
  for (Eigen::Index n = 0; n < dim; ++n) {
    Complex acc = band.main(n) * v(n);
    if (n + 2 < dim) acc += band.upper(n) * v(n + 2);
    if (n >= 2) acc += band.lower(n - 2) * v(n - 2);
    out(n) = acc;
  }
}

inline double band_inf_norm(const QuadraticBand& band) {
  double worst = 0.0;
  const Eigen::Index dim = band.main.size();
  for (Eigen::Index n = 0; n < dim; ++n) {
    double row = std::abs(band.main(n));
    if (n + 2 < dim) row += std::abs(band.upper(n));
    if (n >= 2) row += std::abs(band.lower(n - 2));
    worst = std::max(worst, row);
  }
  return worst;
}

// w = exp(z H) v via scaled Taylor steps; |z| * ||H|| per substep stays
// below 1/2 so the series is short and well conditioned. Deterministic.
inline Vector band_exp_apply(const QuadraticBand& band, Complex z, Vector v) {
  const double norm = band_inf_norm(band);
  const double total = std::abs(z) * norm;
  const int steps = std::max(1, static_cast<int>(std::ceil(total / 0.5)));
  const Complex zs = z / static_cast<double>(steps);
  Vector term(v.size()), next(v.size());
  for (int s = 0; s < steps; ++s) {
    Vector acc = v;
    term = v;
    for (int k = 1; k <= 64; ++k) {
      band_multiply(band, term, next);
      term = next * (zs / static_cast<double>(k));
      acc += term;
      if (term.norm() <= 1e-18 * acc.norm()) break;
    }
    v = acc;
  }
  return v;
}

}  // namespace detail

// H = c0 a^2 + c1 a a* + c2 a*a + c3 a*^2 on the first D levels, built from
// truncated ladder products (the top two rows differ from the untruncated
// operator; everything below them is exact).
inline TruncatedOperator limit_hamiltonian(const QuadraticHamiltonian& c,
                                           int dim) {
  if (dim < 3) throw std::invalid_argument("limit_hamiltonian: dim < 3");
  return detail::band_to_dense(detail::quadratic_band(c, 0, 1.0, dim));
}

// Sector Hamiltonian H_M(x) on the first D levels.
inline TruncatedOperator block_hamiltonian(const QuadraticHamiltonian& c,
                                           long m, double x, int dim) {
  if (dim < 3) throw std::invalid_argument("block_hamiltonian: dim < 3");
  if (m < 1) throw std::invalid_argument("block_hamiltonian: M < 1");
  return detail::band_to_dense(detail::quadratic_band(c, m, x, dim));
}

// U_{M,t}(x) rho U_{M,t}(x)* at the dimension of the given block.
inline TruncatedOperator evolve_block(const TruncatedOperator& block,
                                      const QuadraticHamiltonian& c, long m,
                                      double x, double t) {
  const int dim = static_cast<int>(block.rows());
  TruncatedOperator u = hermitian_evolve(block_hamiltonian(c, m, x, dim), t);
  return u * block * u.adjoint();
}

struct LimitEvolutionInfo {
  int dim = 0;          // final working dimension
  double tail_mass = 0.0;
  bool beyond_t0 = false;  // |t| exceeded t0 (still within the hard 4x cap)
};

// exp(-i t lambda H) rho exp(+i t lambda H) with the truncation grown until
// the evolved state's tail mass settles. |t| beyond 4 t0 is refused.
inline TruncatedOperator limit_evolution(const TruncatedOperator& rho,
                                         double lambda,
                                         const QuadraticHamiltonian& c,
                                         double t,
                                         LimitEvolutionInfo* info = nullptr) {
  validate_quadratic(c);
  if (!(lambda > 0.0 && lambda <= 1.0))
    throw std::invalid_argument("limit_evolution: lambda outside (0, 1]");
  const double t0 = t0_threshold(c);
  if (std::abs(t) > 4.0 * t0)
    throw std::domain_error(
        "limit_evolution: |t| beyond four times the safe horizon t0");
  constexpr int cap = 2048;
  int dim = std::max(static_cast<int>(rho.rows()) + 16, 32);
  for (;; dim += 16) {
    if (dim > cap)
      throw TruncationDiverged(
          "limit_evolution: tail mass failed to settle by dimension 2048");
    TruncatedOperator u =
        hermitian_evolve(limit_hamiltonian(c, dim), lambda * t);
    TruncatedOperator evolved = u * pad_to(rho, dim) * u.adjoint();
    double tail = 0.0;
    for (int n = dim - 8; n < dim; ++n) tail += evolved(n, n).real();
    if (tail < 1e-10) {
      if (info) *info = {dim, tail, std::abs(t) > t0};
      return evolved;
    }
  }
}

// The symplectic matrix solving the linear Hamiltonian equations of motion
// for (Q, P) generated by lambda * h, where h is the classical symbol of H.
inline Eigen::Matrix2d classical_flow(const QuadraticHamiltonian& c,
                                      double lambda, double t) {
  validate_quadratic(c);
  if (!(lambda > 0.0 && lambda <= 1.0))
    throw std::invalid_argument("classical_flow: lambda outside (0, 1]");
  // h = alpha q^2 + beta p^2 + gamma (qp + pq) up to a constant
  const double alpha = c.c0.real() + 0.5 * (c.c1 + c.c2);
  const double beta_coef = -c.c0.real() + 0.5 * (c.c1 + c.c2);
  const double gamma = -c.c0.imag();
  Eigen::Matrix2d gen;
  gen << 2.0 * gamma, 2.0 * beta_coef, -2.0 * alpha, -2.0 * gamma;
  gen *= lambda * t;
  // gen is traceless: gen^2 = delta * I, so the exponential is closed form.
  const double delta = gen(0, 0) * gen(0, 0) + gen(0, 1) * gen(1, 0);
  double ch, shc;
  if (delta > 1e-24) {
    const double mu = std::sqrt(delta);
    ch = std::cosh(mu);
    shc = std::sinh(mu) / mu;
  } else if (delta < -1e-24) {
    const double mu = std::sqrt(-delta);
    ch = std::cos(mu);
    shc = std::sin(mu) / mu;
  } else {
    ch = 1.0 + 0.5 * delta;
    shc = 1.0 + delta / 6.0;
  }
  return ch * Eigen::Matrix2d::Identity() + shc * gen;
}

}  // namespace fluctlim

#endif
