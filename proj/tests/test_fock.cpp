#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fluctlim/fock.hpp"

using namespace fluctlim;

TEST_CASE("ladder matrix elements and number operator") {
  const int dim = 12;
  CanonicalOperators ops = canonical_operators(dim);
  CHECK(std::abs(ops.annihilator(0, 1) - 1.0) < 1e-15);
  CHECK(std::abs(ops.annihilator(3, 4) - 2.0) < 1e-15);
  CHECK(max_abs(ops.creator - ops.annihilator.adjoint().eval()) == 0.0);
  CHECK(max_abs(ops.number - (ops.creator * ops.annihilator).eval()) <
        1e-13);
}

TEST_CASE("canonical commutator away from the truncation edge") {
  const int dim = 16;
  CanonicalOperators ops = canonical_operators(dim);
  TruncatedOperator comm =
      ops.position * ops.momentum - ops.momentum * ops.position;
  // the last two rows/columns feel the truncation; the interior is exact
  TruncatedOperator interior = comm.topLeftCorner(dim - 2, dim - 2) -
                               Complex(0.0, 1.0) *
                                   TruncatedOperator::Identity(dim - 2,
                                                               dim - 2);
  CHECK(max_abs(interior) < 1e-13);
}

TEST_CASE("evolution under the number operator gives pure phases") {
  const int dim = 5;
  CanonicalOperators ops = canonical_operators(dim);
  TruncatedOperator u = hermitian_evolve(ops.number, M_PI);
  // exp(-i pi n) = (-1)^n, frozen
  for (int n = 0; n < dim; ++n) {
    const double expected = (n % 2 == 0) ? 1.0 : -1.0;
    CHECK(std::abs(u(n, n) - expected) < 1e-12);
  }
  CHECK(unitarity_defect(u) < 1e-12);
}

TEST_CASE("evolution rejects non-Hermitian generators") {
  TruncatedOperator h = TruncatedOperator::Zero(3, 3);
  h(0, 1) = 1.0;  // missing the conjugate entry
  CHECK_THROWS_AS(hermitian_evolve(h, 1.0), std::invalid_argument);
}

TEST_CASE("trace norm of a diagonal matrix is the absolute sum") {
  TruncatedOperator a = TruncatedOperator::Zero(3, 3);
  a(0, 0) = 1.0;
  a(1, 1) = -2.0;
  a(2, 2) = 3.0;
  CHECK(std::abs(trace_norm(a) - 6.0) < 1e-12);
}

TEST_CASE("Weyl operators are unitary and reduce to the identity") {
  CHECK(unitarity_defect(weyl_operator(48, 0.7, -0.3)) < 1e-10);
  CHECK(max_abs(weyl_operator(8, 0.0, 0.0) -
                TruncatedOperator::Identity(8, 8)) < 1e-12);
}

TEST_CASE("Weyl vacuum element matches the Gaussian closed form") {
  // <0| W(x1, x2) |0> = exp(-(x1^2 + x2^2)/4); frozen at (1, 0)
  TruncatedOperator w = weyl_operator(64, 1.0, 0.0);
  CHECK(std::abs(w(0, 0) - 0.7788007830714049) < 1e-8);
  TruncatedOperator w2 = weyl_operator(64, 0.6, -0.8);
  CHECK(std::abs(w2(0, 0) - std::exp(-0.25)) < 1e-8);
}
