#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fluctlim/convergence.hpp"
#include "fluctlim/states.hpp"

using namespace fluctlim;

TEST_CASE("log-log fit on an exact power law") {
  std::vector<double> sizes = {16, 32, 64, 128, 256};
  std::vector<double> errors;
  for (double m : sizes) errors.push_back(3.0 / m);
  auto fit = fit_loglog(sizes, errors);
  REQUIRE(fit.has_value());
  CHECK(std::abs(fit->slope + 1.0) < 1e-12);
  CHECK(std::abs(fit->intercept - std::log(3.0)) < 1e-12);
  CHECK(fit->residual < 1e-12);
  CHECK(fit->points == 5);
}

TEST_CASE("log-log fit exclusions") {
  // zero errors carry no rate information and drop out
  std::vector<double> sizes = {16, 32, 64, 128, 256};
  std::vector<double> errors = {3.0 / 16, 0.0, 3.0 / 64, 3.0 / 128,
                                3.0 / 256};
  auto fit = fit_loglog(sizes, errors);
  REQUIRE(fit.has_value());
  CHECK(fit->points == 4);
  CHECK(std::abs(fit->slope + 1.0) < 1e-12);

  // fewer than 4 informative pairs: no fit
  CHECK(!fit_loglog({16, 32, 64}, {0.1, 0.05, 0.025}).has_value());
  // degenerate abscissa: no fit
  CHECK(!fit_loglog({8, 8, 8, 8}, {0.1, 0.1, 0.1, 0.1}).has_value());
  CHECK_THROWS_AS(fit_loglog({1, 2}, {1}), std::invalid_argument);
}

TEST_CASE("static sweep reproduces the 2/M law") {
  TruncatedOperator rho = make_state_preset("fock:2");
  Observable num = Observable::ladder_word("ad a");
  std::vector<long> ms = {16, 32, 64, 128};
  ConvergenceReport report =
      sweep(rho, 1.0, num, std::nullopt, std::nullopt, ms, {});
  REQUIRE(report.rows.size() == 4);
  CHECK(report.pass);
  REQUIRE(report.fit.has_value());
  CHECK(std::abs(report.fit->slope + 1.0) < 1e-10);
  for (std::size_t k = 0; k < ms.size(); ++k) {
    CHECK(report.rows[k].status == "ok");
    CHECK(std::abs(report.rows[k].abs_error - 2.0 / ms[k]) < 1e-12);
  }
  CHECK(std::abs(report.limit - Complex(2.0, 0.0)) < 1e-14);
}

TEST_CASE("sweeps are deterministic across thread counts") {
  TruncatedOperator rho = make_state_preset("fock:2");
  Observable num = Observable::ladder_word("ad a");
  std::vector<long> ms = {16, 32, 64, 128, 256};
  SweepOptions serial;
  serial.threads = 1;
  SweepOptions parallel;
  parallel.threads = 4;
  ConvergenceReport a = sweep(rho, 1.0, num, std::nullopt, std::nullopt, ms,
                              serial);
  ConvergenceReport b = sweep(rho, 1.0, num, std::nullopt, std::nullopt, ms,
                              parallel);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    CHECK(a.rows[k].finite.real() == b.rows[k].finite.real());
    CHECK(a.rows[k].finite.imag() == b.rows[k].finite.imag());
    CHECK(a.rows[k].abs_error == b.rows[k].abs_error);
  }
}

TEST_CASE("sweep surfaces projection failures and aborts the fit") {
  TruncatedOperator rho = make_state_preset("fock:2");
  Observable num = Observable::ladder_word("ad a");
  // lambda M rounds to twoJ = 0 everywhere, annihilating psi_2
  ConvergenceReport report = sweep(rho, 0.005, num, std::nullopt,
                                   std::nullopt, {16, 32, 64, 128}, {});
  CHECK(!report.pass);
  CHECK(report.failure.find("fewer than 4 valid rows") != std::string::npos);
  for (const ReportRow& row : report.rows)
    CHECK(row.status == "projection_annihilates");
}

TEST_CASE("sweep input validation") {
  TruncatedOperator rho = make_state_preset("fock:1");
  Observable num = Observable::ladder_word("ad a");
  CHECK_THROWS_AS(sweep(rho, 1.0, num, std::nullopt, std::nullopt, {}, {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      sweep(rho, 1.0, num, std::nullopt, std::nullopt, {32, 16}, {}),
      std::invalid_argument);
  CHECK_THROWS_AS(sweep(rho, 1.0, num, harmonic_hamiltonian(), std::nullopt,
                        {16, 32, 64, 128}, {}),
                  std::invalid_argument);
}

TEST_CASE("bound report bookkeeping") {
  BoundReport report;
  report.name = "manual";
  CHECK(!report.pass());  // empty reports prove nothing
  report.checks.push_back({"fine", 1.0, 2.0, 10});
  CHECK(report.pass());
  CHECK(std::abs(report.worst_slack() - 1.0) < 1e-15);
  report.checks.push_back({"violated", 1.0, 0.5, 10});
  CHECK(!report.pass());
}

TEST_CASE("beta bound suite") {
  BoundReport report = verify_beta_bound();
  CHECK(report.pass());
  CHECK(report.checks.size() == 5);
  CHECK(report.worst_slack() >= tol::slack);
}

TEST_CASE("ladder word growth suite") {
  BoundReport report = verify_hermite_growth();
  CHECK(report.pass());
  CHECK(report.checks.size() == 6);
}

TEST_CASE("word-power bound suite on both generators") {
  CHECK(verify_csek().pass());
  // number-conserving coefficients: H^m psi_n has norm at most n^m, far
  // below the certified right-hand side
  CHECK(verify_csek(harmonic_hamiltonian()).pass());
}

TEST_CASE("tail decay suite") {
  CHECK(verify_tail_decay().pass());
  // the harmonic generator conserves the level, so the spillover vanishes
  CHECK(verify_tail_decay(harmonic_hamiltonian()).pass());
  // the gate on 32 |t| cmax < 1/4 is enforced
  CHECK_THROWS_AS(verify_tail_decay(squeezing_hamiltonian(), {{{-1}}}, 0.05),
                  std::invalid_argument);
}

TEST_CASE("uniform bound suite, exactly solvable corner") {
  // t = 0, S = (a), p = 1 at the limit point x = 1: the weighted word is a
  // partial isometry and the top singular value is exactly 1
  BoundReport report = verify_uniform_operator_bound(
      squeezing_hamiltonian(), {{{-1}}}, 0.0, {0}, {1.0});
  REQUIRE(report.checks.size() == 1);
  CHECK(std::abs(report.checks[0].lhs - 1.0) < 1e-9);
  CHECK(report.pass());

  // empty word with an explicit weight power: norm is (0 + p)^{-p/2}
  BoundReport weighted = verify_uniform_operator_bound(
      squeezing_hamiltonian(), {{{}}}, 0.0, {0}, {1.0}, 3);
  REQUIRE(weighted.checks.size() == 1);
  CHECK(std::abs(weighted.checks[0].lhs - std::pow(3.0, -1.5)) < 1e-9);

  CHECK_THROWS_AS(
      verify_uniform_operator_bound(squeezing_hamiltonian(), {{{-1}}}, 0.2),
      std::invalid_argument);
}

TEST_CASE("strong convergence suite") {
  BoundReport report = verify_strong_convergence();
  CHECK(report.pass());
  CHECK(!report.checks.empty());
  CHECK_THROWS_AS(verify_strong_convergence({{{}}}), std::invalid_argument);
}
