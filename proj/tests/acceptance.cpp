// Acceptance gate: eight quantitative criteria, one pass/fail line each.
// Every tolerance is pinned here, not read from configuration.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fluctlim/convergence.hpp"
#include "fluctlim/dynamics.hpp"
#include "fluctlim/moments.hpp"
#include "fluctlim/qubit_space.hpp"
#include "fluctlim/states.hpp"

using namespace fluctlim;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool report(int n, const char* what, bool ok, double secs, double budget,
            const std::string& extra) {
  const bool in_budget = secs <= budget;
  std::printf("[%s] criterion %d: %s (%.2fs/%.0fs)%s%s\n",
              ok && in_budget ? "PASS" : "FAIL", n, what, secs, budget,
              extra.empty() ? "" : " | ", extra.c_str());
  if (ok && !in_budget) std::printf("       exceeded the time budget\n");
  return ok && in_budget;
}

std::vector<long> all_sizes(long lo, long hi) {
  std::vector<long> ms;
  for (long m = lo; m <= hi; ++m) ms.push_back(m);
  return ms;
}

// 1. Static convergence: |psi_2>, lambda 1, a*a: error exactly 2/M.
bool criterion_static() {
  const auto start = Clock::now();
  TruncatedOperator rho = make_state_preset("fock:2");
  Observable num = Observable::ladder_word("ad a");
  SweepOptions options;
  options.expected_slope = -1.0;
  options.slope_tol = 0.02;
  options.threads = 4;
  ConvergenceReport rep = sweep(rho, 1.0, num, std::nullopt, std::nullopt,
                                all_sizes(16, 4096), options);
  bool ok = rep.pass;
  double worst = 0.0;
  for (const ReportRow& row : rep.rows) {
    if (row.status != "ok") ok = false;
    worst = std::max(worst,
                     std::abs(row.abs_error - 2.0 / double(row.qubits)));
  }
  ok = ok && worst <= 1e-12;
  char extra[128];
  std::snprintf(extra, sizeof(extra), "slope=%.6f max|err-2/M|=%.2e",
                rep.fit ? rep.fit->slope : 0.0, worst);
  return report(1, "static 2/M law", ok, seconds_since(start), 10.0, extra);
}

// 2. Commutator residual of single-block vacua: |r| <= 2/M, zero on even
// integer lambda M.
bool criterion_commutator() {
  const auto start = Clock::now();
  TruncatedOperator vac = make_state_preset("fock:0");
  bool ok = true;
  double worst_scaled = 0.0;
  long exact_zero = 0, exact_expected = 0;
  for (double lambda : {0.25, 0.5, 1.0}) {
    for (long m = 16; m <= 4096; ++m) {
      PermInvariantState state =
          single_block_sequence(vac, lambda, static_cast<int>(m));
      const Complex r = commutator_residual(state, lambda);
      const double mag = std::abs(r);
      worst_scaled = std::max(worst_scaled, mag * double(m) / 2.0);
      if (mag > 2.0 / double(m)) ok = false;
      const double lm = lambda * double(m);
      if (lm == std::floor(lm) && std::fmod(lm, 2.0) == 0.0) {
        ++exact_expected;
        if (r == Complex(0.0, 0.0)) ++exact_zero;
      }
    }
  }
  ok = ok && exact_zero == exact_expected;
  char extra[128];
  std::snprintf(extra, sizeof(extra),
                "max M|r|/2=%.3f exact-zeros=%ld/%ld", worst_scaled,
                exact_zero, exact_expected);
  return report(2, "commutator residual", ok, seconds_since(start), 5.0,
                extra);
}

// 3. Dynamic convergence under the number generator, closed-form target.
bool criterion_dynamics() {
  const auto start = Clock::now();
  TruncatedOperator rho = make_state_preset("superposition:1,1");
  Observable a = Observable::ladder_word("a");
  SweepOptions options;
  options.expected_slope = -1.0;
  options.slope_tol = 0.1;
  options.threads = 4;
  ConvergenceReport rep = sweep(rho, 0.5, a, harmonic_hamiltonian(), 0.02,
                                all_sizes(16, 4096), options);
  bool ok = rep.pass && !rep.beyond_t0;
  double worst_scaled = 0.0;
  for (const ReportRow& row : rep.rows) {
    if (row.status != "ok") ok = false;
    worst_scaled =
        std::max(worst_scaled, row.abs_error * double(row.qubits) / 2.0);
  }
  ok = ok && worst_scaled <= 1.0;
  // the limit itself has a closed form: (1/2) sqrt(lambda) e^{-i t lambda}
  const Complex closed =
      0.5 * std::sqrt(0.5) * std::exp(Complex(0.0, -0.02 * 0.5));
  ok = ok && std::abs(rep.limit - closed) < 1e-12;
  char extra[128];
  std::snprintf(extra, sizeof(extra), "slope=%.4f max M|err|/2=%.3f",
                rep.fit ? rep.fit->slope : 0.0, worst_scaled);
  return report(3, "dynamic closed form", ok, seconds_since(start), 60.0,
                extra);
}

// 4. Second moments of the squeezed vacuum against the classical flow.
bool criterion_flow() {
  const auto start = Clock::now();
  const QuadraticHamiltonian c = squeezing_hamiltonian();
  const double t = 0.05;
  TruncatedOperator vac = make_state_preset("fock:0");
  const Complex q2 =
      expectation_limit(vac, 1.0, Observable::canonical_word("q q"), c, t);
  const Complex p2 =
      expectation_limit(vac, 1.0, Observable::canonical_word("p p"), c, t);
  const Eigen::Matrix2d flow = classical_flow(c, 1.0, t);
  Eigen::Matrix2d sigma = flow * (0.5 * Eigen::Matrix2d::Identity()) *
                          flow.transpose();
  bool ok = std::abs(flow(0, 0) - std::exp(-t)) < 1e-12 &&
            std::abs(flow(1, 1) - std::exp(t)) < 1e-12 &&
            std::abs(flow(0, 1)) < 1e-12 && std::abs(flow(1, 0)) < 1e-12;
  const double dq = std::abs(q2 - Complex(sigma(0, 0), 0.0));
  const double dp = std::abs(p2 - Complex(sigma(1, 1), 0.0));
  ok = ok && dq <= 1e-6 && dp <= 1e-6;
  char extra[128];
  std::snprintf(extra, sizeof(extra), "|dQ2|=%.2e |dP2|=%.2e", dq, dp);
  return report(4, "squeezing flow transport", ok, seconds_since(start), 5.0,
                extra);
}

// 5. Block-picture expectations against dense tensor-product arithmetic.
bool criterion_oracle() {
  const auto start = Clock::now();
  const std::vector<OperatorWord> words = default_short_words(4);
  const double lambdas[3] = {0.0, 0.5, 1.0};
  bool ok = true;
  double worst = 0.0;
  for (int m = 1; m <= 8; ++m) {
    for (int li = 0; li < 3; ++li) {
      const double lambda = lambdas[li];
      const TruncatedOperator f1 =
          fluctuation_operator_full(pauli(1), lambda, m);
      const TruncatedOperator f2 =
          fluctuation_operator_full(pauli(2), lambda, m);
      const TruncatedOperator lower = 0.5 * (f1 + Complex(0.0, 1.0) * f2);
      const TruncatedOperator raise = lower.adjoint();
      std::vector<TruncatedOperator> mats;
      mats.reserve(words.size());
      for (const OperatorWord& word : words)
        mats.push_back(word_matrix(word, lower, raise));
      for (int s = 0; s < 20; ++s) {
        const std::uint64_t seed = 12345u + ((m * 31u + li) * 131u + s);
        TruncatedOperator rho_full = random_symmetrized_state(m, seed);
        PermInvariantState state = brute_force_decompose(rho_full, m);
        for (std::size_t w = 0; w < words.size(); ++w) {
          const Complex full = (rho_full * mats[w]).trace();
          Observable obs;
          obs.ladder.terms.push_back({Complex(1.0, 0.0), words[w]});
          const Complex block = expectation_finite(state, obs);
          const double diff = std::abs(full - block);
          worst = std::max(worst, diff);
          if (diff > 1e-9) ok = false;
        }
      }
    }
  }
  char extra[64];
  std::snprintf(extra, sizeof(extra), "max|block-full|=%.2e", worst);
  return report(5, "brute-force oracle", ok, seconds_since(start), 60.0,
                extra);
}

// 6. The five inequality suites on their default grids.
bool criterion_bounds() {
  const auto start = Clock::now();
  bool ok = true;
  std::string extra;
  const BoundReport reports[] = {
      verify_beta_bound(), verify_hermite_growth(), verify_csek(),
      verify_tail_decay(), verify_uniform_operator_bound()};
  for (const BoundReport& rep : reports) {
    const bool suite_ok = rep.pass() && rep.worst_slack() >= -1e-15;
    ok = ok && suite_ok;
    char piece[96];
    std::snprintf(piece, sizeof(piece), "%s%s=%.1e", extra.empty() ? "" : " ",
                  rep.name.c_str(), rep.worst_slack());
    extra += piece;
  }
  return report(6, "inequality suites", ok, seconds_since(start), 120.0,
                extra);
}

// 7. Schwartz-class diagnostics on closed-form cases.
bool criterion_schwartz() {
  const auto start = Clock::now();
  TruncatedOperator vac = make_state_preset("fock:0");
  const double seminorm = schwartz_seminorm(vac, 0, 0, 1, 1);
  const Complex cf = characteristic_function(vac, 1.0, 0.0);
  bool ok = std::abs(seminorm - 0.5) <= 1e-10 &&
            std::abs(cf - Complex(std::exp(-0.25), 0.0)) <= 1e-6;
  const TruncatedOperator probes[] = {make_state_preset("fock:3"),
                                      make_state_preset("superposition:1,1"),
                                      make_state_preset("coherent:0.8,0.3")};
  for (const TruncatedOperator& probe : probes)
    for (int k = 0; k <= 6; ++k)
      ok = ok && std::isfinite(decay_sup(probe, k));
  char extra[96];
  std::snprintf(extra, sizeof(extra), "seminorm=%.12f |cf-target|=%.2e",
                seminorm, std::abs(cf - Complex(std::exp(-0.25), 0.0)));
  return report(7, "Schwartz diagnostics", ok, seconds_since(start), 10.0,
                extra);
}

// 8. Byte-identical CSV output across thread counts, through the real CLI.
bool criterion_determinism() {
  const auto start = Clock::now();
  const fs::path dir =
      fs::temp_directory_path() / "fluctlim_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path config = dir / "config.json";
  {
    std::ofstream out(config, std::ios::binary);
    out << R"({
  "kind": "moments",
  "state": "fock:2",
  "lambda": 1.0,
  "M": {"from": 16, "to": 1024, "step": 3},
  "observable": {"terms": [{"word": "ad a"}]}
})";
  }
  auto run = [&](const char* tag, int threads) {
    std::ostringstream cmd;
    cmd << FLUCTLIM_CLI_PATH << " run " << config.string() << " --output "
        << (dir / tag).string() << " --threads " << threads
        << " > /dev/null 2>&1";
    return std::system(cmd.str().c_str()) == 0;
  };
  bool ok = run("serial", 1) && run("parallel", 8);
  std::string a, b;
  if (ok) {
    auto slurp = [](const fs::path& p) {
      std::ifstream in(p, std::ios::binary);
      std::ostringstream buffer;
      buffer << in.rdbuf();
      return buffer.str();
    };
    a = slurp(dir / "serial" / "results.csv");
    b = slurp(dir / "parallel" / "results.csv");
    ok = !a.empty() && a == b;
  }
  fs::remove_all(dir);
  char extra[64];
  std::snprintf(extra, sizeof(extra), "bytes=%zu identical=%s", a.size(),
                ok ? "yes" : "no");
  return report(8, "CLI determinism", ok, seconds_since(start), 60.0, extra);
}

}  // namespace

int main() {
  bool ok = true;
  ok &= criterion_static();
  ok &= criterion_commutator();
  ok &= criterion_dynamics();
  ok &= criterion_flow();
  ok &= criterion_oracle();
  ok &= criterion_bounds();
  ok &= criterion_schwartz();
  ok &= criterion_determinism();
  std::printf("%s\n", ok ? "acceptance: all criteria passed"
                         : "acceptance: FAILURES above");
  return ok ? 0 : 1;
}
