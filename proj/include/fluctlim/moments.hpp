#ifndef FLUCTLIM_MOMENTS_HPP
#define FLUCTLIM_MOMENTS_HPP

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fluctlim/common.hpp"
#include "fluctlim/dynamics.hpp"
#include "fluctlim/fock.hpp"
#include "fluctlim/qubit_space.hpp"
#include "fluctlim/spin_blocks.hpp"
#include "fluctlim/states.hpp"

namespace fluctlim {

// A product of ladder letters, applied left to right: (+1, -1) is a* a.
struct OperatorWord {
  std::vector<int> letters;  // +1 creator, -1 annihilator

  int degree() const { return static_cast<int>(letters.size()); }
};

// A product of quadrature letters 'q' and 'p'.
struct CanonicalWord {
  std::vector<char> letters;

  int degree() const { return static_cast<int>(letters.size()); }
};

// "ad a ad a" -> a* a a* a
inline OperatorWord parse_ladder_word(const std::string& text) {
  OperatorWord word;
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    if (token == "ad")
      word.letters.push_back(+1);
    else if (token == "a")
      word.letters.push_back(-1);
    else
      throw std::invalid_argument("ladder word: unknown token '" + token +
                                  "' (expected 'a' or 'ad')");
  }
  return word;
}

// "q q p" -> Q Q P
inline CanonicalWord parse_canonical_word(const std::string& text) {
  CanonicalWord word;
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    if (token == "q" || token == "p")
      word.letters.push_back(token[0]);
    else
      throw std::invalid_argument("canonical word: unknown token '" + token +
                                  "' (expected 'q' or 'p')");
  }
  return word;
}

inline TruncatedOperator word_matrix(const OperatorWord& word,
                                     const TruncatedOperator& annihilator,
                                     const TruncatedOperator& creator) {
  TruncatedOperator out =
      TruncatedOperator::Identity(annihilator.rows(), annihilator.cols());
  for (int letter : word.letters)
    out = out * (letter > 0 ? creator : annihilator);
  return out;
}

inline TruncatedOperator word_matrix(const CanonicalWord& word,
                                     const TruncatedOperator& position,
                                     const TruncatedOperator& momentum) {
  TruncatedOperator out =
      TruncatedOperator::Identity(position.rows(), position.cols());
  for (char letter : word.letters)
    out = out * (letter == 'q' ? position : momentum);
  return out;
}

template <typename Word>
struct Polynomial {
  struct Term {
    Complex coeff;
    Word word;
  };
  std::vector<Term> terms;

  int degree() const {
    int d = 0;
    for (const Term& t : terms) d = std::max(d, t.word.degree());
    return d;
  }
};

using LadderPolynomial = Polynomial<OperatorWord>;
using CanonicalPolynomial = Polynomial<CanonicalWord>;

inline TruncatedOperator polynomial_matrix(const CanonicalPolynomial& poly,
                                           const TruncatedOperator& position,
                                           const TruncatedOperator& momentum) {
  TruncatedOperator out =
      TruncatedOperator::Zero(position.rows(), position.cols());
  for (const auto& term : poly.terms)
    out += term.coeff * word_matrix(term.word, position, momentum);
  return out;
}

inline TruncatedOperator polynomial_matrix(const LadderPolynomial& poly,
                                           const TruncatedOperator& annihilator,
                                           const TruncatedOperator& creator) {
  TruncatedOperator out =
      TruncatedOperator::Zero(annihilator.rows(), annihilator.cols());
  for (const auto& term : poly.terms)
    out += term.coeff * word_matrix(term.word, annihilator, creator);
  return out;
}

// An observable in either alphabet, with a printable description.
struct Observable {
  enum class Alphabet { ladder, canonical };

  Alphabet alphabet = Alphabet::ladder;
  LadderPolynomial ladder;
  CanonicalPolynomial canonical;

  int degree() const {
    return alphabet == Alphabet::ladder ? ladder.degree()
                                        : canonical.degree();
  }

  static Observable ladder_word(const std::string& text) {
    Observable obs;
    obs.alphabet = Alphabet::ladder;
    obs.ladder.terms.push_back({Complex(1.0, 0.0), parse_ladder_word(text)});
    return obs;
  }

  static Observable canonical_word(const std::string& text) {
    Observable obs;
    obs.alphabet = Alphabet::canonical;
    obs.canonical.terms.push_back(
        {Complex(1.0, 0.0), parse_canonical_word(text)});
    return obs;
  }

  std::string description() const {
    auto word_text = [&](std::size_t i) {
      std::string out;
      if (alphabet == Alphabet::ladder) {
        for (int letter : ladder.terms[i].word.letters) {
          if (!out.empty()) out += ' ';
          out += letter > 0 ? "ad" : "a";
        }
      } else {
        for (char letter : canonical.terms[i].word.letters) {
          if (!out.empty()) out += ' ';
          out += letter;
        }
      }
      return out.empty() ? std::string("1") : out;
    };
    const std::size_t count = alphabet == Alphabet::ladder
                                  ? ladder.terms.size()
                                  : canonical.terms.size();
    std::string out;
    for (std::size_t i = 0; i < count; ++i) {
      Complex coeff = alphabet == Alphabet::ladder ? ladder.terms[i].coeff
                                                   : canonical.terms[i].coeff;
      if (!out.empty()) out += " + ";
      if (coeff != Complex(1.0, 0.0)) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "(%g%+gi) ", coeff.real(),
                      coeff.imag());
        out += buf;
      }
      out += word_text(i);
    }
    return out;
  }
};

// Observable matrix over a given ladder pair; canonical letters are the
// quadratures of that same pair.
inline TruncatedOperator observable_matrix(const Observable& obs,
                                           const TruncatedOperator& annihilator,
                                           const TruncatedOperator& creator) {
  if (obs.alphabet == Observable::Alphabet::ladder)
    return polynomial_matrix(obs.ladder, annihilator, creator);
  TruncatedOperator position = (annihilator + creator) / std::sqrt(2.0);
  TruncatedOperator momentum =
      (annihilator - creator) / (Complex(0.0, 1.0) * std::sqrt(2.0));
  return polynomial_matrix(obs.canonical, position, momentum);
}

// Expectation of the observable in a permutation-invariant state, evaluated
// sector by sector through the deformed ladder pair at the sector coordinate
// x_j, optionally after evolving each sector with its own Hamiltonian. The
// static path is exact; the dynamic path grows the working window until the
// evolved tail mass settles (reaching the full sector dimension is exact).
inline Complex expectation_finite(
    const PermInvariantState& state, const Observable& obs,
    std::optional<QuadraticHamiltonian> c = std::nullopt,
    std::optional<double> t = std::nullopt, int dmax = default_dmax) {
  if (c.has_value() != t.has_value())
    throw std::invalid_argument(
        "expectation_finite: Hamiltonian and time must come together");
  const int deg = obs.degree();
  Complex total(0.0, 0.0);
  for (const SpinBlock& block : state.blocks) {
    const long m = block.index.qubits;
    const double x = block.index.x();
    const int sector_dim = block.index.two_j + 1;
    const int stored = static_cast<int>(block.density.rows());
    TruncatedOperator evolved;
    int window;
    if (!c) {
      window = std::min(sector_dim, stored + deg + 1);
      evolved = pad_to(block.density, window);
    } else {
      window = std::min(sector_dim, std::max(stored + deg + 16, 32));
      for (;;) {
        evolved = evolve_block(pad_to(block.density, window), *c, m, x, *t);
        if (window == sector_dim) break;
        double tail = 0.0;
        for (int n = window - 8; n < window; ++n)
          tail += evolved(n, n).real();
        if (tail < 1e-10) break;
        if (window >= dmax)
          throw TruncationDiverged(
              "expectation_finite: sector window hit the dimension cap");
        window = std::min(sector_dim, window + 16);
      }
      window = static_cast<int>(evolved.rows());
    }
    DeformedLadder dl = deformed_ladder(m, x, window);
    TruncatedOperator o = observable_matrix(obs, dl.annihilator, dl.creator);
    total += block.weight * (evolved * o).trace();
  }
  return total;
}

// Limit-side expectation: the observable is built from the scaled ladder
// pair sqrt(lambda) a, sqrt(lambda) a*, optionally after the limit-side
// evolution exp(-i t lambda H).
inline Complex expectation_limit(
    const TruncatedOperator& rho_inf, double lambda, const Observable& obs,
    std::optional<QuadraticHamiltonian> c = std::nullopt,
    std::optional<double> t = std::nullopt,
    LimitEvolutionInfo* info = nullptr) {
  if (c.has_value() != t.has_value())
    throw std::invalid_argument(
        "expectation_limit: Hamiltonian and time must come together");
  if (!(lambda > 0.0 && lambda <= 1.0))
    throw std::invalid_argument("expectation_limit: lambda outside (0, 1]");
  TruncatedOperator rho = rho_inf;
  if (c) rho = limit_evolution(rho, lambda, *c, *t, info);
  const int window = static_cast<int>(rho.rows()) + obs.degree() + 1;
  CanonicalOperators ops = canonical_operators(window);
  const double root = std::sqrt(lambda);
  TruncatedOperator o = observable_matrix(obs, root * ops.annihilator,
                                          root * ops.creator);
  return (pad_to(rho, window) * o).trace();
}

// Mean-field fluctuation operator F_M(A) = (1/sqrt(M)) sum_i (A^(i) -
// Tr(A theta) 1) as a dense 2^M matrix; brute-force oracle only.
inline TruncatedOperator fluctuation_operator_full(const Eigen::Matrix2cd& a,
                                                   double lambda, int m) {
  if (hermiticity_defect(a) > tol::tight)
    throw std::invalid_argument(
        "fluctuation_operator_full: A is not Hermitian");
  validate_reference(ReferenceState{lambda});
  const double mean = (a * ReferenceState{lambda}.theta()).trace().real();
  const double root = std::sqrt(static_cast<double>(m));
  TruncatedOperator out = site_sum(a, m) / root;
  out -= (root * mean) *
         TruncatedOperator::Identity(qubit_dim(m), qubit_dim(m));
  return out;
}

// Tr(rho_M [Q_M, P_M]) - i lambda, evaluated sector by sector through the
// closed form [Q_M, P_M] = 2 i L3 / M.
inline Complex commutator_residual(const PermInvariantState& state,
                                   double lambda) {
  validate_reference(ReferenceState{lambda});
  double l3 = 0.0;
  for (const SpinBlock& block : state.blocks) {
    const double j = 0.5 * block.index.two_j;
    double sector = 0.0;
    for (Eigen::Index n = 0; n < block.density.rows(); ++n)
      sector += (j - static_cast<double>(n)) * block.density(n, n).real();
    l3 += block.weight * sector;
  }
  const double m = state.qubits;
  return Complex(0.0, 2.0 * l3 / m - lambda);
}

}  // namespace fluctlim

#endif
