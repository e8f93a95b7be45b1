#ifndef FLUCTLIM_STATES_HPP
#define FLUCTLIM_STATES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fluctlim/common.hpp"
#include "fluctlim/fock.hpp"
#include "fluctlim/qubit_space.hpp"
#include "fluctlim/spin_blocks.hpp"

namespace fluctlim {

// One-qubit reference state theta = diag((1+lambda)/2, (1-lambda)/2);
// lambda = Tr(theta sigma3) is the polarisation and plays the role of an
// effective Planck constant on the limit side.
struct ReferenceState {
  double lambda = 1.0;

  Eigen::Matrix2cd theta() const {
    Eigen::Matrix2cd t;
    t << 0.5 * (1.0 + lambda), 0.0, 0.0, 0.5 * (1.0 - lambda);
    return t;
  }
};

inline void validate_reference(const ReferenceState& ref) {
  if (!(ref.lambda >= 0.0 && ref.lambda <= 1.0))
    throw std::invalid_argument("ReferenceState: lambda outside [0, 1]");
}

struct SpinBlock {
  BlockIndex index;
  double weight = 0.0;
  TruncatedOperator density;  // dim <= twoJ + 1 (top of the sector unused)
  int capped_dim = 0;
};

struct PermInvariantState {
  int qubits = 0;
  std::vector<SpinBlock> blocks;  // ascending twoJ, no duplicates
};

inline void validate_density(const TruncatedOperator& rho, const char* who,
                             double tolerance = tol::eig) {
  require_hermitian(rho, tolerance, who);
  if (rho.rows() < 1)
    throw std::invalid_argument(std::string(who) + ": empty density");
  if (std::abs(rho.trace().real() - 1.0) > tolerance ||
      std::abs(rho.trace().imag()) > tolerance)
    throw std::invalid_argument(std::string(who) + ": trace is not 1");
  Eigen::SelfAdjointEigenSolver<TruncatedOperator> es(
      rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tolerance)
    throw std::invalid_argument(std::string(who) +
                                ": density has a negative eigenvalue");
}

inline void validate_state(const PermInvariantState& state) {
  if (state.qubits < 1)
    throw std::invalid_argument("PermInvariantState: qubit count < 1");
  if (state.blocks.empty())
    throw std::invalid_argument("PermInvariantState: no blocks");
  double total = 0.0;
  int prev = -1;
  for (const SpinBlock& b : state.blocks) {
    validate_block_index(b.index);
    if (b.index.qubits != state.qubits)
      throw std::invalid_argument("PermInvariantState: block M mismatch");
    if (b.index.two_j <= prev)
      throw std::invalid_argument(
          "PermInvariantState: blocks not in ascending twoJ order");
    prev = b.index.two_j;
    if (b.weight < -tol::tight)
      throw std::invalid_argument("PermInvariantState: negative weight");
    if (b.density.rows() != b.capped_dim ||
        b.capped_dim > b.index.two_j + 1 || b.capped_dim < 1)
      throw std::invalid_argument(
          "PermInvariantState: stored block dimension out of range");
    validate_density(b.density, "PermInvariantState block");
    total += b.weight;
  }
  if (std::abs(total - 1.0) > tol::tight)
    throw std::invalid_argument("PermInvariantState: weights do not sum to 1");
}

struct DiscreteMeasure {
  struct Atom {
    double x = 0.0;
    double mass = 0.0;
  };
  std::vector<Atom> atoms;  // ascending x
};

// The parity-admissible twoJ (same parity as M, within [0, M]) nearest to
// lambda * M; ties resolve to the smaller value.
inline int nearest_admissible_two_j(double lambda, int m) {
  const double target = lambda * m;
  const int parity = m & 1;
  long lo = parity +
            2 * static_cast<long>(std::floor((target - parity) / 2.0));
  long hi = lo + 2;
  long pick = (target - lo <= hi - target) ? lo : hi;
  pick = std::max<long>(pick, parity);
  pick = std::min<long>(pick, m);
  return static_cast<int>(pick);
}

// The single-block M-qubit state that simulates rho_inf: project onto the
// first twoJ+1 levels of the sector nearest to lambda and renormalise.
inline PermInvariantState single_block_sequence(
    const TruncatedOperator& rho_inf, double lambda, int m,
    int dmax = default_dmax) {
  validate_density(rho_inf, "single_block_sequence input");
  if (!(lambda > 0.0 && lambda <= 1.0))
    throw std::invalid_argument(
        "single_block_sequence: lambda outside (0, 1]");
  if (m < 1) throw std::invalid_argument("single_block_sequence: M < 1");
  const int two_j = nearest_admissible_two_j(lambda, m);
  const int stored = static_cast<int>(
      std::min<Eigen::Index>(std::min<Eigen::Index>(two_j + 1, rho_inf.rows()),
                             dmax));
  TruncatedOperator corner = rho_inf.topLeftCorner(stored, stored);
  const double tr = corner.trace().real();
  if (tr < 1e-12) {
    std::ostringstream msg;
    msg << "projection onto the twoJ=" << two_j
        << " sector annihilates the input state (trace " << tr << ")";
    throw ProjectionAnnihilates(msg.str());
  }
  SpinBlock block;
  block.index = BlockIndex{two_j, m};
  block.weight = 1.0;
  block.density = corner / tr;
  block.capped_dim = stored;
  PermInvariantState state;
  state.qubits = m;
  state.blocks.push_back(std::move(block));
  validate_state(state);
  return state;
}

inline DiscreteMeasure measure_of(const PermInvariantState& state) {
  DiscreteMeasure mu;
  for (const SpinBlock& b : state.blocks)
    mu.atoms.push_back({b.index.x(), b.weight});
  return mu;
}

// Piecewise-linear interpolant of a block family over the sector coordinate.
struct IntegralRepresentation {
  std::vector<double> xs;  // strictly increasing
  std::vector<TruncatedOperator> blocks;  // common dimension
};

inline IntegralRepresentation integral_representation(
    const PermInvariantState& state) {
  Eigen::Index dim = 1;
  for (const SpinBlock& b : state.blocks)
    dim = std::max(dim, b.density.rows());
  IntegralRepresentation rep;
  for (const SpinBlock& b : state.blocks) {
    rep.xs.push_back(b.index.x());
    rep.blocks.push_back(pad_to(b.density, dim));
  }
  return rep;
}

// Entrywise linear interpolation between neighbouring grid blocks with the
// trace renormalised; constant extrapolation beyond the grid ends. At a grid
// point the stored block is returned unchanged.
inline TruncatedOperator interpolate_block(const IntegralRepresentation& rep,
                                           double x) {
  if (rep.xs.empty())
    throw std::invalid_argument("interpolate_block: empty representation");
  if (x <= rep.xs.front()) return rep.blocks.front();
  if (x >= rep.xs.back()) return rep.blocks.back();
  auto it = std::lower_bound(rep.xs.begin(), rep.xs.end(), x);
  std::size_t hi = static_cast<std::size_t>(it - rep.xs.begin());
  if (rep.xs[hi] == x) return rep.blocks[hi];
  std::size_t lo = hi - 1;
  const double w = (x - rep.xs[lo]) / (rep.xs[hi] - rep.xs[lo]);
  TruncatedOperator mix = (1.0 - w) * rep.blocks[lo] + w * rep.blocks[hi];
  return mix / mix.trace().real();
}

namespace detail {

// Multiplicities of the spin-twoJ sector of M qubits, by the one-qubit-at-a-
// time angular-momentum addition recursion. Exact in 64-bit integers for
// M <= 64.
inline std::vector<std::int64_t> sector_multiplicities(int m) {
  std::vector<std::int64_t> f(m + 2, 0);
  f[1] = 1;  // one qubit: twoJ = 1
  for (int k = 2; k <= m; ++k) {
    std::vector<std::int64_t> g(m + 2, 0);
    for (int t = k & 1; t <= k; t += 2) {
      std::int64_t v = 0;
      if (t - 1 >= 0) v += f[t - 1];
      if (t + 1 <= m + 1) v += f[t + 1];
      g[t] = v;
    }
    f = std::move(g);
  }
  return f;
}

}  // namespace detail

// Block decomposition of theta^{tensor M}. The sector states are diagonal in
// the weight basis with entries proportional to p^{#up} q^{#down}, because
// the product state acts as a multiple of the identity on every collective
// L3 eigenspace.
inline PermInvariantState product_state(double lambda, int m) {
  validate_reference(ReferenceState{lambda});
  if (m < 1 || m > 64)
    throw std::invalid_argument("product_state: M outside 1..64");
  const double p = 0.5 * (1.0 + lambda);
  const double q = 0.5 * (1.0 - lambda);
  const std::vector<std::int64_t> mult = detail::sector_multiplicities(m);
  PermInvariantState state;
  state.qubits = m;
  for (int two_j = m & 1; two_j <= m; two_j += 2) {
    if (mult[two_j] == 0) continue;
    // #up = (m + two_j)/2 - n, #down = (m - two_j)/2 + n for level n
    std::vector<double> diag(two_j + 1);
    double total = 0.0;
    for (int n = 0; n <= two_j; ++n) {
      const int up = (m + two_j) / 2 - n;
      const int down = (m - two_j) / 2 + n;
      diag[n] = std::pow(p, up) * std::pow(q, down);
      total += diag[n];
    }
    const double weight = static_cast<double>(mult[two_j]) * total;
    if (weight == 0.0) continue;
    SpinBlock block;
    block.index = BlockIndex{two_j, m};
    block.weight = weight;
    block.density = TruncatedOperator::Zero(two_j + 1, two_j + 1);
    for (int n = 0; n <= two_j; ++n) block.density(n, n) = diag[n] / total;
    block.capped_dim = two_j + 1;
    state.blocks.push_back(std::move(block));
  }
  validate_state(state);
  return state;
}

inline std::vector<std::pair<int, double>> product_state_weights(
    double lambda, int m) {
  PermInvariantState state = product_state(lambda, m);
  std::vector<std::pair<int, double>> weights;
  for (const SpinBlock& b : state.blocks)
    weights.emplace_back(b.index.two_j, b.weight);
  return weights;
}

// Exact decomposition of an explicitly given 2^M density into spin sectors.
// Highest-weight vectors are the kernel of the collective raising operator
// within each L3 eigenspace; lowering with the exact ladder normalisation
// generates the adapted basis, and tracing out the multiplicity index gives
// the sector states and weights.
inline PermInvariantState brute_force_decompose(const TruncatedOperator& rho,
                                                int m) {
  if (m < 1 || m > 10)
    throw std::invalid_argument("brute_force_decompose: M outside 1..10");
  const int dim = qubit_dim(m);
  if (rho.rows() != dim || rho.cols() != dim)
    throw std::invalid_argument("brute_force_decompose: dimension mismatch");
  require_hermitian(rho, tol::eig, "brute_force_decompose");
  if (std::abs(rho.trace().real() - 1.0) > tol::eig)
    throw std::invalid_argument("brute_force_decompose: trace is not 1");
  const double defect = permutation_defect(rho, m);
  if (defect > 1e-10) {
    std::ostringstream msg;
    msg << "input deviates from permutation invariance by " << defect;
    throw NotPermutationInvariant(msg.str());
  }

  // Basis indices grouped by popcount c; L3 = (m - 2c)/2 on sector c.
  std::vector<std::vector<int>> sector(m + 1);
  std::vector<int> pos_in_sector(dim, -1);
  for (int b = 0; b < dim; ++b) {
    int c = std::popcount(static_cast<unsigned>(b));
    pos_in_sector[b] = static_cast<int>(sector[c].size());
    sector[c].push_back(b);
  }

  PermInvariantState state;
  state.qubits = m;
  for (int two_j = m; two_j >= (m & 1); two_j -= 2) {
    const int c = (m - two_j) / 2;  // popcount of the highest-weight sector
    const auto& basis = sector[c];
    const int sdim = static_cast<int>(basis.size());

    // Raising map from sector c to sector c-1 (clear one set bit per term).
    Eigen::MatrixXd kernel;  // columns: highest-weight vectors, sector coords
    if (c == 0) {
      kernel = Eigen::MatrixXd::Identity(1, 1);
    } else {
      const auto& above = sector[c - 1];
      Eigen::MatrixXd raise =
          Eigen::MatrixXd::Zero(static_cast<int>(above.size()), sdim);
      for (int col = 0; col < sdim; ++col) {
        int b = basis[col];
        for (int site = 0; site < m; ++site)
          if (site_bit(b, site) == 1)
            raise(pos_in_sector[b ^ (1 << site)], col) += 1.0;
      }
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(raise, Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      int rank = 0;
      const double cut = 1e-9 * std::max(1.0, sv.size() ? sv(0) : 0.0);
      for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++rank;
      kernel = svd.matrixV().rightCols(sdim - rank);
    }

    const int mult = static_cast<int>(kernel.cols());
    if (mult == 0) continue;

    // Adapted basis columns for each multiplicity copy, as full-space
    // vectors: psi_{n+1} = L- psi_n / sqrt((twoJ - n)(n + 1)).
    TruncatedOperator acc = TruncatedOperator::Zero(two_j + 1, two_j + 1);
    double weight = 0.0;
    for (int k = 0; k < mult; ++k) {
      Eigen::MatrixXcd chain(dim, two_j + 1);
      chain.setZero();
      for (int i = 0; i < sdim; ++i) chain(basis[i], 0) = kernel(i, k);
      for (int n = 0; n + 1 <= two_j; ++n) {
        // apply L- (set one clear bit per term)
        Vector next = Vector::Zero(dim);
        for (int b = 0; b < dim; ++b) {
          Complex v = chain(b, n);
          if (v == Complex(0, 0)) continue;
          for (int site = 0; site < m; ++site)
            if (site_bit(b, site) == 0) next(b | (1 << site)) += v;
        }
        chain.col(n + 1) =
            next / std::sqrt(static_cast<double>(two_j - n) * (n + 1));
      }
      TruncatedOperator slice = chain.adjoint() * rho * chain;
      acc += slice;
      weight += slice.trace().real();
    }
    if (weight <= 1e-13) continue;
    SpinBlock block;
    block.index = BlockIndex{two_j, m};
    block.weight = weight;
    block.density = acc / weight;
    block.capped_dim = two_j + 1;
    state.blocks.push_back(std::move(block));
  }
  std::reverse(state.blocks.begin(), state.blocks.end());
  validate_state(state);
  return state;
}

// Schwartz-type seminorm || P^alpha Q^beta rho Q^beta' P^alpha' ||_1,
// evaluated on a span padded enough to make the sandwich exact.
inline double schwartz_seminorm(const TruncatedOperator& rho, int alpha,
                                int alpha_p, int beta_idx, int beta_p) {
  if (alpha < 0 || alpha_p < 0 || beta_idx < 0 || beta_p < 0)
    throw std::invalid_argument("schwartz_seminorm: negative index");
  const Eigen::Index dim =
      rho.rows() + alpha + alpha_p + beta_idx + beta_p + 2;
  CanonicalOperators ops = canonical_operators(static_cast<int>(dim));
  TruncatedOperator padded = pad_to(rho, dim);
  TruncatedOperator sandwich = matrix_power(ops.momentum, alpha) *
                               matrix_power(ops.position, beta_idx) * padded *
                               matrix_power(ops.position, beta_p) *
                               matrix_power(ops.momentum, alpha_p);
  return trace_norm(sandwich);
}

// sup over stored entries of |rho_{nm}| (n+m)^k, with (n+m)^0 = 1 at the
// origin.
inline double decay_sup(const TruncatedOperator& rho, int k) {
  if (k < 0) throw std::invalid_argument("decay_sup: negative exponent");
  double sup = 0.0;
  for (Eigen::Index n = 0; n < rho.rows(); ++n)
    for (Eigen::Index mcol = 0; mcol < rho.cols(); ++mcol) {
      double scale =
          (n + mcol == 0) ? 1.0
                          : std::pow(static_cast<double>(n + mcol), k);
      sup = std::max(sup, std::abs(rho(n, mcol)) * scale);
    }
  return sup;
}

// Tr(rho W(x1, x2)) with the working dimension padded by tens until the
// value settles below 1e-8; diverging padding is an error.
inline Complex characteristic_function(const TruncatedOperator& rho,
                                       double x1, double x2) {
  constexpr int cap = 512;
  const int start = static_cast<int>(rho.rows());
  auto value_at = [&](int dim) {
    TruncatedOperator w = weyl_operator(dim, x1, x2);
    return (pad_to(rho, dim) * w).trace();
  };
  if (start + 10 > cap)
    throw PaddingDiverged(
        "characteristic_function: state too large for the padding cap");
  Complex prev = value_at(start);
  for (int dim = start + 10; dim <= cap; dim += 10) {
    Complex cur = value_at(dim);
    if (std::abs(cur - prev) < 1e-8) return cur;
    prev = cur;
  }
  throw PaddingDiverged(
      "characteristic_function: value failed to settle by dimension 512");
}

// --- State presets ----------------------------------------------------

// Densities addressable by name: "fock:n", "superposition:c0,c1,...",
// "coherent:re,im", "thermal:nbar:D".
inline TruncatedOperator make_state_preset(const std::string& spec) {
  auto bad = [&](const std::string& why) {
    return std::invalid_argument("state preset '" + spec + "': " + why);
  };
  auto split = [](const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    return out;
  };
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw bad("missing ':'");
  const std::string kind = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);
  auto parse_num = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      double v = std::stod(s, &used);
      if (used != s.size()) throw bad("trailing characters in number");
      return v;
    } catch (const std::invalid_argument&) {
      throw bad("malformed number '" + s + "'");
    }
  };

  if (kind == "fock") {
    const double nd = parse_num(rest);
    const int n = static_cast<int>(nd);
    if (nd != n || n < 0) throw bad("level must be a nonnegative integer");
    TruncatedOperator rho = TruncatedOperator::Zero(n + 1, n + 1);
    rho(n, n) = 1.0;
    return rho;
  }
  if (kind == "superposition") {
    auto parts = split(rest, ',');
    if (parts.empty()) throw bad("no coefficients");
    Vector psi(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i)
      psi(static_cast<Eigen::Index>(i)) = parse_num(parts[i]);
    const double norm = psi.norm();
    if (norm < 1e-14) throw bad("zero vector");
    psi /= norm;
    return psi * psi.adjoint();
  }
  if (kind == "coherent") {
    auto parts = split(rest, ',');
    if (parts.size() != 2) throw bad("expected re,im");
    const Complex alpha(parse_num(parts[0]), parse_num(parts[1]));
    const double a2 = std::norm(alpha);
    const int dim = std::max(24, static_cast<int>(std::ceil(
                                     a2 + 8.0 * std::sqrt(a2 + 1.0) + 8.0)));
    Vector psi(dim);
    psi(0) = 1.0;
    for (int n = 1; n < dim; ++n)
      psi(n) = psi(n - 1) * alpha / std::sqrt(static_cast<double>(n));
    psi /= psi.norm();  // truncated and renormalised
    return psi * psi.adjoint();
  }
  if (kind == "thermal") {
    auto parts = split(rest, ':');
    if (parts.size() != 2) throw bad("expected nbar:D");
    const double nbar = parse_num(parts[0]);
    const double dd = parse_num(parts[1]);
    const int dim = static_cast<int>(dd);
    if (nbar < 0) throw bad("nbar must be nonnegative");
    if (dd != dim || dim < 1) throw bad("D must be a positive integer");
    TruncatedOperator rho = TruncatedOperator::Zero(dim, dim);
    const double ratio = nbar / (1.0 + nbar);
    double total = 0.0, term = 1.0;
    for (int n = 0; n < dim; ++n, term *= ratio) {
      rho(n, n) = term;
      total += term;
    }
    rho /= total;
    return rho;
  }
  throw bad("unknown preset kind '" + kind + "'");
}

struct MatrixElement {
  int n = 0;
  int m = 0;
  Complex value;
};

inline TruncatedOperator make_state_elements(
    const std::vector<MatrixElement>& elements) {
  if (elements.empty())
    throw std::invalid_argument("state elements: empty list");
  int dim = 0;
  for (const MatrixElement& e : elements) {
    if (e.n < 0 || e.m < 0)
      throw std::invalid_argument("state elements: negative index");
    dim = std::max({dim, e.n + 1, e.m + 1});
  }
  TruncatedOperator rho = TruncatedOperator::Zero(dim, dim);
  for (const MatrixElement& e : elements) rho(e.n, e.m) += e.value;
  validate_density(rho, "state elements");
  return rho;
}

}  // namespace fluctlim

#endif
