#ifndef FLUCTLIM_COMMON_HPP
#define FLUCTLIM_COMMON_HPP

#include <atomic>
#include <complex>
#include <exception>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace fluctlim {

inline constexpr const char* version_string = "0.1.0";

using Complex = std::complex<double>;

// An operator truncated to the span of the first D Hermite functions
// psi_0..psi_{D-1}; row/column index n addresses psi_n.
using TruncatedOperator = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Tolerance tiers used throughout the library and its tests:
//   tight - exact algebraic identities evaluated in double precision
//   eig   - quantities mediated by an eigendecomposition
//   loose - iterated products / long accumulations
namespace tol {
inline constexpr double tight = 1e-12;
inline constexpr double eig = 1e-10;
inline constexpr double loose = 1e-8;
// Certified inequalities may go negative only by cancellation noise.
inline constexpr double slack = -1e-15;
}  // namespace tol

class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// Projecting an input state onto the selected spin block leaves trace < 1e-12.
class ProjectionAnnihilates : public Error {
 public:
  explicit ProjectionAnnihilates(const std::string& what)
      : Error("projection_annihilates", what) {}
};

// A 2^M-dimensional input fails the adjacent-transposition invariance check.
class NotPermutationInvariant : public Error {
 public:
  explicit NotPermutationInvariant(const std::string& what)
      : Error("not_permutation_invariant", what) {}
};

// Adaptive truncation for limit-side evolution hit its cap without the
// evolved state's tail mass stabilising.
class TruncationDiverged : public Error {
 public:
  explicit TruncationDiverged(const std::string& what)
      : Error("truncation_diverged", what) {}
};

// Adaptive padding for a characteristic-function value failed to settle.
class PaddingDiverged : public Error {
 public:
  explicit PaddingDiverged(const std::string& what)
      : Error("padding_diverged", what) {}
};

inline double max_abs(const TruncatedOperator& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline double hermiticity_defect(const TruncatedOperator& a) {
  return max_abs(a - a.adjoint());
}

inline void require_hermitian(const TruncatedOperator& a, double tolerance,
                              const char* who) {
  if (a.rows() != a.cols())
    throw std::invalid_argument(std::string(who) + ": matrix is not square");
  if (hermiticity_defect(a) > tolerance)
    throw std::invalid_argument(std::string(who) +
                                ": matrix is not Hermitian within tolerance");
}

// Default cap on any working truncation dimension; the CLI may override it
// through the FLUCTLIM_DMAX environment variable.
inline constexpr int default_dmax = 4097;

inline TruncatedOperator matrix_power(const TruncatedOperator& a, int k) {
  if (k < 0) throw std::invalid_argument("matrix_power: negative exponent");
  TruncatedOperator out = TruncatedOperator::Identity(a.rows(), a.cols());
  for (int i = 0; i < k; ++i) out = out * a;
  return out;
}

// Zero-pad (or return unchanged) to the first `dim` levels.
inline TruncatedOperator pad_to(const TruncatedOperator& a, Eigen::Index dim) {
  if (dim < a.rows())
    throw std::invalid_argument("pad_to: target smaller than source");
  if (dim == a.rows()) return a;
  TruncatedOperator out = TruncatedOperator::Zero(dim, dim);
  out.topLeftCorner(a.rows(), a.cols()) = a;
  return out;
}

// Runs fn(i) for i in [0, count) across at most `threads` workers. Results
// must be written into preallocated per-index slots, which keeps the outcome
// independent of the schedule. The first exception (lowest index) wins.
inline void parallel_for(long count, int threads,
                         const std::function<void(long)>& fn) {
  if (count <= 0) return;
  const int workers = static_cast<int>(
      std::max<long>(1, std::min<long>(static_cast<long>(threads), count)));
  if (workers == 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long> cursor{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const long i = cursor.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (long i = 0; i < count; ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);
}

}  // namespace fluctlim

#endif
