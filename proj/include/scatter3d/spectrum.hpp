#pragma once

// The secular equation of the point scatterer and its interlaced roots.
//
//   F(lambda) = sum_{xi in Z^3} [ 1/(|xi|^2 - lambda) - |xi|^2/(|xi|^4 + 1) ]
//             = c0 * tan(phi / 2),         c0 = sum_{xi} 1/(|xi|^4 + 1).
//
// Sums are grouped by shell, summed exactly up to a cutoff N and completed
// by the continuum integral with density 2*pi*sqrt(t) plus the lattice
// boundary correction (V(N + 1/2) - A(N)) f(N + 1/2), where A counts lattice
// points and V is the ball volume.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "scatter3d/lattice_arith.hpp"
#include "scatter3d/torus.hpp"

namespace scatter3d {

struct ScattererConfig {
  double phi = 0.0;
  TorusPoint x0{};
  std::uint64_t tail_cutoff_nmax = 1'000'000;
  double tol_lambda = 1e-12;

  /// Throws ParameterError unless phi in (-pi, pi) and tol_lambda > 0.
  void validate() const;
};

struct C0Estimate {
  double value = 0.0;
  double tail_error = 0.0;  // |c0(N) - c0(N/2)|
  std::uint64_t nmax = 0;
};

/// c0 with shells up to nmax (>= 1000) and the integral tail. The table must
/// cover nmax.
C0Estimate compute_c0(const R3Table& table, std::uint64_t nmax);
C0Estimate compute_c0(std::uint64_t nmax);

/// The shell summand 1/(n - lambda) - n/(n^2 + 1) written without cancellation.
inline double secular_summand(double n, double lambda) {
  return (1.0 + lambda * n) / ((n - lambda) * (n * n + 1.0));
}

/// F(lambda) evaluator over a shared sieve (the table must outlive it).
///
/// Shells n <= split are summed directly; shells in (split, N] and the
/// integral tail are folded into a Taylor polynomial in lambda, valid for
/// |lambda| <= split / 16. Outside that range the evaluator falls back to
/// the direct sum over all n <= N with a quadrature tail.
class SecularFunction {
 public:
  SecularFunction(const R3Table& table, std::uint64_t nmax, std::uint64_t split);

  /// Throws PoleError within 1e-9 of an element of N3.
  double operator()(double lambda) const;

  /// Direct route: every shell up to N plus the adaptive-quadrature tail.
  double evaluate_direct(double lambda) const;

  std::uint64_t nmax() const { return nmax_; }
  std::uint64_t split() const { return split_; }
  const R3Table& table() const { return *table_; }

  /// Contribution of shells beyond split (series + tail + boundary term).
  double far_part(double lambda) const;

 private:
  friend class BracketExpansion;
  static constexpr int kFarTerms = 17;

  double boundary_term(double lambda) const;

  const R3Table* table_;
  std::uint64_t nmax_;
  std::uint64_t split_;
  double tail_start_;
  double boundary_excess_;  // V(N + 1/2) - A(N)
  std::vector<double> far_coeffs_;
};

/// Local model of F on one bracket (lo, hi): shells within a window of the
/// bracket centre are summed directly, the remaining shells up to split are
/// expanded in powers of (lambda - centre).
class BracketExpansion {
 public:
  BracketExpansion(const SecularFunction& f, double lo, double hi);
  double operator()(double lambda) const;
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  static constexpr int kLocalTerms = 13;
  static constexpr double kWindow = 64.0;

  const SecularFunction* f_;
  double lo_;
  double hi_;
  double centre_;
  std::vector<std::pair<double, double>> window_;  // (n, r3)
  std::vector<double> local_coeffs_;
};

/// Throws PoleError if lambda is within 1e-9 of an element of N3.
void check_not_pole(double lambda);

/// F(lambda) for the config's tail cutoff (builds its own sieve).
double secular_F(double lambda, const ScattererConfig& config);
double secular_F(double lambda, const ScattererConfig& config, const R3Table& table);

struct SpectrumEntry {
  std::size_t k = 0;
  double lambda = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double residual = 0.0;
};

struct ScattererSpectrum {
  double phi = 0.0;
  double c0 = 0.0;
  double rhs = 0.0;  // c0 * tan(phi / 2)
  std::uint64_t tail_cutoff_nmax = 0;
  std::vector<SpectrumEntry> entries;  // k = 0..k_max
};

/// Solves F = c0 tan(phi/2) on the brackets (n_{k-1}, n_k), k = 1..k_max,
/// and on (-c, n_0) for lambda_0. Brackets are prepared once and can be
/// reused for several phi.
class SecularSolver {
 public:
  SecularSolver(const R3Table& table, std::uint64_t nmax, std::size_t k_max);

  ScattererSpectrum solve(double phi, double tol_lambda = 1e-12) const;

  const SecularFunction& function() const { return f_; }
  double c0() const { return c0_.value; }
  const std::vector<std::uint64_t>& shells() const { return shells_; }

 private:
  double solve_lambda0(double rhs, double tol, double& lo_out) const;

  std::vector<std::uint64_t> shells_;  // n_0 .. n_{k_max}
  SecularFunction f_;
  C0Estimate c0_;
  std::vector<BracketExpansion> brackets_;  // brackets_[k-1] is (n_{k-1}, n_k)
};

ScattererSpectrum solve_spectrum(const ScattererConfig& config, std::size_t k_max);
ScattererSpectrum solve_spectrum(const ScattererConfig& config, std::size_t k_max,
                                 const R3Table& table);

enum class SequenceKind { Midpoint, Secular };

struct SequenceEntry {
  double lambda = 0.0;
  std::uint64_t n_lambda = 0;
  bool in_lambda_infinity = false;
};

struct InterlacedSequence {
  SequenceKind kind = SequenceKind::Midpoint;
  std::optional<double> phi;  // set for Secular
  std::vector<SequenceEntry> entries;
};

/// True iff the nearest shell of lambda is good; n_lambda = 0 is never good.
bool in_lambda_infinity(std::uint64_t n_lambda);

/// Midpoints (n_{k-1} + n_k)/2 <= lambda_max, or the secular roots <=
/// lambda_max (including lambda_0) for the given config.
InterlacedSequence build_sequence(SequenceKind kind, double lambda_max,
                                  const ScattererConfig& config = {});
InterlacedSequence build_midpoint_sequence(double lambda_max);

struct DensityRow {
  double x = 0.0;
  std::size_t count = 0;
  std::size_t count_inf = 0;
  double ratio = 0.0;
};

struct DensityReport {
  std::vector<DensityRow> rows;
  double headline = 0.0;  // ratio at the last row
  /// max over rows with X >= 100 of (1 - ratio) / (X^{-1/2} log X).
  double fitted_constant = 0.0;
};

/// Ladder X = 10^2, 10^3, ... below the largest lambda, then the largest lambda.
DensityReport density_of_subsequence(const InterlacedSequence& seq);

}  // namespace scatter3d
