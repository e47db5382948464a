#pragma once

// Matrix elements <Op(a) g_lambda,L, g_lambda,L> along interlaced sequences,
// with L = lambda^delta, compared against Liouville averages.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scatter3d/harmonics.hpp"
#include "scatter3d/lattice_arith.hpp"
#include "scatter3d/pdo.hpp"
#include "scatter3d/spectrum.hpp"
#include "scatter3d/torus.hpp"

namespace scatter3d {

struct QERunConfig {
  SequenceKind sequence_kind = SequenceKind::Midpoint;
  double phi = 0.0;  // Secular only
  double lambda_max = 0.0;
  double delta = 0.3;
  std::vector<BandSymbol> observables;  // names label the output columns
  TorusPoint x0{};
  std::uint64_t tail_cutoff_nmax = 1'000'000;

  /// Throws ParameterError unless delta in (0, 1), lambda_max >= 100 and
  /// there is at least one observable with a unique, nonempty name.
  void validate() const;
};

struct QEValue {
  Complex element;
  double deviation = 0.0;  // |element - liouville|
};

struct QERow {
  double lambda = 0.0;
  std::uint64_t n_lambda = 0;
  std::optional<ShellClass> klass;
  bool in_lambda_infinity = false;
  double width = 0.0;  // L = lambda^delta
  bool empty = false;
  std::vector<QEValue> values;  // one per observable; absent when empty
};

struct QESummaryRow {
  double x = 0.0;
  std::size_t count = 0;      // rows with lambda <= X
  std::size_t count_inf = 0;  // of which in Lambda_infinity
  double density = 0.0;
  double s_all = 0.0;  // mean deviation over nonempty rows
  double s_inf = 0.0;  // mean deviation over nonempty Lambda_infinity rows
};

struct QERunReport {
  std::vector<std::string> names;
  std::vector<Complex> liouville;
  std::vector<QERow> rows;                         // sorted by lambda
  std::vector<std::vector<QESummaryRow>> summary;  // summary[observable]
};

/// Ladder 10^2, 10^3, ... below lambda_max, then lambda_max.
std::vector<double> summary_ladder(double lambda_max);

/// Cesaro statistics of one observable column at the given X values.
std::vector<QESummaryRow> cesaro_summary(const QERunReport& report, std::size_t observable,
                                         const std::vector<double>& ladder);

/// One row per sequence element with lambda > 0. Rows are computed
/// concurrently into fixed slots, so the report does not depend on the
/// worker count.
QERunReport run_qe(const QERunConfig& config);

/// Rows for an explicit list of spectral parameters (same machinery as run_qe).
QERunReport run_qe_on(const std::vector<double>& lambdas, const QERunConfig& config);

/// Sum over xi, xi + zeta in the annulus of Y(xi/|xi|) / ((|xi|^2 - lambda)(|xi + zeta|^2 - lambda))
/// for each requested harmonic (zeta != 0), enumerating only lattice columns
/// that can hold such a pair.
std::vector<Complex> annulus_pair_sums(const LatticePoint& zeta,
                                       const std::vector<HarmonicIndex>& harmonics, double lambda,
                                       double width);

struct ConsistencyResult {
  Complex element;    // lattice-point route (pdo::matrix_element)
  Complex shell_sum;  // sum W(n)/(n - lambda)^2 / sum r3(n)/(n - lambda)^2
  double residual = 0.0;
};

/// Compares the zeta = 0 matrix element with its shell regrouping. The
/// residual is |element - shell_sum| divided by max(|shell_sum|, sup|Y_{l,m}|).
ConsistencyResult weyl_vs_element_consistency(HarmonicIndex idx, double lambda, double delta,
                                              const TorusPoint& x0 = {});

struct ShellSplit {
  std::uint64_t n_lambda = 0;
  Complex near_term;  // W(n_lambda)/(n_lambda - lambda)^2 over the norm sum
  Complex far_sum;    // remaining shells of the annulus
  Complex element;    // near_term + far_sum computed independently
  double weyl_ratio = 0.0;  // |W(n_lambda)| / r3(n_lambda)
};

ShellSplit dominant_shell_split(HarmonicIndex idx, double lambda, double delta);

}  // namespace scatter3d
