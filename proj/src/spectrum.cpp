#include "scatter3d/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "scatter3d/errors.hpp"
#include "scatter3d/parallel.hpp"
#include "scatter3d/quadrature.hpp"

namespace scatter3d {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPoleDistance = 1e-9;
constexpr double kSignProbe = 1e-8;

double horner(const std::vector<double>& coeffs, double x) {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

void require_table(const R3Table& table, std::uint64_t nmax) {
  if (table.x_max() < nmax) {
    throw ParameterError(
        fmt::format("sieve covers n <= {}, but the tail cutoff is {}", table.x_max(), nmax));
  }
}

double c0_partial(const R3Table& table, std::uint64_t nmax) {
  double sum = 0.0;
  for (std::uint64_t n = 0; n <= nmax; ++n) {
    const double nd = static_cast<double>(n);
    sum += table[n] / (nd * nd + 1.0);
  }
  const double t = static_cast<double>(nmax) + 0.5;
  const double tail = integrate_to_infinity(
      [](double s) { return 2.0 * kPi * std::sqrt(s) / (s * s + 1.0); }, t);
  const double excess = ball_volume(t) - static_cast<double>(table.cumulative(nmax));
  return sum + tail + excess / (t * t + 1.0);
}

}  // namespace

void ScattererConfig::validate() const {
  if (!(phi > -kPi && phi < kPi)) {
    throw ParameterError(fmt::format("phi = {} must lie in (-pi, pi)", phi));
  }
  if (!(tol_lambda > 0.0)) throw ParameterError("tol_lambda must be positive");
  if (tail_cutoff_nmax < 1000) throw ParameterError("tail cutoff must be at least 1000");
}

C0Estimate compute_c0(const R3Table& table, std::uint64_t nmax) {
  if (nmax < 1000) throw ParameterError("compute_c0: tail cutoff must be at least 1000");
  require_table(table, nmax);
  C0Estimate est;
  est.nmax = nmax;
  est.value = c0_partial(table, nmax);
  est.tail_error = std::abs(est.value - c0_partial(table, nmax / 2));
  return est;
}

C0Estimate compute_c0(std::uint64_t nmax) { return compute_c0(r3_sieve(nmax), nmax); }

void check_not_pole(double lambda) {
  const double m = std::round(lambda);
  if (m >= 0.0 && std::abs(lambda - m) < kPoleDistance &&
      is_sum_of_three_squares(static_cast<std::uint64_t>(m))) {
    throw PoleError(fmt::format("lambda = {} lies within {} of the shell {}", lambda,
                                kPoleDistance, static_cast<std::uint64_t>(m)));
  }
}

SecularFunction::SecularFunction(const R3Table& table, std::uint64_t nmax, std::uint64_t split)
    : table_(&table), nmax_(nmax), split_(std::min(split, nmax)) {
  require_table(table, nmax);
  tail_start_ = static_cast<double>(nmax) + 0.5;
  boundary_excess_ = ball_volume(tail_start_) - static_cast<double>(table.cumulative(nmax));

  // 1/(t - lambda) - t/(t^2+1) = 1/(t(t^2+1)) + sum_{j>=1} lambda^j / t^{j+1}
  far_coeffs_.assign(kFarTerms, 0.0);
  for (std::uint64_t n = split_ + 1; n <= nmax_; ++n) {
    const double r = table[n];
    if (r == 0.0) continue;
    const double nd = static_cast<double>(n);
    const double inv = 1.0 / nd;
    far_coeffs_[0] += r * inv / (nd * nd + 1.0);
    double p = inv;
    for (int j = 1; j < kFarTerms; ++j) {
      p *= inv;
      far_coeffs_[j] += r * p;
    }
  }
  const double t = tail_start_;
  far_coeffs_[0] += integrate_to_infinity(
      [](double s) { return 2.0 * kPi * std::sqrt(s) / (s * (s * s + 1.0)); }, t);
  for (int j = 1; j < kFarTerms; ++j) {
    const double jd = static_cast<double>(j);
    far_coeffs_[j] += 2.0 * kPi * std::pow(t, 0.5 - jd) / (jd - 0.5);
  }
}

double SecularFunction::boundary_term(double lambda) const {
  return boundary_excess_ * secular_summand(tail_start_, lambda);
}

double SecularFunction::far_part(double lambda) const {
  return horner(far_coeffs_, lambda) + boundary_term(lambda);
}

double SecularFunction::operator()(double lambda) const {
  check_not_pole(lambda);
  if (std::abs(lambda) * 16.0 > static_cast<double>(split_)) return evaluate_direct(lambda);
  double sum = 0.0;
  const auto& counts = table_->counts();
  for (std::uint64_t n = 0; n <= split_; ++n) {
    if (counts[n] == 0) continue;
    sum += counts[n] * secular_summand(static_cast<double>(n), lambda);
  }
  return sum + far_part(lambda);
}

double SecularFunction::evaluate_direct(double lambda) const {
  check_not_pole(lambda);
  if (lambda * 2.0 > tail_start_) {
    throw ParameterError(
        fmt::format("lambda = {} is too close to the tail cutoff {}", lambda, nmax_));
  }
  double sum = 0.0;
  const auto& counts = table_->counts();
  for (std::uint64_t n = 0; n <= nmax_; ++n) {
    if (counts[n] == 0) continue;
    sum += counts[n] * secular_summand(static_cast<double>(n), lambda);
  }
  const double tail = integrate_to_infinity(
      [lambda](double s) { return 2.0 * kPi * std::sqrt(s) * secular_summand(s, lambda); },
      tail_start_);
  return sum + tail + boundary_term(lambda);
}

BracketExpansion::BracketExpansion(const SecularFunction& f, double lo, double hi)
    : f_(&f), lo_(lo), hi_(hi), centre_(0.5 * (lo + hi)) {
  const double split = static_cast<double>(f.split());
  if (std::max(std::abs(lo), std::abs(hi)) * 16.0 > split) {
    throw ParameterError(fmt::format(
        "bracket ({}, {}) is outside the range of the far-shell series (split {})", lo, hi,
        f.split()));
  }
  local_coeffs_.assign(kLocalTerms, 0.0);
  const auto& counts = f.table().counts();
  for (std::uint64_t n = 0; n <= f.split(); ++n) {
    if (counts[n] == 0) continue;
    const double nd = static_cast<double>(n);
    const double r = counts[n];
    const double d = nd - centre_;
    if (std::abs(d) <= kWindow) {
      window_.emplace_back(nd, r);
      continue;
    }
    local_coeffs_[0] += r * secular_summand(nd, centre_);
    const double inv = 1.0 / d;
    double p = inv;
    for (int j = 1; j < kLocalTerms; ++j) {
      p *= inv;
      local_coeffs_[j] += r * p;
    }
  }
}

double BracketExpansion::operator()(double lambda) const {
  double sum = 0.0;
  for (const auto& [n, r] : window_) sum += r * secular_summand(n, lambda);
  return sum + horner(local_coeffs_, lambda - centre_) + f_->far_part(lambda);
}

double secular_F(double lambda, const ScattererConfig& config, const R3Table& table) {
  config.validate();
  SecularFunction f(table, config.tail_cutoff_nmax, config.tail_cutoff_nmax);
  return f(lambda);
}

double secular_F(double lambda, const ScattererConfig& config) {
  config.validate();
  return secular_F(lambda, config, r3_sieve(config.tail_cutoff_nmax));
}

namespace {

std::vector<std::uint64_t> first_shells(std::size_t count) {
  std::vector<std::uint64_t> shells;
  shells.reserve(count);
  for (std::uint64_t n = 0; shells.size() < count; ++n) {
    if (is_sum_of_three_squares(n)) shells.push_back(n);
  }
  return shells;
}

std::uint64_t split_for(std::uint64_t top_shell, std::uint64_t nmax) {
  const std::uint64_t wanted = std::max<std::uint64_t>(4096, 16 * (top_shell + 4));
  if (wanted > nmax) {
    throw ParameterError(fmt::format(
        "tail cutoff {} is too small for shells up to {} (need at least {})", nmax, top_shell,
        wanted));
  }
  return wanted;
}

template <typename Fn>
double bisect(const Fn& g, double rhs, double lo, double hi, double tol) {
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (g(mid) < rhs) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= tol) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

SecularSolver::SecularSolver(const R3Table& table, std::uint64_t nmax, std::size_t k_max)
    : shells_(first_shells(k_max + 1)),
      f_(table, nmax, split_for(shells_.back(), nmax)),
      c0_(compute_c0(table, nmax)) {
  if (k_max < 1) throw ParameterError("k_max must be at least 1");
  std::vector<std::optional<BracketExpansion>> built(k_max);
  parallel_for(k_max, [&](unsigned, std::size_t i) {
    built[i].emplace(f_, static_cast<double>(shells_[i]), static_cast<double>(shells_[i + 1]));
  });
  brackets_.reserve(k_max);
  for (auto& b : built) brackets_.push_back(std::move(*b));
}

double SecularSolver::solve_lambda0(double rhs, double tol, double& lo_out) const {
  double c = 1.0;
  while (!(f_(-c) < rhs)) {
    c *= 2.0;
    if (c > 1e12) throw SolverError("no sign change found to the left of n_0 = 0");
  }
  if (!(f_(-kSignProbe) > rhs)) {
    throw SolverError(fmt::format("bracket ({}, 0) failed the sign test", -c));
  }
  lo_out = -c;
  return bisect(f_, rhs, -c, 0.0, tol);
}

ScattererSpectrum SecularSolver::solve(double phi, double tol_lambda) const {
  ScattererConfig probe;
  probe.phi = phi;
  probe.tol_lambda = tol_lambda;
  probe.validate();

  ScattererSpectrum spec;
  spec.phi = phi;
  spec.c0 = c0_.value;
  spec.rhs = c0_.value * std::tan(phi / 2.0);
  spec.tail_cutoff_nmax = f_.nmax();
  spec.entries.resize(brackets_.size() + 1);

  double lo0 = 0.0;
  const double l0 = solve_lambda0(spec.rhs, tol_lambda, lo0);
  spec.entries[0] = {0, l0, lo0, 0.0, std::abs(f_(l0) - spec.rhs)};

  parallel_for(brackets_.size(), [&](unsigned, std::size_t i) {
    const auto& g = brackets_[i];
    const double lo = g.lo();
    const double hi = g.hi();
    if (!(g(lo + kSignProbe) < spec.rhs && g(hi - kSignProbe) > spec.rhs)) {
      throw SolverError(
          fmt::format("bracket ({}, {}) failed the sign test for rhs = {}", lo, hi, spec.rhs));
    }
    const double lambda = bisect(g, spec.rhs, lo, hi, tol_lambda);
    spec.entries[i + 1] = {i + 1, lambda, lo, hi, std::abs(f_(lambda) - spec.rhs)};
  });
  return spec;
}

ScattererSpectrum solve_spectrum(const ScattererConfig& config, std::size_t k_max,
                                 const R3Table& table) {
  config.validate();
  SecularSolver solver(table, config.tail_cutoff_nmax, k_max);
  return solver.solve(config.phi, config.tol_lambda);
}

ScattererSpectrum solve_spectrum(const ScattererConfig& config, std::size_t k_max) {
  config.validate();
  return solve_spectrum(config, k_max, r3_sieve(config.tail_cutoff_nmax));
}

bool in_lambda_infinity(std::uint64_t n_lambda) {
  return n_lambda != 0 && classify(n_lambda) == ShellClass::Good;
}

InterlacedSequence build_midpoint_sequence(double lambda_max) {
  InterlacedSequence seq;
  seq.kind = SequenceKind::Midpoint;
  std::uint64_t prev = 0;
  for (std::uint64_t n = 1;; ++n) {
    if (!is_sum_of_three_squares(n)) continue;
    const double lambda = 0.5 * static_cast<double>(prev + n);
    if (lambda > lambda_max) break;
    const auto nl = nearest_shell(lambda);
    seq.entries.push_back({lambda, nl, in_lambda_infinity(nl)});
    prev = n;
  }
  return seq;
}

InterlacedSequence build_sequence(SequenceKind kind, double lambda_max,
                                  const ScattererConfig& config) {
  if (!(lambda_max >= 10.0)) throw ParameterError("lambda_max must be at least 10");
  if (kind == SequenceKind::Midpoint) return build_midpoint_sequence(lambda_max);

  config.validate();
  std::size_t k_max = 0;
  for (std::uint64_t n = 1; n <= static_cast<std::uint64_t>(lambda_max) + 3; ++n) {
    if (is_sum_of_three_squares(n)) ++k_max;
  }
  const std::uint64_t nmax =
      std::max<std::uint64_t>(config.tail_cutoff_nmax,
                              16 * (static_cast<std::uint64_t>(lambda_max) + 8));
  const auto table = r3_sieve(nmax);
  SecularSolver solver(table, nmax, k_max);
  const auto spec = solver.solve(config.phi, config.tol_lambda);

  InterlacedSequence seq;
  seq.kind = SequenceKind::Secular;
  seq.phi = config.phi;
  for (const auto& e : spec.entries) {
    if (e.lambda > lambda_max) break;
    const auto nl = nearest_shell(e.lambda);
    seq.entries.push_back({e.lambda, nl, in_lambda_infinity(nl)});
  }
  return seq;
}

DensityReport density_of_subsequence(const InterlacedSequence& seq) {
  if (seq.entries.empty()) throw DomainError("density_of_subsequence: empty sequence");
  const double last = seq.entries.back().lambda;
  std::vector<double> ladder;
  for (double x = 100.0; x < last; x *= 10.0) ladder.push_back(x);
  ladder.push_back(last);

  DensityReport report;
  std::size_t idx = 0;
  std::size_t count = 0;
  std::size_t count_inf = 0;
  for (const double x : ladder) {
    while (idx < seq.entries.size() && seq.entries[idx].lambda <= x) {
      ++count;
      if (seq.entries[idx].in_lambda_infinity) ++count_inf;
      ++idx;
    }
    DensityRow row{x, count, count_inf,
                   count == 0 ? 0.0 : static_cast<double>(count_inf) / static_cast<double>(count)};
    report.rows.push_back(row);
    if (x >= 100.0 && count > 0) {
      const double scale = std::log(x) / std::sqrt(x);
      report.fitted_constant = std::max(report.fitted_constant, (1.0 - row.ratio) / scale);
    }
  }
  report.headline = report.rows.back().ratio;
  return report;
}

}  // namespace scatter3d
