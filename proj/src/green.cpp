#include "scatter3d/green.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "scatter3d/errors.hpp"
#include "scatter3d/quadrature.hpp"
#include "scatter3d/spectrum.hpp"

namespace scatter3d {

namespace {

constexpr double kPi = std::numbers::pi;
const double kTorusVolume = 8.0 * kPi * kPi * kPi;

bool annulus_has_shell(std::uint64_t lo, std::uint64_t hi) {
  for (std::uint64_t n = lo; n <= hi; ++n) {
    if (is_sum_of_three_squares(n)) return true;
  }
  return false;
}

}  // namespace

double inverse_torus_volume() { return 1.0 / kTorusVolume; }

std::uint64_t default_green_cutoff(double lambda) {
  return std::max<std::uint64_t>(100'000, static_cast<std::uint64_t>(std::ceil(16.0 * lambda)));
}

double green_norm_sq(double lambda, const R3Table& table, std::uint64_t cutoff) {
  check_not_pole(lambda);
  if (table.x_max() < cutoff) {
    throw ParameterError(
        fmt::format("green_norm_sq: sieve covers n <= {}, cutoff is {}", table.x_max(), cutoff));
  }
  if (static_cast<double>(cutoff) < 4.0 * std::max(lambda, 1.0)) {
    throw ParameterError(fmt::format("green_norm_sq: cutoff {} too close to lambda = {}", cutoff,
                                     lambda));
  }
  double sum = 0.0;
  for (std::uint64_t n = 0; n <= cutoff; ++n) {
    if (table[n] == 0) continue;
    const double d = static_cast<double>(n) - lambda;
    sum += table[n] / (d * d);
  }
  const double t = static_cast<double>(cutoff) + 0.5;
  const double tail = integrate_to_infinity(
      [lambda](double s) { return 2.0 * kPi * std::sqrt(s) / ((s - lambda) * (s - lambda)); }, t);
  const double excess = ball_volume(t) - static_cast<double>(table.cumulative(cutoff));
  sum += tail + excess / ((t - lambda) * (t - lambda));
  return sum / kTorusVolume;
}

double green_norm_sq(double lambda, const R3Table& table) {
  return green_norm_sq(lambda, table, default_green_cutoff(lambda));
}

std::pair<std::uint64_t, std::uint64_t> annulus_range(double lambda, double width) {
  if (!(width > 0.0)) throw ParameterError("annulus width must be positive");
  const double lo_edge = lambda - width;
  const std::uint64_t lo =
      lo_edge < 0.0 ? 0 : static_cast<std::uint64_t>(std::floor(lo_edge)) + 1;
  const double hi_edge = lambda + width;
  if (hi_edge <= 0.0) return {1, 0};
  const auto hi_ceil = static_cast<std::uint64_t>(std::ceil(hi_edge));
  if (hi_ceil == 0) return {1, 0};
  return {lo, hi_ceil - 1};
}

double annulus_shell_sum(double lambda, double width, const R3Table& table) {
  const auto [lo, hi] = annulus_range(lambda, width);
  if (hi > table.x_max()) {
    throw ParameterError(fmt::format("annulus reaches n = {} beyond the sieve", hi));
  }
  double sum = 0.0;
  for (std::uint64_t n = lo; n <= hi; ++n) {
    if (table[n] == 0) continue;
    const double d = static_cast<double>(n) - lambda;
    sum += table[n] / (d * d);
  }
  return sum;
}

TruncatedGreen build_truncated(double lambda, double width, const TorusPoint& x0,
                               const R3Table& table) {
  check_not_pole(lambda);
  const auto [lo, hi] = annulus_range(lambda, width);
  if (lo > hi || !annulus_has_shell(lo, hi)) throw EmptyAnnulus(lambda, width);

  TruncatedGreen tg;
  tg.lambda = lambda;
  tg.width = width;
  tg.x0 = x0;
  double points_sum = 0.0;
  visit_lattice_range(lo, hi, [&](std::int64_t x, std::int64_t y, std::int64_t z, std::int64_t n) {
    const double d = static_cast<double>(n) - lambda;
    const double phase = -(static_cast<double>(x) * x0.x + static_cast<double>(y) * x0.y +
                           static_cast<double>(z) * x0.z);
    const Complex c = std::polar(-1.0 / (kTorusVolume * d), phase);
    tg.coeffs.push_back({{x, y, z}, c});
    points_sum += std::norm(c);
  });
  tg.norm_trunc_sq_points = kTorusVolume * points_sum;
  tg.norm_trunc_sq = annulus_shell_sum(lambda, width, table) / kTorusVolume;
  tg.norm_full_sq = green_norm_sq(lambda, table);
  return tg;
}

TruncationReport truncation_distance(double lambda, double width, const R3Table& table,
                                     std::uint64_t cutoff) {
  check_not_pole(lambda);
  const auto [lo, hi] = annulus_range(lambda, width);
  if (lo > hi || !annulus_has_shell(lo, hi)) throw EmptyAnnulus(lambda, width);
  TruncationReport rep;
  rep.norm_full_sq = green_norm_sq(lambda, table, cutoff);
  rep.norm_trunc_sq = annulus_shell_sum(lambda, width, table) / kTorusVolume;
  rep.ratio = std::sqrt(rep.norm_trunc_sq / rep.norm_full_sq);
  rep.distance = std::sqrt(std::max(0.0, 2.0 - 2.0 * rep.ratio));
  return rep;
}

TruncationReport truncation_distance(double lambda, double width, const R3Table& table) {
  return truncation_distance(lambda, width, table, default_green_cutoff(lambda));
}

double projection_inner_product(const TruncatedGreen& tg) {
  double sum = 0.0;
  for (const auto& [xi, c] : tg.coeffs) {
    const double d = static_cast<double>(xi.norm_sq()) - tg.lambda;
    const double phase = -(static_cast<double>(xi.x) * tg.x0.x +
                           static_cast<double>(xi.y) * tg.x0.y +
                           static_cast<double>(xi.z) * tg.x0.z);
    const Complex full = std::polar(-1.0 / (kTorusVolume * d), phase);
    sum += (full * std::conj(c)).real();
  }
  return kTorusVolume * sum;
}

Complex evaluate_g(const TruncatedGreen& tg, const TorusPoint& x) {
  Complex sum = 0.0;
  for (const auto& [xi, c] : tg.coeffs) {
    const double phase = static_cast<double>(xi.x) * x.x + static_cast<double>(xi.y) * x.y +
                         static_cast<double>(xi.z) * x.z;
    sum += c * std::polar(1.0, phase);
  }
  return sum / std::sqrt(tg.norm_trunc_sq);
}

}  // namespace scatter3d
