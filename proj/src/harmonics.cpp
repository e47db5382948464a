#include "scatter3d/harmonics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "scatter3d/errors.hpp"
#include "scatter3d/parallel.hpp"

namespace scatter3d {

namespace {

constexpr double kPi = std::numbers::pi;

/// Normalized associated Legendre values p[l][m] (m >= 0), including the
/// Condon-Shortley phase and the 1/sqrt(4 pi)-type normalization, so that
/// Y_{l,m} = p[l][m] * e^{i m phi}.
void legendre_table(int lmax, double ct, double st, std::vector<double>& p) {
  const auto stride = static_cast<std::size_t>(lmax + 1);
  p.assign(stride * stride, 0.0);
  auto at = [&](int l, int m) -> double& {
    return p[static_cast<std::size_t>(l) * stride + static_cast<std::size_t>(m)];
  };
  double pmm = std::sqrt(1.0 / (4.0 * kPi));
  for (int m = 0; m <= lmax; ++m) {
    if (m > 0) pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * st;
    at(m, m) = pmm;
    if (m + 1 <= lmax) at(m + 1, m) = std::sqrt(2.0 * m + 3.0) * ct * pmm;
    for (int l = m + 2; l <= lmax; ++l) {
      const double ld = l;
      const double a = std::sqrt((4.0 * ld * ld - 1.0) / (ld * ld - 1.0 * m * m));
      const double b = std::sqrt(((ld - 1.0) * (ld - 1.0) - 1.0 * m * m) /
                                 (4.0 * (ld - 1.0) * (ld - 1.0) - 1.0));
      at(l, m) = a * (ct * at(l - 1, m) - b * at(l - 2, m));
    }
  }
}

/// Single normalized Legendre value for m >= 0.
double legendre_one(int l, int m, double ct, double st) {
  double pmm = std::sqrt(1.0 / (4.0 * kPi));
  for (int k = 1; k <= m; ++k) pmm *= -std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * st;
  if (l == m) return pmm;
  double prev = pmm;
  double cur = std::sqrt(2.0 * m + 3.0) * ct * pmm;
  for (int ll = m + 2; ll <= l; ++ll) {
    const double ld = ll;
    const double a = std::sqrt((4.0 * ld * ld - 1.0) / (ld * ld - 1.0 * m * m));
    const double b = std::sqrt(((ld - 1.0) * (ld - 1.0) - 1.0 * m * m) /
                               (4.0 * (ld - 1.0) * (ld - 1.0) - 1.0));
    const double next = a * (ct * cur - b * prev);
    prev = cur;
    cur = next;
  }
  return cur;
}

Complex azimuthal_power(double x, double y, double rho, int m) {
  if (m == 0 || rho == 0.0) return {1.0, 0.0};
  const Complex base(x / rho, y / rho);
  Complex acc(1.0, 0.0);
  for (int k = 0; k < m; ++k) acc *= base;
  return acc;
}

Complex ylm_from_parts(HarmonicIndex idx, double x, double y, double rho, double ct,
                       double st) {
  const int am = std::abs(idx.m);
  const Complex v = legendre_one(idx.l, am, ct, st) * azimuthal_power(x, y, rho, am);
  if (idx.m >= 0) return v;
  return (am % 2 == 0 ? 1.0 : -1.0) * std::conj(v);
}

/// Splits [0, n_max] into ranges of similar lattice-point counts and visits
/// them concurrently. Every shell lies in exactly one range and is summed in
/// lexicographic point order, so results do not depend on the worker count.
template <typename Fn>
void for_each_shell_range(std::uint64_t n_max, Fn&& fn) {
  const unsigned workers = thread_count();
  const std::size_t tasks = workers <= 1 ? 1 : 4 * static_cast<std::size_t>(workers);
  std::vector<std::uint64_t> bounds{0};
  for (std::size_t i = 1; i < tasks; ++i) {
    const double frac = std::pow(static_cast<double>(i) / static_cast<double>(tasks), 2.0 / 3.0);
    const auto b = static_cast<std::uint64_t>(frac * static_cast<double>(n_max));
    if (b > bounds.back()) bounds.push_back(b);
  }
  bounds.push_back(n_max + 1);
  parallel_for(bounds.size() - 1, [&](unsigned, std::size_t i) {
    fn(bounds[i], bounds[i + 1] - 1);
  });
}

}  // namespace

void HarmonicIndex::validate() const {
  if (l < 0 || std::abs(m) > l) {
    throw ParameterError(fmt::format("invalid harmonic index (l, m) = ({}, {})", l, m));
  }
}

Complex ylm_direction(HarmonicIndex idx, double x, double y, double z) {
  idx.validate();
  const double rho = std::sqrt(x * x + y * y);
  const double r = std::sqrt(x * x + y * y + z * z);
  if (r == 0.0) throw DomainError("ylm: direction of the zero vector is undefined");
  return ylm_from_parts(idx, x, y, rho, z / r, rho / r);
}

Complex ylm(HarmonicIndex idx, const std::array<double, 3>& u) {
  const double norm = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
  if (std::abs(norm - 1.0) > 1e-12) {
    throw DomainError(fmt::format("ylm: |u| = {} is not 1", norm));
  }
  return ylm_direction(idx, u[0], u[1], u[2]);
}

void ylm_all(int lmax, double x, double y, double z, std::span<Complex> out) {
  if (out.size() < harmonic_count(lmax)) throw ParameterError("ylm_all: output span too short");
  const double rho = std::sqrt(x * x + y * y);
  const double r = std::sqrt(x * x + y * y + z * z);
  if (r == 0.0) throw DomainError("ylm: direction of the zero vector is undefined");
  thread_local std::vector<double> p;
  legendre_table(lmax, z / r, rho / r, p);
  const auto stride = static_cast<std::size_t>(lmax + 1);
  const Complex base = rho == 0.0 ? Complex(1.0, 0.0) : Complex(x / rho, y / rho);
  Complex phase(1.0, 0.0);
  for (int m = 0; m <= lmax; ++m) {
    if (m > 0) phase = rho == 0.0 ? Complex(1.0, 0.0) : phase * base;
    for (int l = m; l <= lmax; ++l) {
      const Complex v = p[static_cast<std::size_t>(l) * stride + static_cast<std::size_t>(m)] * phase;
      out[harmonic_slot(l, m)] = v;
      if (m > 0) out[harmonic_slot(l, -m)] = (m % 2 == 0 ? 1.0 : -1.0) * std::conj(v);
    }
  }
}

double ylm_sup(HarmonicIndex idx) {
  idx.validate();
  const int am = std::abs(idx.m);
  auto g = [&](double theta) {
    return std::abs(legendre_one(idx.l, am, std::cos(theta), std::sin(theta)));
  };
  constexpr int kGrid = 4000;
  int best = 0;
  double best_val = -1.0;
  for (int i = 0; i <= kGrid; ++i) {
    const double v = g(kPi * i / kGrid);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  // Golden-section refinement on the neighbouring cells.
  double a = kPi * std::max(0, best - 1) / kGrid;
  double b = kPi * std::min(kGrid, best + 1) / kGrid;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  for (int it = 0; it < 80; ++it) {
    if (g(c) > g(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - inv_phi * (b - a);
    d = a + inv_phi * (b - a);
  }
  return std::max(best_val, g(0.5 * (a + b)));
}

Complex weyl_sum(HarmonicIndex idx, std::uint64_t n) {
  idx.validate();
  if (n == 0) throw DomainError("weyl_sum: n must be >= 1");
  if (!is_sum_of_three_squares(n)) {
    throw DomainError(fmt::format("weyl_sum: {} is not a sum of three squares", n));
  }
  Complex sum(0.0, 0.0);
  for (const auto& p : sphere_points(n)) {
    sum += ylm_direction(idx, static_cast<double>(p.x), static_cast<double>(p.y),
                         static_cast<double>(p.z));
  }
  return sum;
}

WeylProfile weyl_profile(HarmonicIndex idx, std::uint64_t n_max) {
  idx.validate();
  if (n_max < 100) throw ParameterError("weyl_profile: n_max must be at least 100");
  const int am = std::abs(idx.m);

  std::vector<Complex> sums(n_max + 1);
  std::vector<std::uint32_t> counts(n_max + 1);
  for_each_shell_range(n_max, [&](std::uint64_t lo, std::uint64_t hi) {
    std::int64_t last_x = 0;
    std::int64_t last_y = 0;
    bool have_column = false;
    Complex phase;
    double rho = 0.0;
    visit_lattice_range(lo, hi, [&](std::int64_t x, std::int64_t y, std::int64_t z, std::int64_t n) {
      if (!have_column || x != last_x || y != last_y) {
        rho = std::sqrt(static_cast<double>(x * x + y * y));
        phase = azimuthal_power(static_cast<double>(x), static_cast<double>(y), rho, am);
        last_x = x;
        last_y = y;
        have_column = true;
      }
      const auto ni = static_cast<std::size_t>(n);
      ++counts[ni];
      if (n == 0) return;
      const double r = std::sqrt(static_cast<double>(n));
      sums[ni] += legendre_one(idx.l, am, static_cast<double>(z) / r, rho / r) * phase;
    });
  });

  WeylProfile profile;
  profile.idx = idx;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    if (counts[n] == 0) continue;
    Complex w = sums[n];
    if (idx.m < 0) w = (am % 2 == 0 ? 1.0 : -1.0) * std::conj(w);
    const auto d = decompose_four_adic(n);
    WeylRow row;
    row.n = n;
    row.a = d.a;
    row.n1 = d.n1;
    row.r3 = counts[n];
    row.klass = classify(n);
    row.w = w;
    row.ratio = std::abs(w) / row.r3;
    profile.rows.push_back(row);
  }
  for (const auto& row : profile.rows) {
    if (row.klass != ShellClass::Good) continue;
    const int k = static_cast<int>(std::bit_width(row.n)) - 1;
    auto it = std::find_if(profile.dyadic.begin(), profile.dyadic.end(),
                           [k](const DyadicBlock& b) { return b.k == k; });
    if (it == profile.dyadic.end()) {
      profile.dyadic.push_back({k, 0, 0.0, 0});
      it = std::prev(profile.dyadic.end());
    }
    ++it->good_shells;
    if (row.ratio > it->max_ratio) {
      it->max_ratio = row.ratio;
      it->argmax = row.n;
    }
  }
  return profile;
}

const DyadicBlock& dyadic_block(const WeylProfile& profile, int k) {
  for (const auto& b : profile.dyadic) {
    if (b.k == k) return b;
  }
  throw DomainError(fmt::format("no good shells in the dyadic block [2^{}, 2^{})", k, k + 1));
}

WeylTable::WeylTable(int lmax, std::uint64_t n_max)
    : lmax_(lmax), n_max_(n_max), slots_(harmonic_count(lmax)) {
  if (lmax < 0) throw ParameterError("WeylTable: lmax must be >= 0");
  values_.assign((n_max + 1) * slots_, Complex(0.0, 0.0));
  r3_.assign(n_max + 1, 0);
  // Neumaier compensation; shells hold thousands of terms of similar size
  std::vector<Complex> carry(values_.size(), Complex(0.0, 0.0));
  auto add = [](double& s, double& c, double v) {
    const double t = s + v;
    c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  };
  const auto stride = static_cast<std::size_t>(lmax + 1);

  // Accumulate m >= 0 only; m < 0 follows from W_{l,-m} = (-1)^m conj(W_{l,m}).
  for_each_shell_range(n_max, [&](std::uint64_t lo, std::uint64_t hi) {
    std::vector<double> p;
    std::vector<Complex> phases(stride);
    std::int64_t last_x = 0;
    std::int64_t last_y = 0;
    bool have_column = false;
    double rho = 0.0;
    visit_lattice_range(lo, hi, [&](std::int64_t x, std::int64_t y, std::int64_t z, std::int64_t n) {
      if (!have_column || x != last_x || y != last_y) {
        rho = std::sqrt(static_cast<double>(x * x + y * y));
        phases[0] = 1.0;
        const Complex base = rho == 0.0 ? Complex(1.0, 0.0)
                                        : Complex(static_cast<double>(x) / rho,
                                                  static_cast<double>(y) / rho);
        for (std::size_t m = 1; m < stride; ++m) phases[m] = phases[m - 1] * base;
        last_x = x;
        last_y = y;
        have_column = true;
      }
      const auto ni = static_cast<std::size_t>(n);
      ++r3_[ni];
      if (n == 0) return;
      const double r = std::sqrt(static_cast<double>(n));
      legendre_table(lmax, static_cast<double>(z) / r, rho / r, p);
      auto* row = reinterpret_cast<double*>(&values_[ni * slots_]);
      auto* comp = reinterpret_cast<double*>(&carry[ni * slots_]);
      for (int m = 0; m <= lmax; ++m) {
        for (int l = m; l <= lmax; ++l) {
          const Complex v = p[static_cast<std::size_t>(l) * stride + static_cast<std::size_t>(m)] *
                            phases[static_cast<std::size_t>(m)];
          const std::size_t k = 2 * harmonic_slot(l, m);
          add(row[k], comp[k], v.real());
          add(row[k + 1], comp[k + 1], v.imag());
        }
      }
    });
  });
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += carry[i];
  for (std::uint64_t n = 0; n <= n_max; ++n) {
    Complex* row = &values_[n * slots_];
    if (n == 0) {
      row[harmonic_slot(0, 0)] = std::sqrt(1.0 / (4.0 * kPi));
      continue;
    }
    for (int l = 1; l <= lmax; ++l) {
      for (int m = 1; m <= l; ++m) {
        row[harmonic_slot(l, -m)] = (m % 2 == 0 ? 1.0 : -1.0) * std::conj(row[harmonic_slot(l, m)]);
      }
    }
  }
}

}  // namespace scatter3d
