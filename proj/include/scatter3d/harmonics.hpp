#pragma once

// Complex spherical harmonics (Condon-Shortley phase, unit L^2 norm for the
// surface measure of S^2) and their Weyl sums over lattice points on spheres.

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "scatter3d/lattice_arith.hpp"

namespace scatter3d {

using Complex = std::complex<double>;

struct HarmonicIndex {
  int l = 0;
  int m = 0;

  /// Throws ParameterError unless l >= 0 and |m| <= l.
  void validate() const;
  auto operator<=>(const HarmonicIndex&) const = default;
};

/// Position of (l, m) in a packed table of all harmonics of degree <= lmax.
constexpr std::size_t harmonic_slot(int l, int m) {
  return static_cast<std::size_t>(l * l + l + m);
}
constexpr std::size_t harmonic_count(int lmax) {
  return static_cast<std::size_t>((lmax + 1) * (lmax + 1));
}

/// Y_{l,m}(u) for a unit vector u; throws DomainError if | |u| - 1 | > 1e-12.
Complex ylm(HarmonicIndex idx, const std::array<double, 3>& u);

/// Y_{l,m}(v / |v|) for any nonzero vector v.
Complex ylm_direction(HarmonicIndex idx, double x, double y, double z);

/// All Y_{l,m}(v / |v|), l <= lmax, written to out[harmonic_slot(l, m)].
void ylm_all(int lmax, double x, double y, double z, std::span<Complex> out);

/// Maximum of |Y_{l,m}| over S^2 (attained on the theta grid of the
/// Legendre factor, since |e^{i m phi}| = 1).
double ylm_sup(HarmonicIndex idx);

/// W_{l,m}(n) = sum_{|xi|^2 = n} Y_{l,m}(xi / |xi|). Throws DomainError for
/// n = 0 or n not in N3.
Complex weyl_sum(HarmonicIndex idx, std::uint64_t n);

struct WeylRow {
  std::uint64_t n = 0;
  int a = 0;
  std::uint64_t n1 = 0;
  std::uint32_t r3 = 0;
  ShellClass klass = ShellClass::Good;
  Complex w;
  double ratio = 0.0;  // |W| / r3
};

struct DyadicBlock {
  int k = 0;  // block [2^k, 2^{k+1})
  std::size_t good_shells = 0;
  double max_ratio = 0.0;
  std::uint64_t argmax = 0;
};

struct WeylProfile {
  HarmonicIndex idx;
  std::vector<WeylRow> rows;          // n in N3, 1 <= n <= n_max
  std::vector<DyadicBlock> dyadic;    // maxima over good shells only
};

/// Profile of one harmonic over all shells up to n_max (>= 100), built in a
/// single pass over the lattice ball.
WeylProfile weyl_profile(HarmonicIndex idx, std::uint64_t n_max);

/// Largest ratio over good shells in [2^k, 2^{k+1}); throws if none.
const DyadicBlock& dyadic_block(const WeylProfile& profile, int k);

/// Weyl sums of every harmonic with l <= lmax on every shell n <= n_max,
/// from one pass over the lattice ball. W at n = 0 follows the xi = 0
/// convention: Y_{0,0} for (0, 0), zero otherwise.
class WeylTable {
 public:
  WeylTable(int lmax, std::uint64_t n_max);

  int lmax() const { return lmax_; }
  std::uint64_t n_max() const { return n_max_; }
  Complex operator()(HarmonicIndex idx, std::uint64_t n) const {
    return values_[n * slots_ + harmonic_slot(idx.l, idx.m)];
  }
  std::uint32_t r3(std::uint64_t n) const { return r3_[n]; }

 private:
  int lmax_;
  std::uint64_t n_max_;
  std::size_t slots_;
  std::vector<Complex> values_;
  std::vector<std::uint32_t> r3_;
};

}  // namespace scatter3d
