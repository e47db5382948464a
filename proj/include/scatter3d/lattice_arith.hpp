#pragma once

// Integer arithmetic of sums of three squares: N3 membership, the r3 sieve,
// sphere-point enumeration, 4-adic decomposition and the good/bad split of
// the shells.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace scatter3d {

struct LatticePoint {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z = 0;

  constexpr std::int64_t norm_sq() const { return x * x + y * y + z * z; }
  constexpr LatticePoint operator+(const LatticePoint& o) const {
    return {x + o.x, y + o.y, z + o.z};
  }
  constexpr LatticePoint operator-() const { return {-x, -y, -z}; }
  constexpr auto operator<=>(const LatticePoint&) const = default;
};

/// n = 4^a * n1 with 4 not dividing n1.
struct FourAdic {
  int a = 0;
  std::uint64_t n1 = 0;
  auto operator<=>(const FourAdic&) const = default;
};

enum class ShellClass { Good, Bad };

std::string_view to_string(ShellClass c);

struct ShellRecord {
  std::uint64_t n = 0;
  int a = 0;
  std::uint64_t n1 = 0;
  bool in_n3 = false;
  std::uint32_t r3 = 0;
  std::optional<ShellClass> klass;  // set only for n >= 1 in N3
};

std::uint64_t isqrt(std::uint64_t n);

/// Throws DomainError for n = 0.
FourAdic decompose_four_adic(std::uint64_t n);

/// Legendre-Gauss: n is a sum of three squares iff n is not 4^a(8k+7).
bool is_sum_of_three_squares(std::uint64_t n);

/// Good iff n1^2 > n, compared in integer arithmetic. Throws DomainError
/// for n = 0 or n not in N3.
ShellClass classify(std::uint64_t n);

/// All integer solutions of x^2 + y^2 + z^2 = n in lexicographic order.
std::vector<LatticePoint> sphere_points(std::uint64_t n);

/// Closest element of N3 to lambda, ties broken downward. lambda < 0 maps to 0.
std::uint64_t nearest_shell(double lambda);

/// Largest element of N3 that is <= n, and smallest that is >= n.
std::uint64_t shell_at_or_below(std::uint64_t n);
std::uint64_t shell_at_or_above(std::uint64_t n);

struct BadCount {
  std::uint64_t x = 0;
  std::uint64_t count = 0;
  double bound = 0.0;  // sqrt(X) * log(X)
};

/// Exact number of bad shells n <= X (X >= 1).
BadCount bad_count(std::uint64_t x);

/// Dense table of r3(n) for 0 <= n <= X.
///
/// Built in one pass over the sector 0 <= x <= y <= z of the ball of radius
/// sqrt(X); each sector point contributes its orbit size under sign changes
/// and coordinate permutations. Immutable once constructed.
class R3Table {
 public:
  static constexpr std::size_t kDefaultMemoryBudget = std::size_t{1} << 30;

  explicit R3Table(std::uint64_t x_max, std::size_t memory_budget_bytes = kDefaultMemoryBudget);

  std::uint64_t x_max() const { return x_max_; }

  /// Unchecked lookup.
  std::uint32_t operator[](std::uint64_t n) const { return counts_[n]; }

  /// Checked lookup; throws DomainError beyond the sieved range.
  std::uint32_t r3(std::uint64_t n) const;

  /// #{xi in Z^3 : |xi|^2 <= n}.
  std::uint64_t cumulative(std::uint64_t n) const;

  ShellRecord record(std::uint64_t n) const;

  /// Elements of N3 in [lo, hi], ascending.
  std::vector<std::uint64_t> shells(std::uint64_t lo, std::uint64_t hi) const;

  const std::vector<std::uint32_t>& counts() const { return counts_; }

 private:
  static constexpr std::uint64_t kBlock = 4096;

  std::uint64_t x_max_;
  std::vector<std::uint32_t> counts_;
  std::vector<std::uint64_t> block_prefix_;  // sum of counts below block start
};

R3Table r3_sieve(std::uint64_t x_max,
                 std::size_t memory_budget_bytes = R3Table::kDefaultMemoryBudget);

/// Calls fn(x, y, z, n) for every xi = (x, y, z) with lo <= n = |xi|^2 <= hi,
/// in lexicographic order of (x, y, z).
template <typename Fn>
void visit_lattice_range(std::uint64_t lo, std::uint64_t hi, Fn&& fn) {
  if (hi < lo) return;
  const auto s = static_cast<std::int64_t>(isqrt(hi));
  const auto h = static_cast<std::int64_t>(hi);
  const auto l = static_cast<std::int64_t>(lo);
  for (std::int64_t x = -s; x <= s; ++x) {
    const auto t = static_cast<std::int64_t>(isqrt(static_cast<std::uint64_t>(h - x * x)));
    for (std::int64_t y = -t; y <= t; ++y) {
      const std::int64_t rho2 = x * x + y * y;
      const auto zmax = static_cast<std::int64_t>(isqrt(static_cast<std::uint64_t>(h - rho2)));
      std::int64_t zmin = 0;
      if (l > rho2) {
        zmin = static_cast<std::int64_t>(isqrt(static_cast<std::uint64_t>(l - rho2 - 1))) + 1;
      }
      if (zmin > zmax) continue;
      for (std::int64_t z = -zmax; z <= -zmin; ++z) fn(x, y, z, rho2 + z * z);
      for (std::int64_t z = zmin == 0 ? 1 : zmin; z <= zmax; ++z) fn(x, y, z, rho2 + z * z);
    }
  }
}

/// Arithmetic-only shell record (no sieve); r3 is left at zero.
ShellRecord shell_record_without_count(std::uint64_t n);

}  // namespace scatter3d
