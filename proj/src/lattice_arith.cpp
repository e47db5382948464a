#include "scatter3d/lattice_arith.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "scatter3d/errors.hpp"
#include "scatter3d/parallel.hpp"

namespace scatter3d {

std::string_view to_string(ShellClass c) { return c == ShellClass::Good ? "good" : "bad"; }

std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

FourAdic decompose_four_adic(std::uint64_t n) {
  if (n == 0) throw DomainError("decompose_four_adic: n = 0 has no 4-adic decomposition");
  FourAdic d{0, n};
  while (d.n1 % 4 == 0) {
    d.n1 /= 4;
    ++d.a;
  }
  return d;
}

bool is_sum_of_three_squares(std::uint64_t n) {
  if (n == 0) return true;
  return decompose_four_adic(n).n1 % 8 != 7;
}

ShellClass classify(std::uint64_t n) {
  if (n == 0) throw DomainError("classify: n = 0 has no good/bad class");
  const auto d = decompose_four_adic(n);
  if (d.n1 % 8 == 7) throw DomainError(fmt::format("classify: {} is not a sum of three squares", n));
  // n1^2 > n  <=>  n1 > floor(n / n1); the division form cannot overflow.
  return d.n1 > n / d.n1 ? ShellClass::Good : ShellClass::Bad;
}

std::vector<LatticePoint> sphere_points(std::uint64_t n) {
  std::vector<LatticePoint> pts;
  if (!is_sum_of_three_squares(n)) return pts;
  const auto s = static_cast<std::int64_t>(isqrt(n));
  const auto nn = static_cast<std::int64_t>(n);
  for (std::int64_t x = -s; x <= s; ++x) {
    const std::int64_t rem = nn - x * x;
    const auto t = static_cast<std::int64_t>(isqrt(static_cast<std::uint64_t>(rem)));
    for (std::int64_t y = -t; y <= t; ++y) {
      const std::int64_t r2 = rem - y * y;
      const auto z = static_cast<std::int64_t>(isqrt(static_cast<std::uint64_t>(r2)));
      if (z * z != r2) continue;
      if (z == 0) {
        pts.push_back({x, y, 0});
      } else {
        pts.push_back({x, y, -z});
        pts.push_back({x, y, z});
      }
    }
  }
  return pts;
}

std::uint64_t shell_at_or_below(std::uint64_t n) {
  while (!is_sum_of_three_squares(n)) --n;  // terminates at 0 at the latest
  return n;
}

std::uint64_t shell_at_or_above(std::uint64_t n) {
  while (!is_sum_of_three_squares(n)) ++n;
  return n;
}

std::uint64_t nearest_shell(double lambda) {
  if (!(lambda > 0.0)) return 0;
  const auto lo = shell_at_or_below(static_cast<std::uint64_t>(std::floor(lambda)));
  const auto hi = shell_at_or_above(static_cast<std::uint64_t>(std::ceil(lambda)));
  const double d_lo = lambda - static_cast<double>(lo);
  const double d_hi = static_cast<double>(hi) - lambda;
  return d_hi < d_lo ? hi : lo;
}

BadCount bad_count(std::uint64_t x) {
  if (x == 0) throw DomainError("bad_count: X must be >= 1");
  // Bad n = 4^a n1 with n1^2 <= 4^a n1, i.e. n1 <= 4^a; count admissible n1
  // (4 does not divide n1, n1 != 7 mod 8) with n1 <= min(4^a, X / 4^a).
  std::uint64_t count = 0;
  for (std::uint64_t p = 1; p <= x; p *= 4) {
    const std::uint64_t limit = std::min(p, x / p);
    for (std::uint64_t n1 = 1; n1 <= limit; ++n1) {
      if (n1 % 4 != 0 && n1 % 8 != 7) ++count;
    }
    if (p > x / 4) break;
  }
  const double xd = static_cast<double>(x);
  return {x, count, std::sqrt(xd) * std::log(xd)};
}

ShellRecord shell_record_without_count(std::uint64_t n) {
  ShellRecord rec;
  rec.n = n;
  rec.in_n3 = is_sum_of_three_squares(n);
  if (n > 0) {
    const auto d = decompose_four_adic(n);
    rec.a = d.a;
    rec.n1 = d.n1;
    if (rec.in_n3) rec.klass = classify(n);
  }
  return rec;
}

R3Table::R3Table(std::uint64_t x_max, std::size_t memory_budget_bytes) : x_max_(x_max) {
  const std::uint64_t entries = x_max + 1;
  const std::uint64_t required = entries * sizeof(std::uint32_t);
  if (required > memory_budget_bytes) {
    throw ResourceError(fmt::format(
        "r3 sieve up to X = {} needs {} bytes, memory budget is {} bytes", x_max, required,
        memory_budget_bytes));
  }
  counts_.assign(entries, 0);

  std::uint64_t x_rows = 0;
  while (3 * x_rows * x_rows <= x_max) ++x_rows;

  // One partial table per worker, as many as the budget allows.
  const auto by_budget = std::max<std::uint64_t>(1, memory_budget_bytes / required);
  const auto workers = static_cast<unsigned>(
      std::min<std::uint64_t>({thread_count(), by_budget, std::max<std::uint64_t>(1, x_rows)}));
  std::vector<std::vector<std::uint32_t>> partial(workers > 1 ? workers - 1 : 0);
  for (auto& p : partial) p.assign(entries, 0);

  parallel_for(
      x_rows,
      [&](unsigned worker, std::size_t xi) {
        std::uint32_t* out = worker == 0 ? counts_.data() : partial[worker - 1].data();
        const std::uint64_t x = xi;
        const std::uint32_t sx = x > 0 ? 2 : 1;
        for (std::uint64_t y = x; x * x + 2 * y * y <= x_max; ++y) {
          const std::uint32_t sy = y > 0 ? 2 : 1;
          const std::uint64_t base = x * x + y * y;
          // z == y
          out[base + y * y] += (x == y ? 1u : 3u) * sx * sy * sy;
          // z > y: orbit has 3 (x == y) or 6 permutations and z contributes a sign.
          const std::uint32_t w = (x == y ? 3u : 6u) * sx * sy * 2u;
          std::uint64_t z = y + 1;
          std::uint64_t n = base + z * z;
          while (n <= x_max) {
            out[n] += w;
            n += 2 * z + 1;
            ++z;
          }
        }
      },
      workers);
  for (const auto& p : partial) {
    for (std::uint64_t n = 0; n < entries; ++n) counts_[n] += p[n];
  }

  block_prefix_.assign(entries / kBlock + 2, 0);
  std::uint64_t running = 0;
  for (std::uint64_t n = 0; n < entries; ++n) {
    if (n % kBlock == 0) block_prefix_[n / kBlock] = running;
    running += counts_[n];
  }
}

std::uint32_t R3Table::r3(std::uint64_t n) const {
  if (n > x_max_) {
    throw DomainError(fmt::format("r3({}) requested beyond sieve range X = {}", n, x_max_));
  }
  return counts_[n];
}

std::uint64_t R3Table::cumulative(std::uint64_t n) const {
  if (n > x_max_) {
    throw DomainError(fmt::format("cumulative r3 up to {} beyond sieve range X = {}", n, x_max_));
  }
  const std::uint64_t block = n / kBlock;
  std::uint64_t sum = block_prefix_[block];
  for (std::uint64_t m = block * kBlock; m <= n; ++m) sum += counts_[m];
  return sum;
}

ShellRecord R3Table::record(std::uint64_t n) const {
  auto rec = shell_record_without_count(n);
  rec.r3 = r3(n);
  return rec;
}

std::vector<std::uint64_t> R3Table::shells(std::uint64_t lo, std::uint64_t hi) const {
  std::vector<std::uint64_t> out;
  hi = std::min(hi, x_max_);
  for (std::uint64_t n = lo; n <= hi; ++n) {
    if (counts_[n] > 0) out.push_back(n);
  }
  return out;
}

R3Table r3_sieve(std::uint64_t x_max, std::size_t memory_budget_bytes) {
  return R3Table(x_max, memory_budget_bytes);
}

}  // namespace scatter3d
