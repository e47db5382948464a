#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "scatter3d/errors.hpp"
#include "scatter3d/lattice_arith.hpp"

using namespace scatter3d;

TEST_CASE("four-adic decomposition") {
  CHECK(decompose_four_adic(28) == FourAdic{1, 7});
  CHECK(decompose_four_adic(5) == FourAdic{0, 5});
  CHECK(decompose_four_adic(64) == FourAdic{3, 1});
  CHECK_THROWS_AS(decompose_four_adic(0), DomainError);
  for (std::uint64_t n = 1; n < 5000; ++n) {
    const auto d = decompose_four_adic(n);
    CHECK(d.n1 % 4 != 0);
    CHECK((std::uint64_t{1} << (2 * d.a)) * d.n1 == n);
  }
}

TEST_CASE("sums of three squares") {
  CHECK_FALSE(is_sum_of_three_squares(7));
  CHECK(is_sum_of_three_squares(0));
  CHECK_FALSE(is_sum_of_three_squares(28));
  const auto brute = oracle::brute_r3(3000);
  for (std::uint64_t n = 0; n <= 3000; ++n) CHECK(is_sum_of_three_squares(n) == (brute[n] > 0));
}

TEST_CASE("r3 sieve against the triple loop") {
  const auto table = r3_sieve(2000);
  const auto brute = oracle::brute_r3(2000);
  CHECK(table.r3(1) == 6);
  CHECK(table.r3(2) == 12);
  CHECK(table.r3(0) == 1);
  for (std::uint64_t n = 0; n <= 2000; ++n) REQUIRE(table[n] == brute[n]);
  CHECK_THROWS_AS(table.r3(2001), DomainError);
}

TEST_CASE("r3 is invariant under n -> 4n") {
  const auto table = r3_sieve(40000);
  for (std::uint64_t n = 0; 4 * n <= 40000; ++n) REQUIRE(table[4 * n] == table[n]);
  CHECK(table[12] == table[3]);
}

TEST_CASE("cumulative counts match ball enumeration and volume") {
  const auto table = r3_sieve(20000);
  for (std::uint64_t x : {0ull, 1ull, 2ull, 10ull, 4095ull, 4096ull, 4097ull, 10000ull, 20000ull}) {
    CHECK(table.cumulative(x) == oracle::ball_count(x));
  }
  for (std::uint64_t x : {10000ull, 20000ull}) {
    const double vol = 4.0 / 3.0 * std::numbers::pi * std::pow(static_cast<double>(x), 1.5);
    CHECK(std::abs(static_cast<double>(table.cumulative(x)) / vol - 1.0) < 0.02);
  }
}

TEST_CASE("sieve respects the memory budget") {
  CHECK_THROWS_AS(R3Table(1'000'000, 1000), ResourceError);
  try {
    R3Table t(1'000'000, 1000);
  } catch (const ResourceError& e) {
    CHECK(std::string(e.what()).find("bytes") != std::string::npos);
  }
}

TEST_CASE("sphere points") {
  CHECK(sphere_points(0) == std::vector<LatticePoint>{{0, 0, 0}});
  CHECK(sphere_points(1).size() == 6);
  CHECK(sphere_points(7).empty());
  const auto table = r3_sieve(3000);
  for (std::uint64_t n = 0; n <= 3000; ++n) {
    const auto pts = sphere_points(n);
    REQUIRE(pts.size() == table[n]);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK(static_cast<std::uint64_t>(pts[i].norm_sq()) == n);
      if (i > 0) CHECK(pts[i - 1] < pts[i]);
    }
  }
}

TEST_CASE("good and bad shells") {
  CHECK(classify(5) == ShellClass::Good);
  CHECK(classify(4) == ShellClass::Bad);
  CHECK(classify(48) == ShellClass::Bad);
  CHECK(classify(1) == ShellClass::Bad);  // 1 = 1^2 is not > 1
  CHECK_THROWS_AS(classify(0), DomainError);
  CHECK_THROWS_AS(classify(7), DomainError);
  CHECK_THROWS_AS(classify(28), DomainError);
  // Perfect squares: n = 4^a with n1 = 1, and n = 4 * 9 with n1 = 9 > 6.
  CHECK(classify(36) == ShellClass::Good);
  CHECK(classify(16) == ShellClass::Bad);
  for (std::uint64_t n = 1; n < 20000; ++n) {
    if (!is_sum_of_three_squares(n)) continue;
    const auto d = decompose_four_adic(n);
    const bool good = static_cast<double>(d.n1) > std::sqrt(static_cast<double>(n)) &&
                      d.n1 * d.n1 > n;
    REQUIRE((classify(n) == ShellClass::Good) == good);
    if (d.a == 0 && n > 1) {
      CHECK(classify(n) == ShellClass::Good);
      const bool good4 = d.n1 * d.n1 > 4 * n;
      CHECK((classify(4 * n) == ShellClass::Good) == good4);
    }
  }
}

TEST_CASE("bad shell counts") {
  auto brute = [](std::uint64_t x) {
    std::uint64_t c = 0;
    for (std::uint64_t n = 1; n <= x; ++n) {
      if (is_sum_of_three_squares(n) && classify(n) == ShellClass::Bad) ++c;
    }
    return c;
  };
  for (std::uint64_t x : {1ull, 2ull, 3ull, 4ull, 5ull, 16ull, 100ull, 1000ull, 12345ull}) {
    CHECK(bad_count(x).count == brute(x));
  }
  // n = 1 counts as bad: 1 is not greater than sqrt(1).
  CHECK(bad_count(3).count == 1);
  CHECK(bad_count(4).count == 2);
  for (std::uint64_t x : {1000ull, 10000ull, 100000ull, 1000000ull}) {
    const auto bc = bad_count(x);
    CHECK(static_cast<double>(bc.count) <= bc.bound);
  }
  CHECK_THROWS_AS(bad_count(0), DomainError);
}

TEST_CASE("nearest shell") {
  CHECK(nearest_shell(2.5) == 2);
  CHECK(nearest_shell(6.9) == 6);
  CHECK(nearest_shell(0.2) == 0);
  CHECK(nearest_shell(7.0) == 6);
  CHECK(nearest_shell(-3.0) == 0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(1.0, 1e6);
  for (int i = 0; i < 10000; ++i) {
    const double l = dist(rng);
    const auto n = nearest_shell(l);
    REQUIRE(is_sum_of_three_squares(n));
    CHECK(std::abs(static_cast<double>(n) - l) <= 1.5);
    // no element of N3 strictly closer
    const auto lo = shell_at_or_below(static_cast<std::uint64_t>(std::floor(l)));
    const auto hi = shell_at_or_above(static_cast<std::uint64_t>(std::ceil(l)));
    const double best = std::min(l - static_cast<double>(lo), static_cast<double>(hi) - l);
    CHECK(std::abs(static_cast<double>(n) - l) == best);
  }
}

TEST_CASE("shell records") {
  const auto table = r3_sieve(100);
  const auto r = table.record(28);
  CHECK(r.a == 1);
  CHECK(r.n1 == 7);
  CHECK_FALSE(r.in_n3);
  CHECK(r.r3 == 0);
  CHECK_FALSE(r.klass.has_value());
  const auto z = table.record(0);
  CHECK(z.in_n3);
  CHECK(z.r3 == 1);
  CHECK_FALSE(z.klass.has_value());
  const auto s = table.shells(5, 16);
  CHECK(s == std::vector<std::uint64_t>{5, 6, 8, 9, 10, 11, 12, 13, 14, 16});
}
