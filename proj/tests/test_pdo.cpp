#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "scatter3d/errors.hpp"
#include "scatter3d/pdo.hpp"
#include "scatter3d/quadrature.hpp"

using namespace scatter3d;

namespace {

constexpr double kPi = std::numbers::pi;

const R3Table& table() {
  static const R3Table t = r3_sieve(200'000);
  return t;
}

BandSymbol random_symbol(std::mt19937_64& rng, int lmax, int zmax, int count) {
  std::uniform_int_distribution<int> zd(-zmax, zmax);
  std::uniform_int_distribution<int> ld(0, lmax);
  std::normal_distribution<double> g;
  std::vector<Mode> modes;
  for (int i = 0; i < count; ++i) {
    const int l = ld(rng);
    std::uniform_int_distribution<int> md(-l, l);
    modes.push_back({{zd(rng), zd(rng), zd(rng)}, l, md(rng), {g(rng), g(rng)}});
  }
  return BandSymbol(modes);
}

TorusPoint random_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  return {u(rng), u(rng), u(rng)};
}

}  // namespace

TEST_CASE("symbol construction") {
  const BandSymbol s({{{1, 0, 0}, 2, 1, 1.0}, {{0, 0, 0}, 0, 0, 2.0}, {{1, 0, 0}, 2, 1, 0.5}});
  REQUIRE(s.modes().size() == 2);
  CHECK(s.coefficient({1, 0, 0}, 2, 1) == Complex(1.5));
  CHECK(s.max_l() == 2);
  CHECK(s.max_zeta_sq() == 1);
  CHECK_FALSE(s.is_multiplier());
  CHECK_THROWS_AS(BandSymbol({{{0, 0, 0}, 1, 2, 1.0}}), ParameterError);
  const BandSymbol id = BandSymbol::identity();
  CHECK(id.value_at({1.0, 2.0, 3.0}, {0.0, 0.6, 0.8}).real() == doctest::Approx(1.0));
  CHECK(id.value({0.0, 0.0, 0.0}, {0, 0, 0}).real() == doctest::Approx(1.0));
  CHECK(BandSymbol::basis({}, 2, 0).value({}, {0, 0, 0}) == Complex(0.0));
}

TEST_CASE("symbol json round trip") {
  std::mt19937_64 rng(11);
  BandSymbol s = random_symbol(rng, 4, 2, 12);
  s.name = "rt";
  const BandSymbol t = parse_symbol(dump_symbol(s));
  CHECK(t.name == "rt");
  REQUIRE(t.modes().size() == s.modes().size());
  for (std::size_t i = 0; i < s.modes().size(); ++i) {
    CHECK(t.modes()[i].zeta == s.modes()[i].zeta);
    CHECK(t.modes()[i].c == s.modes()[i].c);
  }
  CHECK_THROWS_AS(parse_symbol("{\"modes\": [{\"l\": 1}]}"), ConfigError);
  CHECK_THROWS_AS(parse_symbol("not json"), ConfigError);
  CHECK_THROWS_AS(load_symbol("/nonexistent/symbol.json"), ConfigError);
}

TEST_CASE("matrix element: lattice route vs grid oracle") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ul(20.0, 250.0);
  std::uniform_real_distribution<double> ud(0.2, 0.5);
  for (int trial = 0; trial < 25; ++trial) {
    const double lambda = std::floor(ul(rng)) + 0.5;
    const double width = std::pow(lambda, ud(rng));
    const TorusPoint x0 = random_point(rng);
    const BandSymbol sym = random_symbol(rng, 4, 2, 6);
    const auto tg = build_truncated(lambda, width, x0, table());
    const auto me = matrix_element(sym, lambda, width, x0);
    const Complex grid = oracle::grid_matrix_element(sym, tg, oracle::exact_grid_size(sym, tg));
    CHECK(std::abs(me.value - grid) < 1e-10);
    CHECK(me.norm_sq == doctest::Approx(tg.norm_trunc_sq).epsilon(1e-12));
    CHECK(me.points == tg.coeffs.size());
  }
}

TEST_CASE("matrix element: xi = 0 in the annulus") {
  const double lambda = 0.5;
  const double width = 1.0;
  const TorusPoint x0{0.3, 0.1, 2.0};
  const auto tg = build_truncated(lambda, width, x0, table());
  REQUIRE(tg.coeffs.size() == 7);
  for (const BandSymbol& sym :
       {BandSymbol::basis({}, 2, 0), BandSymbol::basis({}, 4, 0), BandSymbol::basis({}, 0, 0),
        BandSymbol::basis({1, 0, 0}, 0, 0), BandSymbol::basis({1, 0, 0}, 1, 1),
        BandSymbol::basis({0, 1, 0}, 2, -1)}) {
    const auto me = matrix_element(sym, lambda, width, x0);
    CHECK(std::abs(me.value - oracle::grid_matrix_element(sym, tg, 8)) < 1e-12);
  }
  // on the zero shell only Y_{0,0} survives; shell 1 has W_{2,0} = 0
  CHECK(std::abs(matrix_element(BandSymbol::basis({}, 2, 0), lambda, width, x0).value) < 1e-14);
  CHECK_THROWS_AS(matrix_element(BandSymbol::identity(), 111.5, 1.0001, x0), EmptyAnnulus);
}

TEST_CASE("identity, Hermitian pairing and translation covariance") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const double lambda = 400.5 + 37.0 * trial;
    const double width = std::pow(lambda, 0.3);
    const TorusPoint x0 = random_point(rng);
    CHECK(matrix_element(BandSymbol::identity(), lambda, width, x0).value.real() ==
          doctest::Approx(1.0).epsilon(1e-13));
    for (int l = 0; l <= 3; ++l) {
      for (int m = -l; m <= l; ++m) {
        const BandSymbol s = BandSymbol::basis({1, -1, 0}, l, m, Complex(0.3, 0.7));
        const Complex a = matrix_element(s, lambda, width, x0).value;
        const Complex b = matrix_element(s.conjugate_reflected(), lambda, width, x0).value;
        const double sign = (l % 2 == 0) ? 1.0 : -1.0;
        CHECK(std::abs(b - sign * std::conj(a)) < 1e-13);
      }
    }
    const LatticePoint zeta{2, 0, -1};
    const TorusPoint v = random_point(rng);
    const BandSymbol s = BandSymbol::basis(zeta, 2, 1);
    const Complex a = matrix_element(s, lambda, width, x0).value;
    const Complex b = matrix_element(s, lambda, width, {x0.x + v.x, x0.y + v.y, x0.z + v.z}).value;
    const Complex phase = std::polar(1.0, 2.0 * v.x - v.z);
    CHECK(std::abs(b - phase * a) < 1e-12);
  }
}

TEST_CASE("quantization on band functions") {
  std::mt19937_64 rng(41);
  const TorusPoint x0 = random_point(rng);
  const auto tg = build_truncated(90.5, 4.0, x0, table());
  const BandFunction g = to_band_function(tg);
  CHECK(g.norm_sq() == doctest::Approx(1.0).epsilon(1e-13));
  const BandFunction ig = quantize_apply(BandSymbol::identity(), g);
  for (const auto& [xi, c] : g.fourier) CHECK(std::abs(ig.fourier.at(xi) - c) < 1e-15);

  // third route to the matrix element
  for (int trial = 0; trial < 5; ++trial) {
    const BandSymbol sym = random_symbol(rng, 3, 1, 5);
    const Complex via_apply = inner_product(quantize_apply(sym, g), g);
    CHECK(std::abs(via_apply - matrix_element(sym, 90.5, 4.0, x0).value) < 1e-12);
  }

  // a zeta shift moves Fourier support by zeta
  const BandFunction sg = quantize_apply(BandSymbol::basis({1, 0, 0}, 0, 0, 2.0 * std::sqrt(kPi)), g);
  for (const auto& [xi, c] : g.fourier) {
    CHECK(std::abs(sg.fourier.at(LatticePoint{xi.x + 1, xi.y, xi.z}) - c) < 1e-15);
  }

  // xi_1/|xi| against -i d/dx_1 / sqrt(n) on a single shell
  BandFunction f;
  std::normal_distribution<double> nd;
  for (const auto& p : sphere_points(50)) f.fourier[p] = {nd(rng), nd(rng)};
  const double r = std::sqrt(2.0 * kPi / 3.0);
  const BandSymbol u1({{{}, 1, -1, r}, {{}, 1, 1, -r}});
  const BandFunction h = quantize_apply(u1, f);
  for (const auto& [xi, c] : f.fourier) {
    const Complex deriv = static_cast<double>(xi.x) * c / std::sqrt(50.0);
    CHECK(std::abs(h.fourier.at(xi) - deriv) < 1e-13);
  }
  CHECK(std::abs(h(x0) - ([&] {
          Complex s = 0.0;
          for (const auto& [xi, c] : f.fourier) {
            s += static_cast<double>(xi.x) / std::sqrt(50.0) * c *
                 std::polar(1.0, xi.x * x0.x + xi.y * x0.y + xi.z * x0.z);
          }
          return s;
        })()) < 1e-12);
}

TEST_CASE("Liouville average against a phase-space quadrature") {
  std::mt19937_64 rng(51);
  const SphereRule rule = sphere_rule(8, 16);
  for (int trial = 0; trial < 3; ++trial) {
    const BandSymbol sym = random_symbol(rng, 4, 2, 10);
    const int n = 6;
    Complex s = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          const TorusPoint x{2.0 * kPi * i / n, 2.0 * kPi * j / n, 2.0 * kPi * k / n};
          for (std::size_t q = 0; q < rule.points.size(); ++q) {
            s += rule.weights[q] * sym.value_at(x, rule.points[q]);
          }
        }
      }
    }
    s /= static_cast<double>(n * n * n) * 4.0 * kPi;
    CHECK(std::abs(s - liouville_average(sym)) < 1e-12);
  }
  CHECK(liouville_average(BandSymbol::identity()).real() == doctest::Approx(1.0));
}

TEST_CASE("symbol projection") {
  std::mt19937_64 rng(61);
  std::vector<Mode> modes;
  std::normal_distribution<double> nd;
  for (const LatticePoint z : {LatticePoint{0, 0, 0}, LatticePoint{1, 0, 0}, LatticePoint{0, -1, 0},
                               LatticePoint{0, 0, 1}}) {
    for (int l = 0; l <= 3; ++l) {
      for (int m = -l; m <= l; ++m) modes.push_back({z, l, m, {nd(rng), nd(rng)}});
    }
  }
  const BandSymbol sym(modes);
  const SymbolSampler sampler = [&](const TorusPoint& x, const std::array<double, 3>& u) {
    return sym.value_at(x, u);
  };
  const BandSymbol back = symbol_project(sampler, 1, 3);
  REQUIRE(back.modes().size() == sym.modes().size());
  for (std::size_t i = 0; i < sym.modes().size(); ++i) {
    CHECK(back.modes()[i].zeta == sym.modes()[i].zeta);
    CHECK(std::abs(back.modes()[i].c - sym.modes()[i].c) < 1e-12);
  }
  const auto grid = nyquist_grid(1, 3);
  CHECK(grid.torus_points == 3);
  CHECK_THROWS_AS(symbol_project(sampler, 1, 3, {2, 4, 7}), ParameterError);
  CHECK_THROWS_AS(symbol_project(sampler, 1, 3, {3, 3, 7}), ParameterError);
  CHECK_THROWS_AS(symbol_project(sampler, 1, 3, {3, 4, 6}), ParameterError);

  // the shipped smooth observable is the projection of cos(x1) u3^2
  const BandSymbol shipped = load_symbol(std::string(SCATTER3D_OBSERVABLES) + "/smooth_cosx1_u3sq.json");
  const BandSymbol projected = symbol_project(
      [](const TorusPoint& x, const std::array<double, 3>& u) { return Complex(std::cos(x.x) * u[2] * u[2]); },
      1, 2);
  REQUIRE(projected.modes().size() == shipped.modes().size());
  for (std::size_t i = 0; i < shipped.modes().size(); ++i) {
    CHECK(projected.modes()[i].zeta == shipped.modes()[i].zeta);
    CHECK(projected.modes()[i].l == shipped.modes()[i].l);
    CHECK(std::abs(projected.modes()[i].c - shipped.modes()[i].c) < 1e-13);
  }
}

TEST_CASE("multiplier operator norm") {
  CHECK(multiplier_operator_norm(BandSymbol::identity()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(multiplier_operator_norm(BandSymbol::basis({}, 2, 0)) ==
        doctest::Approx(std::sqrt(5.0 / (4.0 * kPi))).epsilon(1e-9));
  CHECK_THROWS_AS(multiplier_operator_norm(BandSymbol::basis({1, 0, 0}, 0, 0)), ParameterError);
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 3; ++trial) {
    const BandSymbol sym = random_symbol(rng, 5, 0, 8);
    const double norm = multiplier_operator_norm(sym);
    CHECK(norm <= operator_norm_bound(sym) + 1e-12);
    // Rayleigh quotients of Op(a) on single-shell functions stay below the norm
    BandFunction f;
    std::normal_distribution<double> nd;
    for (const auto& p : sphere_points(41)) f.fourier[p] = {nd(rng), nd(rng)};
    const BandFunction af = quantize_apply(sym, f);
    CHECK(std::sqrt(af.norm_sq() / f.norm_sq()) <= norm + 1e-9);
    // and the sup is attained up to the search tolerance
    double best = 0.0;
    const SphereRule rule = sphere_rule(200, 400);
    for (const auto& p : rule.points) best = std::max(best, std::abs(sym.value_at({}, p)));
    CHECK(norm >= best - 1e-9);
    CHECK(norm <= best * (1.0 + 1e-3));
  }
}

TEST_CASE("difference operators") {
  const auto constant = [](const LatticePoint&) { return Complex(3.0); };
  const auto linear = [](const LatticePoint& xi) { return Complex(static_cast<double>(2 * xi.x - xi.z)); };
  const SymbolTable ct = SymbolTable::sample(constant, {-3, -3, -3}, {3, 3, 3});
  const SymbolTable d1 = difference_symbol(ct, {1, 0, 0});
  CHECK(d1.hi() == LatticePoint{2, 3, 3});
  CHECK(d1.at({0, 0, 0}) == Complex(0.0));
  const SymbolTable lt = SymbolTable::sample(linear, {-3, -3, -3}, {3, 3, 3});
  CHECK(difference_symbol(lt, {1, 0, 0}).at({1, 2, -1}) == Complex(2.0));
  CHECK(difference_symbol(lt, {0, 0, 1}).at({1, 2, -1}) == Complex(-1.0));
  CHECK(difference_symbol(lt, {2, 0, 0}).at({0, 0, 0}) == Complex(0.0));
  CHECK_THROWS_AS(difference_symbol(ct, {7, 0, 0}), DomainError);

  const auto y20 = [](const LatticePoint& xi) {
    return BandSymbol::basis({}, 2, 0).value({}, xi);
  };
  // a homogeneous symbol of degree 0: |Delta^alpha a| ~ R^{-|alpha|}
  double prev1 = 0.0;
  double prev2 = 0.0;
  for (double r : {8.0, 16.0, 32.0, 64.0}) {
    const double m1 = difference_band_max(y20, {1, 0, 0}, r);
    const double m2 = difference_band_max(y20, {1, 0, 1}, r);
    CHECK(m1 * r < 2.0);
    CHECK(m2 * r * r < 4.0);
    if (prev1 > 0.0) {
      CHECK(prev1 / m1 == doctest::Approx(2.0).epsilon(0.25));
      CHECK(prev2 / m2 == doctest::Approx(4.0).epsilon(0.35));
    }
    prev1 = m1;
    prev2 = m2;
  }
  // band maximum vs explicit table route
  const double r = 10.0;
  const SymbolTable yt = SymbolTable::sample(y20, {-21, -21, -21}, {21, 21, 21});
  const SymbolTable dt = difference_symbol(yt, {0, 1, 1});
  double best = 0.0;
  for (int x = -20; x <= 19; ++x) {
    for (int y = -20; y <= 19; ++y) {
      for (int z = -20; z <= 19; ++z) {
        const double n = std::sqrt(static_cast<double>(x * x + y * y + z * z));
        if (n >= r && n < 2.0 * r) best = std::max(best, std::abs(dt.at({x, y, z})));
      }
    }
  }
  CHECK(difference_band_max(y20, {0, 1, 1}, r) == doctest::Approx(best).epsilon(1e-14));
}
