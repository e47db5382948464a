#pragma once

// Toroidal quantization of band-limited symbols on T^3 x S^2,
//
//   a(x, xi) = sum c_{zeta,l,m} e^{i zeta.x} Y_{l,m}(xi / |xi|),
//   Op(a) f(x) = sum_xi e^{i x.xi} a(x, xi) f^(xi),
//
// and matrix elements against truncated Green's functions. At xi = 0 only
// the (l, m) = (0, 0) modes are kept, with value Y_{0,0}.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "scatter3d/green.hpp"
#include "scatter3d/harmonics.hpp"
#include "scatter3d/lattice_arith.hpp"
#include "scatter3d/torus.hpp"

namespace scatter3d {

/// Y_{0,0} = 1 / (2 sqrt(pi)).
double y00();

struct Mode {
  LatticePoint zeta;
  int l = 0;
  int m = 0;
  Complex c;
};

class BandSymbol {
 public:
  BandSymbol() = default;

  /// Duplicate (zeta, l, m) entries are added together; modes are kept
  /// sorted by (zeta, l, m). Throws ParameterError on |m| > l.
  explicit BandSymbol(std::vector<Mode> modes);

  /// c_{0,0,0} = 2 sqrt(pi), so a = 1.
  static BandSymbol identity();
  static BandSymbol basis(LatticePoint zeta, int l, int m, Complex c = 1.0);

  const std::vector<Mode>& modes() const { return modes_; }
  bool empty() const { return modes_.empty(); }
  int max_l() const;
  std::int64_t max_zeta_sq() const;
  bool is_multiplier() const;  // every mode has zeta = 0
  Complex coefficient(const LatticePoint& zeta, int l, int m) const;

  /// a(x, u) for a unit vector u.
  Complex value_at(const TorusPoint& x, const std::array<double, 3>& u) const;
  /// a(x, xi) on the lattice, with the xi = 0 rule.
  Complex value(const TorusPoint& x, const LatticePoint& xi) const;

  /// (zeta, l, m, c) -> (-zeta, l, -m, (-1)^m conj(c)).
  BandSymbol conjugate_reflected() const;

  std::string name;

 private:
  std::vector<Mode> modes_;
};

/// {"modes": [{"zeta": [z1, z2, z3], "l": L, "m": M, "re": r, "im": i}, ...]}
/// with an optional "name". Throws ConfigError on unreadable or malformed input.
BandSymbol parse_symbol(const std::string& text);
BandSymbol load_symbol(const std::string& path);
std::string dump_symbol(const BandSymbol& sym);

/// Finite Fourier series f(x) = sum f^(xi) e^{i xi.x}.
struct BandFunction {
  std::map<LatticePoint, Complex> fourier;

  /// ||f||^2 = (2 pi)^3 sum |f^(xi)|^2.
  double norm_sq() const;
  Complex operator()(const TorusPoint& x) const;
};

/// <f, g> = (2 pi)^3 sum f^(xi) conj(g^(xi)).
Complex inner_product(const BandFunction& f, const BandFunction& g);

BandFunction to_band_function(const TruncatedGreen& tg, bool normalized = true);

BandFunction quantize_apply(const BandSymbol& sym, const BandFunction& f);

struct MatrixElement {
  Complex value;
  double norm_sq = 0.0;   // (1/8 pi^3) sum_{xi in annulus} 1/(|xi|^2 - lambda)^2
  std::size_t points = 0;  // lattice points in the annulus
};

/// <Op(a) g_lambda,L, g_lambda,L> summed directly over the annulus points:
///
///   (1 / (8 pi^3 ||G_lambda,L||^2)) sum_modes c e^{i zeta.x0}
///       sum_{xi, xi + zeta in annulus} Y_{l,m}(xi/|xi|) / ((|xi|^2 - lambda)(|xi + zeta|^2 - lambda))
///
/// Throws EmptyAnnulus when the annulus has no lattice point.
MatrixElement matrix_element(const BandSymbol& sym, double lambda, double width,
                             const TorusPoint& x0);

/// Integral of a against the normalized Liouville measure: Y_{0,0} c_{0,0,0}.
Complex liouville_average(const BandSymbol& sym);

using SymbolSampler = std::function<Complex(const TorusPoint&, const std::array<double, 3>&)>;

struct ProjectionGrid {
  int torus_points = 0;  // per axis, >= 2 N1 + 1
  int n_theta = 0;       // Gauss-Legendre order, >= N2 + 1
  int n_phi = 0;         // azimuthal points, >= 2 N2 + 1
};

/// Minimal grid that integrates band-limited products exactly.
ProjectionGrid nyquist_grid(int n1, int n2);

/// Coefficients c_{zeta,l,m} for |zeta| <= N1 (Euclidean) and l <= N2 by
/// periodic trapezoid in x and Gauss-Legendre x uniform azimuth on S^2.
/// Coefficients with |c| <= drop_below are omitted. Throws ParameterError
/// below Nyquist.
BandSymbol symbol_project(const SymbolSampler& sampler, int n1, int n2, const ProjectionGrid& grid,
                          double drop_below = 1e-12);
BandSymbol symbol_project(const SymbolSampler& sampler, int n1, int n2,
                          double drop_below = 1e-12);

/// sup_u |a(u)| for a symbol without x dependence, which is the operator
/// norm of Op(a) on L^2. Throws ParameterError for zeta != 0 modes.
double multiplier_operator_norm(const BandSymbol& sym);

/// sum |c| sup|Y_{l,m}|: an upper bound for ||Op(a)|| by the triangle
/// inequality over modes.
double operator_norm_bound(const BandSymbol& sym);

/// Values of a function of xi on the integer box [lo, hi].
class SymbolTable {
 public:
  SymbolTable(LatticePoint lo, LatticePoint hi);
  static SymbolTable sample(const std::function<Complex(const LatticePoint&)>& fn, LatticePoint lo,
                            LatticePoint hi);

  const LatticePoint& lo() const { return lo_; }
  const LatticePoint& hi() const { return hi_; }
  bool contains(const LatticePoint& xi) const;
  Complex& at(const LatticePoint& xi);
  Complex at(const LatticePoint& xi) const;

 private:
  std::size_t index(const LatticePoint& xi) const;

  LatticePoint lo_;
  LatticePoint hi_;
  std::vector<Complex> values_;
};

/// Iterated forward differences Delta^alpha. The result lives on the box
/// shrunk by alpha at the upper end. Throws DomainError if the stencil
/// does not fit.
SymbolTable difference_symbol(const SymbolTable& table, const std::array<int, 3>& alpha);

/// max |Delta^alpha a(xi)| over R <= |xi| < 2R, with a sampled on a box
/// just large enough for the stencil.
double difference_band_max(const std::function<Complex(const LatticePoint&)>& fn,
                           const std::array<int, 3>& alpha, double r);

}  // namespace scatter3d
