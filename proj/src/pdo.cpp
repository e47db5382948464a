#include "scatter3d/pdo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "scatter3d/errors.hpp"
#include "scatter3d/quadrature.hpp"
#include "scatter3d/spectrum.hpp"

namespace scatter3d {

namespace {

constexpr double kPi = std::numbers::pi;

double dot(const LatticePoint& a, const TorusPoint& x) {
  return static_cast<double>(a.x) * x.x + static_cast<double>(a.y) * x.y +
         static_cast<double>(a.z) * x.z;
}

bool mode_less(const Mode& a, const Mode& b) {
  if (a.zeta != b.zeta) return a.zeta < b.zeta;
  if (a.l != b.l) return a.l < b.l;
  return a.m < b.m;
}

bool same_key(const Mode& a, const Mode& b) {
  return a.zeta == b.zeta && a.l == b.l && a.m == b.m;
}

// Modes sharing one zeta, as index ranges into BandSymbol::modes().
struct ZetaGroup {
  LatticePoint zeta;
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::vector<ZetaGroup> group_by_zeta(const std::vector<Mode>& modes) {
  std::vector<ZetaGroup> groups;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (groups.empty() || groups.back().zeta != modes[i].zeta) {
      groups.push_back({modes[i].zeta, i, i});
    }
    groups.back().end = i + 1;
  }
  return groups;
}

}  // namespace

double y00() { return 0.5 / std::sqrt(kPi); }

BandSymbol::BandSymbol(std::vector<Mode> modes) {
  for (const auto& md : modes) HarmonicIndex{md.l, md.m}.validate();
  std::stable_sort(modes.begin(), modes.end(), mode_less);
  for (const auto& md : modes) {
    if (!modes_.empty() && same_key(modes_.back(), md)) {
      modes_.back().c += md.c;
    } else {
      modes_.push_back(md);
    }
  }
}

BandSymbol BandSymbol::identity() {
  BandSymbol s({Mode{{0, 0, 0}, 0, 0, Complex(2.0 * std::sqrt(kPi), 0.0)}});
  s.name = "identity";
  return s;
}

BandSymbol BandSymbol::basis(LatticePoint zeta, int l, int m, Complex c) {
  return BandSymbol({Mode{zeta, l, m, c}});
}

int BandSymbol::max_l() const {
  int l = 0;
  for (const auto& md : modes_) l = std::max(l, md.l);
  return l;
}

std::int64_t BandSymbol::max_zeta_sq() const {
  std::int64_t z = 0;
  for (const auto& md : modes_) z = std::max(z, md.zeta.norm_sq());
  return z;
}

bool BandSymbol::is_multiplier() const {
  return std::all_of(modes_.begin(), modes_.end(),
                     [](const Mode& md) { return md.zeta == LatticePoint{}; });
}

Complex BandSymbol::coefficient(const LatticePoint& zeta, int l, int m) const {
  const Mode key{zeta, l, m, {}};
  auto it = std::lower_bound(modes_.begin(), modes_.end(), key, mode_less);
  if (it != modes_.end() && same_key(*it, key)) return it->c;
  return 0.0;
}

Complex BandSymbol::value_at(const TorusPoint& x, const std::array<double, 3>& u) const {
  if (modes_.empty()) return 0.0;
  const int lmax = max_l();
  std::vector<Complex> y(harmonic_count(lmax));
  ylm_all(lmax, u[0], u[1], u[2], y);
  Complex sum = 0.0;
  for (const auto& md : modes_) {
    sum += md.c * y[harmonic_slot(md.l, md.m)] * std::polar(1.0, dot(md.zeta, x));
  }
  return sum;
}

Complex BandSymbol::value(const TorusPoint& x, const LatticePoint& xi) const {
  if (xi == LatticePoint{}) {
    Complex sum = 0.0;
    for (const auto& md : modes_) {
      if (md.l == 0) sum += md.c * y00() * std::polar(1.0, dot(md.zeta, x));
    }
    return sum;
  }
  const double r = std::sqrt(static_cast<double>(xi.norm_sq()));
  return value_at(x, {static_cast<double>(xi.x) / r, static_cast<double>(xi.y) / r,
                      static_cast<double>(xi.z) / r});
}

BandSymbol BandSymbol::conjugate_reflected() const {
  std::vector<Mode> out;
  out.reserve(modes_.size());
  for (const auto& md : modes_) {
    const double sign = md.m % 2 == 0 ? 1.0 : -1.0;
    out.push_back({-md.zeta, md.l, -md.m, sign * std::conj(md.c)});
  }
  BandSymbol s(std::move(out));
  s.name = name.empty() ? name : name + "_adj";
  return s;
}

BandSymbol parse_symbol(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("symbol file is not valid JSON: {}", e.what()));
  }
  if (!j.is_object() || !j.contains("modes") || !j["modes"].is_array()) {
    throw ConfigError("symbol file needs a \"modes\" array");
  }
  std::vector<Mode> modes;
  try {
    for (const auto& e : j["modes"]) {
      const auto z = e.at("zeta").get<std::vector<std::int64_t>>();
      if (z.size() != 3) throw ConfigError("zeta must have three components");
      Mode md;
      md.zeta = {z[0], z[1], z[2]};
      md.l = e.at("l").get<int>();
      md.m = e.at("m").get<int>();
      md.c = Complex(e.value("re", 0.0), e.value("im", 0.0));
      if (md.l < 0 || std::abs(md.m) > md.l) {
        throw ConfigError(fmt::format("invalid harmonic index (l, m) = ({}, {})", md.l, md.m));
      }
      modes.push_back(md);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("malformed mode entry: {}", e.what()));
  }
  BandSymbol sym(std::move(modes));
  if (j.contains("name") && j["name"].is_string()) sym.name = j["name"].get<std::string>();
  return sym;
}

BandSymbol load_symbol(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open symbol file '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    BandSymbol sym = parse_symbol(ss.str());
    if (sym.name.empty()) {
      auto stem = path.substr(path.find_last_of('/') + 1);
      sym.name = stem.substr(0, stem.rfind(".json"));
    }
    return sym;
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
}

std::string dump_symbol(const BandSymbol& sym) {
  nlohmann::json j;
  if (!sym.name.empty()) j["name"] = sym.name;
  j["modes"] = nlohmann::json::array();
  for (const auto& md : sym.modes()) {
    j["modes"].push_back({{"zeta", {md.zeta.x, md.zeta.y, md.zeta.z}},
                          {"l", md.l},
                          {"m", md.m},
                          {"re", md.c.real()},
                          {"im", md.c.imag()}});
  }
  return j.dump(2) + "\n";
}

double BandFunction::norm_sq() const {
  double s = 0.0;
  for (const auto& [xi, c] : fourier) s += std::norm(c);
  return 8.0 * kPi * kPi * kPi * s;
}

Complex BandFunction::operator()(const TorusPoint& x) const {
  Complex s = 0.0;
  for (const auto& [xi, c] : fourier) s += c * std::polar(1.0, dot(xi, x));
  return s;
}

Complex inner_product(const BandFunction& f, const BandFunction& g) {
  Complex s = 0.0;
  for (const auto& [xi, c] : f.fourier) {
    auto it = g.fourier.find(xi);
    if (it != g.fourier.end()) s += c * std::conj(it->second);
  }
  return 8.0 * kPi * kPi * kPi * s;
}

BandFunction to_band_function(const TruncatedGreen& tg, bool normalized) {
  BandFunction f;
  const double scale = normalized ? 1.0 / std::sqrt(tg.norm_trunc_sq) : 1.0;
  for (const auto& [xi, c] : tg.coeffs) f.fourier.emplace(xi, c * scale);
  return f;
}

BandFunction quantize_apply(const BandSymbol& sym, const BandFunction& f) {
  BandFunction out;
  if (sym.empty()) return out;
  const int lmax = sym.max_l();
  std::vector<Complex> y(harmonic_count(lmax));
  for (const auto& [xi, fc] : f.fourier) {
    const bool origin = xi == LatticePoint{};
    if (origin) {
      std::fill(y.begin(), y.end(), Complex(0.0));
      y[0] = y00();
    } else {
      ylm_all(lmax, static_cast<double>(xi.x), static_cast<double>(xi.y),
              static_cast<double>(xi.z), y);
    }
    for (const auto& md : sym.modes()) {
      if (origin && md.l != 0) continue;
      out.fourier[xi + md.zeta] += md.c * y[harmonic_slot(md.l, md.m)] * fc;
    }
  }
  return out;
}

MatrixElement matrix_element(const BandSymbol& sym, double lambda, double width,
                             const TorusPoint& x0) {
  const auto [lo, hi] = annulus_range(lambda, width);
  struct Pt {
    LatticePoint xi;
    std::int64_t n;
    double d;
  };
  std::vector<Pt> pts;
  if (lo <= hi) {
    visit_lattice_range(lo, hi, [&](std::int64_t x, std::int64_t y, std::int64_t z, std::int64_t n) {
      pts.push_back({{x, y, z}, n, static_cast<double>(n) - lambda});
    });
  }
  if (pts.empty()) throw EmptyAnnulus(lambda, width);
  for (const auto& p : pts) {
    if (std::abs(p.d) < 1e-9) check_not_pole(lambda);
  }

  MatrixElement me;
  me.points = pts.size();
  double norm_sum = 0.0;
  for (const auto& p : pts) norm_sum += 1.0 / (p.d * p.d);
  me.norm_sq = norm_sum / (8.0 * kPi * kPi * kPi);

  const auto& modes = sym.modes();
  const auto groups = group_by_zeta(modes);
  const int lmax = sym.max_l();
  const auto ilo = static_cast<std::int64_t>(lo);
  const auto ihi = static_cast<std::int64_t>(hi);
  std::vector<Complex> acc(modes.size(), 0.0);
  std::vector<Complex> y(harmonic_count(lmax));
  for (const auto& p : pts) {
    const bool origin = p.n == 0;
    bool have_y = false;
    for (const auto& g : groups) {
      const std::int64_t n2 = p.n +
                              2 * (p.xi.x * g.zeta.x + p.xi.y * g.zeta.y + p.xi.z * g.zeta.z) +
                              g.zeta.norm_sq();
      if (n2 < ilo || n2 > ihi) continue;
      const double w = 1.0 / (p.d * (static_cast<double>(n2) - lambda));
      if (!have_y) {
        if (origin) {
          std::fill(y.begin(), y.end(), Complex(0.0));
          y[0] = y00();
        } else {
          ylm_all(lmax, static_cast<double>(p.xi.x), static_cast<double>(p.xi.y),
                  static_cast<double>(p.xi.z), y);
        }
        have_y = true;
      }
      for (std::size_t i = g.begin; i < g.end; ++i) {
        acc[i] += y[harmonic_slot(modes[i].l, modes[i].m)] * w;
      }
    }
  }
  Complex total = 0.0;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    total += modes[i].c * std::polar(1.0, dot(modes[i].zeta, x0)) * acc[i];
  }
  me.value = total / norm_sum;
  return me;
}

Complex liouville_average(const BandSymbol& sym) { return y00() * sym.coefficient({}, 0, 0); }

ProjectionGrid nyquist_grid(int n1, int n2) { return {2 * n1 + 1, n2 + 1, 2 * n2 + 1}; }

BandSymbol symbol_project(const SymbolSampler& sampler, int n1, int n2, const ProjectionGrid& grid,
                          double drop_below) {
  if (n1 < 0 || n2 < 0) throw ParameterError("symbol_project: band limits must be nonnegative");
  const auto need = nyquist_grid(n1, n2);
  if (grid.torus_points < need.torus_points || grid.n_theta < need.n_theta ||
      grid.n_phi < need.n_phi) {
    throw ParameterError(fmt::format(
        "symbol_project: grid ({}, {}, {}) below Nyquist ({}, {}, {}) for N1 = {}, N2 = {}",
        grid.torus_points, grid.n_theta, grid.n_phi, need.torus_points, need.n_theta, need.n_phi,
        n1, n2));
  }
  const auto rule = sphere_rule(static_cast<std::size_t>(grid.n_theta),
                                static_cast<std::size_t>(grid.n_phi));
  const int mt = grid.torus_points;
  const std::size_t nx = static_cast<std::size_t>(mt) * mt * mt;
  const std::size_t nu = rule.points.size();

  std::vector<TorusPoint> xs;
  xs.reserve(nx);
  for (int i = 0; i < mt; ++i) {
    for (int j = 0; j < mt; ++j) {
      for (int k = 0; k < mt; ++k) {
        xs.push_back({2.0 * kPi * i / mt, 2.0 * kPi * j / mt, 2.0 * kPi * k / mt});
      }
    }
  }
  std::vector<Complex> samples(nx * nu);
  for (std::size_t ix = 0; ix < nx; ++ix) {
    for (std::size_t iu = 0; iu < nu; ++iu) samples[ix * nu + iu] = sampler(xs[ix], rule.points[iu]);
  }

  std::vector<Complex> ys(nu * harmonic_count(n2));
  for (std::size_t iu = 0; iu < nu; ++iu) {
    const auto& u = rule.points[iu];
    ylm_all(n2, u[0], u[1], u[2],
            std::span<Complex>(ys.data() + iu * harmonic_count(n2), harmonic_count(n2)));
  }

  std::vector<Mode> modes;
  const std::int64_t r2 = static_cast<std::int64_t>(n1) * n1;
  std::vector<Complex> a_zeta(nu);
  for (std::int64_t zx = -n1; zx <= n1; ++zx) {
    for (std::int64_t zy = -n1; zy <= n1; ++zy) {
      for (std::int64_t zz = -n1; zz <= n1; ++zz) {
        const LatticePoint zeta{zx, zy, zz};
        if (zeta.norm_sq() > r2) continue;
        std::fill(a_zeta.begin(), a_zeta.end(), Complex(0.0));
        for (std::size_t ix = 0; ix < nx; ++ix) {
          const Complex e = std::polar(1.0, -dot(zeta, xs[ix]));
          for (std::size_t iu = 0; iu < nu; ++iu) a_zeta[iu] += samples[ix * nu + iu] * e;
        }
        for (auto& v : a_zeta) v /= static_cast<double>(nx);
        for (int l = 0; l <= n2; ++l) {
          for (int m = -l; m <= l; ++m) {
            Complex c = 0.0;
            for (std::size_t iu = 0; iu < nu; ++iu) {
              c += rule.weights[iu] * a_zeta[iu] *
                   std::conj(ys[iu * harmonic_count(n2) + harmonic_slot(l, m)]);
            }
            if (std::abs(c) > drop_below) modes.push_back({zeta, l, m, c});
          }
        }
      }
    }
  }
  return BandSymbol(std::move(modes));
}

BandSymbol symbol_project(const SymbolSampler& sampler, int n1, int n2, double drop_below) {
  return symbol_project(sampler, n1, n2, nyquist_grid(n1, n2), drop_below);
}

double multiplier_operator_norm(const BandSymbol& sym) {
  if (!sym.is_multiplier()) {
    throw ParameterError("multiplier_operator_norm: symbol depends on x (zeta != 0 modes)");
  }
  if (sym.empty()) return 0.0;
  const TorusPoint origin{};
  auto f = [&](double theta, double phi) {
    const double st = std::sin(theta);
    return std::abs(sym.value_at(origin, {st * std::cos(phi), st * std::sin(phi), std::cos(theta)}));
  };
  constexpr int kTheta = 120;
  constexpr int kPhi = 240;
  struct Cand {
    double v, theta, phi;
  };
  std::vector<Cand> cands;
  for (int i = 0; i <= kTheta; ++i) {
    const double th = kPi * i / kTheta;
    for (int j = 0; j < kPhi; ++j) {
      const double ph = 2.0 * kPi * j / kPhi;
      cands.push_back({f(th, ph), th, ph});
    }
  }
  constexpr std::size_t kStarts = 8;
  std::partial_sort(cands.begin(), cands.begin() + kStarts, cands.end(),
                    [](const Cand& a, const Cand& b) { return a.v > b.v; });
  double best = cands.front().v;
  // Compass search from the best grid points.
  for (std::size_t s = 0; s < kStarts; ++s) {
    double th = cands[s].theta;
    double ph = cands[s].phi;
    double v = cands[s].v;
    double step = kPi / kTheta;
    while (step > 1e-12) {
      bool moved = false;
      const double dirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
      for (const auto& dd : dirs) {
        const double t2 = std::clamp(th + dd[0] * step, 0.0, kPi);
        const double p2 = ph + dd[1] * step;
        const double v2 = f(t2, p2);
        if (v2 > v) {
          th = t2;
          ph = p2;
          v = v2;
          moved = true;
          break;
        }
      }
      if (!moved) step *= 0.5;
    }
    best = std::max(best, v);
  }
  return best;
}

double operator_norm_bound(const BandSymbol& sym) {
  double s = 0.0;
  for (const auto& md : sym.modes()) s += std::abs(md.c) * ylm_sup({md.l, md.m});
  return s;
}

SymbolTable::SymbolTable(LatticePoint lo, LatticePoint hi) : lo_(lo), hi_(hi) {
  if (hi.x < lo.x || hi.y < lo.y || hi.z < lo.z) throw DomainError("SymbolTable: empty box");
  values_.assign(static_cast<std::size_t>((hi.x - lo.x + 1) * (hi.y - lo.y + 1) * (hi.z - lo.z + 1)),
                 Complex(0.0));
}

SymbolTable SymbolTable::sample(const std::function<Complex(const LatticePoint&)>& fn,
                                LatticePoint lo, LatticePoint hi) {
  SymbolTable t(lo, hi);
  for (std::int64_t x = lo.x; x <= hi.x; ++x) {
    for (std::int64_t y = lo.y; y <= hi.y; ++y) {
      for (std::int64_t z = lo.z; z <= hi.z; ++z) t.at({x, y, z}) = fn({x, y, z});
    }
  }
  return t;
}

bool SymbolTable::contains(const LatticePoint& xi) const {
  return xi.x >= lo_.x && xi.x <= hi_.x && xi.y >= lo_.y && xi.y <= hi_.y && xi.z >= lo_.z &&
         xi.z <= hi_.z;
}

std::size_t SymbolTable::index(const LatticePoint& xi) const {
  if (!contains(xi)) {
    throw DomainError(fmt::format("SymbolTable: ({}, {}, {}) outside the box", xi.x, xi.y, xi.z));
  }
  const std::int64_t ny = hi_.y - lo_.y + 1;
  const std::int64_t nz = hi_.z - lo_.z + 1;
  return static_cast<std::size_t>(((xi.x - lo_.x) * ny + (xi.y - lo_.y)) * nz + (xi.z - lo_.z));
}

Complex& SymbolTable::at(const LatticePoint& xi) { return values_[index(xi)]; }
Complex SymbolTable::at(const LatticePoint& xi) const { return values_[index(xi)]; }

SymbolTable difference_symbol(const SymbolTable& table, const std::array<int, 3>& alpha) {
  if (alpha[0] < 0 || alpha[1] < 0 || alpha[2] < 0) {
    throw ParameterError("difference_symbol: multi-index must be nonnegative");
  }
  SymbolTable cur = table;
  const LatticePoint unit[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < alpha[j]; ++k) {
      LatticePoint hi = cur.hi();
      (j == 0 ? hi.x : j == 1 ? hi.y : hi.z) -= 1;
      if (hi.x < cur.lo().x || hi.y < cur.lo().y || hi.z < cur.lo().z) {
        throw DomainError(fmt::format("difference_symbol: stencil ({}, {}, {}) exceeds the box",
                                      alpha[0], alpha[1], alpha[2]));
      }
      SymbolTable next(cur.lo(), hi);
      for (std::int64_t x = cur.lo().x; x <= hi.x; ++x) {
        for (std::int64_t y = cur.lo().y; y <= hi.y; ++y) {
          for (std::int64_t z = cur.lo().z; z <= hi.z; ++z) {
            const LatticePoint xi{x, y, z};
            next.at(xi) = cur.at(xi + unit[j]) - cur.at(xi);
          }
        }
      }
      cur = std::move(next);
    }
  }
  return cur;
}

double difference_band_max(const std::function<Complex(const LatticePoint&)>& fn,
                           const std::array<int, 3>& alpha, double r) {
  if (!(r > 0.0)) throw ParameterError("difference_band_max: radius must be positive");
  auto binom = [](int n, int k) {
    double b = 1.0;
    for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
    return b;
  };
  // Delta^alpha s(xi) = sum_{k <= alpha} (-1)^{|alpha - k|} C(alpha, k) s(xi + k)
  struct Term {
    LatticePoint shift;
    double w;
  };
  std::vector<Term> stencil;
  for (int i = 0; i <= alpha[0]; ++i) {
    for (int j = 0; j <= alpha[1]; ++j) {
      for (int k = 0; k <= alpha[2]; ++k) {
        const int parity = (alpha[0] - i) + (alpha[1] - j) + (alpha[2] - k);
        stencil.push_back({{i, j, k},
                           (parity % 2 == 0 ? 1.0 : -1.0) * binom(alpha[0], i) *
                               binom(alpha[1], j) * binom(alpha[2], k)});
      }
    }
  }
  const double r2lo = r * r;
  const double r2hi = 4.0 * r * r;
  const auto s = static_cast<std::int64_t>(std::ceil(2.0 * r));
  double best = 0.0;
  for (std::int64_t x = -s; x <= s; ++x) {
    for (std::int64_t y = -s; y <= s; ++y) {
      for (std::int64_t z = -s; z <= s; ++z) {
        const auto n = static_cast<double>(x * x + y * y + z * z);
        if (n < r2lo || n >= r2hi) continue;
        Complex v = 0.0;
        for (const auto& t : stencil) v += t.w * fn(LatticePoint{x, y, z} + t.shift);
        best = std::max(best, std::abs(v));
      }
    }
  }
  return best;
}

}  // namespace scatter3d
