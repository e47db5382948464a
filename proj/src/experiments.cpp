#include "scatter3d/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <map>
#include <set>

#include <fmt/format.h>

#include "scatter3d/errors.hpp"
#include "scatter3d/green.hpp"
#include "scatter3d/parallel.hpp"

namespace scatter3d {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

std::int64_t isqrt_signed(std::int64_t n) {
  return static_cast<std::int64_t>(isqrt(static_cast<std::uint64_t>(n)));
}

// All sums a row needs: zeta = 0 harmonics first, then one block per zeta.
struct ModePlan {
  std::vector<HarmonicIndex> zero;
  struct Group {
    LatticePoint zeta;
    std::vector<HarmonicIndex> harmonics;
    std::size_t offset = 0;
  };
  std::vector<Group> groups;
  std::size_t total = 0;
  int lmax_zero = 0;

  // terms[obs] = (coefficient * e^{i zeta.x0}, slot in the flat sum vector)
  std::vector<std::vector<std::pair<Complex, std::size_t>>> terms;
};

ModePlan make_plan(const std::vector<BandSymbol>& observables, const TorusPoint& x0) {
  std::set<std::pair<int, int>> zero;
  std::map<LatticePoint, std::set<std::pair<int, int>>> by_zeta;
  for (const auto& sym : observables) {
    for (const auto& md : sym.modes()) {
      if (md.zeta == LatticePoint{}) {
        zero.insert({md.l, md.m});
      } else {
        by_zeta[md.zeta].insert({md.l, md.m});
      }
    }
  }
  ModePlan plan;
  for (const auto& [l, m] : zero) {
    plan.zero.push_back({l, m});
    plan.lmax_zero = std::max(plan.lmax_zero, l);
  }
  std::size_t offset = plan.zero.size();
  for (const auto& [zeta, hs] : by_zeta) {
    ModePlan::Group g;
    g.zeta = zeta;
    g.offset = offset;
    for (const auto& [l, m] : hs) g.harmonics.push_back({l, m});
    offset += g.harmonics.size();
    plan.groups.push_back(std::move(g));
  }
  plan.total = offset;

  auto slot_of = [&](const Mode& md) -> std::size_t {
    const HarmonicIndex h{md.l, md.m};
    if (md.zeta == LatticePoint{}) {
      return static_cast<std::size_t>(
          std::lower_bound(plan.zero.begin(), plan.zero.end(), h) - plan.zero.begin());
    }
    for (const auto& g : plan.groups) {
      if (g.zeta != md.zeta) continue;
      return g.offset + static_cast<std::size_t>(
                            std::lower_bound(g.harmonics.begin(), g.harmonics.end(), h) -
                            g.harmonics.begin());
    }
    throw std::logic_error("mode missing from plan");
  };
  for (const auto& sym : observables) {
    std::vector<std::pair<Complex, std::size_t>> t;
    for (const auto& md : sym.modes()) {
      const double phase = static_cast<double>(md.zeta.x) * x0.x +
                           static_cast<double>(md.zeta.y) * x0.y +
                           static_cast<double>(md.zeta.z) * x0.z;
      t.emplace_back(md.c * std::polar(1.0, phase), slot_of(md));
    }
    plan.terms.push_back(std::move(t));
  }
  return plan;
}

double mean_or_nan(double sum, std::size_t count) {
  return count == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(count);
}

}  // namespace

void QERunConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ParameterError(fmt::format("delta = {} must lie in (0, 1)", delta));
  }
  if (!(lambda_max >= 100.0)) {
    throw ParameterError(fmt::format("lambda_max = {} must be at least 100", lambda_max));
  }
  if (observables.empty()) throw ParameterError("at least one observable is required");
  std::set<std::string> seen;
  for (const auto& o : observables) {
    if (o.name.empty()) throw ParameterError("every observable needs a name");
    if (!seen.insert(o.name).second) {
      throw ParameterError(fmt::format("duplicate observable name '{}'", o.name));
    }
  }
  if (sequence_kind == SequenceKind::Secular) {
    ScattererConfig sc;
    sc.phi = phi;
    sc.tail_cutoff_nmax = tail_cutoff_nmax;
    sc.validate();
  }
}

std::vector<double> summary_ladder(double lambda_max) {
  std::vector<double> xs;
  for (double x = 100.0; x < lambda_max; x *= 10.0) xs.push_back(x);
  xs.push_back(lambda_max);
  return xs;
}

std::vector<Complex> annulus_pair_sums(const LatticePoint& zeta,
                                       const std::vector<HarmonicIndex>& harmonics, double lambda,
                                       double width) {
  if (zeta == LatticePoint{}) throw ParameterError("annulus_pair_sums: zeta must be nonzero");
  std::vector<Complex> acc(harmonics.size(), 0.0);
  const auto [ulo, uhi] = annulus_range(lambda, width);
  if (ulo > uhi) return acc;
  int lmax = 0;
  for (const auto& h : harmonics) {
    h.validate();
    lmax = std::max(lmax, h.l);
  }
  const auto lo = static_cast<std::int64_t>(ulo);
  const auto hi = static_cast<std::int64_t>(uhi);
  const std::int64_t span = hi - lo;
  const std::int64_t zz = zeta.norm_sq();
  const std::int64_t zc[3] = {zeta.x, zeta.y, zeta.z};

  // Outer axes u, v and inner axis w. With zc[w] = 0 the pair condition
  // depends only on the column (u, v), which prunes the column loop.
  int au = 0;
  int av = 1;
  int aw = 2;
  bool pruned = false;
  for (int k = 2; k >= 0; --k) {
    if (zc[k] == 0) {
      aw = k;
      pruned = true;
      break;
    }
  }
  if (pruned) {
    int others[2];
    int c = 0;
    for (int k = 0; k < 3; ++k) {
      if (k != aw) others[c++] = k;
    }
    au = others[0];
    av = others[1];
    if (zc[au] == 0) std::swap(au, av);
  }

  std::vector<Complex> ys(harmonic_count(lmax));
  auto add = [&](std::int64_t u, std::int64_t v, std::int64_t w, std::int64_t n, std::int64_t n2) {
    std::int64_t p[3];
    p[au] = u;
    p[av] = v;
    p[aw] = w;
    const double wt =
        1.0 / ((static_cast<double>(n) - lambda) * (static_cast<double>(n2) - lambda));
    if (n == 0) {
      for (std::size_t i = 0; i < harmonics.size(); ++i) {
        if (harmonics[i].l == 0) acc[i] += y00() * wt;
      }
      return;
    }
    ylm_all(lmax, static_cast<double>(p[0]), static_cast<double>(p[1]), static_cast<double>(p[2]),
            ys);
    for (std::size_t i = 0; i < harmonics.size(); ++i) {
      acc[i] += ys[harmonic_slot(harmonics[i].l, harmonics[i].m)] * wt;
    }
  };

  const std::int64_t s = isqrt_signed(hi);
  for (std::int64_t u = -s; u <= s; ++u) {
    const std::int64_t uu = u * u;
    const std::int64_t t = isqrt_signed(hi - uu);
    std::int64_t vlo = -t;
    std::int64_t vhi = t;
    const std::int64_t cu = zc[au] * u;
    const std::int64_t cv = zc[av];
    if (pruned) {
      if (cv == 0) {
        if (std::abs(2 * cu + zz) > span) continue;
      } else {
        const std::int64_t a = -span - 2 * cu - zz;
        const std::int64_t b = span - 2 * cu - zz;
        if (cv > 0) {
          vlo = std::max(vlo, ceil_div(a, 2 * cv));
          vhi = std::min(vhi, floor_div(b, 2 * cv));
        } else {
          vlo = std::max(vlo, ceil_div(b, 2 * cv));
          vhi = std::min(vhi, floor_div(a, 2 * cv));
        }
      }
    }
    for (std::int64_t v = vlo; v <= vhi; ++v) {
      const std::int64_t rho2 = uu + v * v;
      if (rho2 > hi) continue;
      if (pruned) {
        const std::int64_t shift = 2 * (cu + cv * v) + zz;
        const std::int64_t nlo = std::max(lo, lo - shift);
        const std::int64_t nhi = std::min(hi, hi - shift);
        if (nlo > nhi || nhi < rho2) continue;
        const std::int64_t wmax = isqrt_signed(nhi - rho2);
        const std::int64_t wmin = nlo > rho2 ? isqrt_signed(nlo - rho2 - 1) + 1 : 0;
        if (wmin > wmax) continue;
        for (std::int64_t w = -wmax; w <= -wmin; ++w) {
          const std::int64_t n = rho2 + w * w;
          add(u, v, w, n, n + shift);
        }
        for (std::int64_t w = wmin == 0 ? 1 : wmin; w <= wmax; ++w) {
          const std::int64_t n = rho2 + w * w;
          add(u, v, w, n, n + shift);
        }
      } else {
        const std::int64_t wmax = isqrt_signed(hi - rho2);
        const std::int64_t wmin = lo > rho2 ? isqrt_signed(lo - rho2 - 1) + 1 : 0;
        if (wmin > wmax) continue;
        const std::int64_t base = 2 * (zc[au] * u + zc[av] * v) + zz;
        auto visit = [&](std::int64_t w) {
          const std::int64_t n = rho2 + w * w;
          const std::int64_t n2 = n + base + 2 * zc[aw] * w;
          if (n2 >= lo && n2 <= hi) add(u, v, w, n, n2);
        };
        for (std::int64_t w = -wmax; w <= -wmin; ++w) visit(w);
        for (std::int64_t w = wmin == 0 ? 1 : wmin; w <= wmax; ++w) visit(w);
      }
    }
  }
  return acc;
}

std::vector<QESummaryRow> cesaro_summary(const QERunReport& report, std::size_t observable,
                                         const std::vector<double>& ladder) {
  std::vector<QESummaryRow> out;
  for (double x : ladder) {
    QESummaryRow s;
    s.x = x;
    double sum_all = 0.0;
    double sum_inf = 0.0;
    std::size_t n_all = 0;
    std::size_t n_inf = 0;
    for (const auto& row : report.rows) {
      if (row.lambda > x) break;
      ++s.count;
      if (row.in_lambda_infinity) ++s.count_inf;
      if (row.empty) continue;
      const double dev = row.values[observable].deviation;
      sum_all += dev;
      ++n_all;
      if (row.in_lambda_infinity) {
        sum_inf += dev;
        ++n_inf;
      }
    }
    s.density = s.count == 0 ? std::numeric_limits<double>::quiet_NaN()
                             : static_cast<double>(s.count_inf) / static_cast<double>(s.count);
    s.s_all = mean_or_nan(sum_all, n_all);
    s.s_inf = mean_or_nan(sum_inf, n_inf);
    out.push_back(s);
  }
  return out;
}

QERunReport run_qe_on(const std::vector<double>& lambdas_in, const QERunConfig& config) {
  config.validate();
  std::vector<double> lambdas;
  for (double l : lambdas_in) {
    if (l > 0.0) lambdas.push_back(l);
  }
  std::sort(lambdas.begin(), lambdas.end());

  QERunReport report;
  for (const auto& o : config.observables) {
    report.names.push_back(o.name);
    report.liouville.push_back(liouville_average(o));
  }
  const auto plan = make_plan(config.observables, config.x0);

  double top = 1.0;
  for (double l : lambdas) top = std::max(top, l + std::pow(l, config.delta));
  const auto n_top = static_cast<std::uint64_t>(std::ceil(top)) + 1;
  const R3Table table(n_top);
  std::optional<WeylTable> weyl;
  if (!plan.zero.empty()) weyl.emplace(plan.lmax_zero, n_top);

  report.rows.resize(lambdas.size());
  parallel_for(lambdas.size(), [&](unsigned, std::size_t i) {
    QERow& row = report.rows[i];
    const double lambda = lambdas[i];
    check_not_pole(lambda);
    row.lambda = lambda;
    row.n_lambda = nearest_shell(lambda);
    if (row.n_lambda > 0) row.klass = classify(row.n_lambda);
    row.in_lambda_infinity = in_lambda_infinity(row.n_lambda);
    row.width = std::pow(lambda, config.delta);
    const auto [lo, hi] = annulus_range(lambda, row.width);
    double norm_sum = 0.0;
    std::uint64_t count = 0;
    for (std::uint64_t n = lo; n <= hi; ++n) {
      if (table[n] == 0) continue;
      const double d = static_cast<double>(n) - lambda;
      norm_sum += table[n] / (d * d);
      count += table[n];
    }
    if (count == 0) {
      row.empty = true;
      return;
    }
    std::vector<Complex> sums(plan.total, 0.0);
    for (std::size_t k = 0; k < plan.zero.size(); ++k) {
      Complex s = 0.0;
      for (std::uint64_t n = lo; n <= hi; ++n) {
        if (table[n] == 0) continue;
        const double d = static_cast<double>(n) - lambda;
        s += (*weyl)(plan.zero[k], n) / (d * d);
      }
      sums[k] = s;
    }
    for (const auto& g : plan.groups) {
      const auto part = annulus_pair_sums(g.zeta, g.harmonics, lambda, row.width);
      std::copy(part.begin(), part.end(), sums.begin() + static_cast<std::ptrdiff_t>(g.offset));
    }
    row.values.resize(config.observables.size());
    for (std::size_t o = 0; o < config.observables.size(); ++o) {
      Complex total = 0.0;
      for (const auto& [c, slot] : plan.terms[o]) total += c * sums[slot];
      row.values[o].element = total / norm_sum;
      row.values[o].deviation = std::abs(row.values[o].element - report.liouville[o]);
    }
  });

  const auto ladder = summary_ladder(config.lambda_max);
  for (std::size_t o = 0; o < config.observables.size(); ++o) {
    report.summary.push_back(cesaro_summary(report, o, ladder));
  }
  return report;
}

QERunReport run_qe(const QERunConfig& config) {
  config.validate();
  ScattererConfig sc;
  sc.phi = config.phi;
  sc.x0 = config.x0;
  sc.tail_cutoff_nmax = config.tail_cutoff_nmax;
  const auto seq = build_sequence(config.sequence_kind, config.lambda_max, sc);
  std::vector<double> lambdas;
  lambdas.reserve(seq.entries.size());
  for (const auto& e : seq.entries) lambdas.push_back(e.lambda);
  return run_qe_on(lambdas, config);
}

namespace {

struct ShellTerms {
  std::vector<std::uint64_t> n;
  std::vector<Complex> w;
  std::vector<double> r3;
};

ShellTerms annulus_shells(HarmonicIndex idx, double lambda, double width) {
  idx.validate();
  const auto [lo, hi] = annulus_range(lambda, width);
  ShellTerms st;
  for (std::uint64_t n = lo; n <= hi; ++n) {
    if (n == 0) {
      st.n.push_back(0);
      st.w.push_back(idx.l == 0 ? Complex(y00()) : Complex(0.0));
      st.r3.push_back(1.0);
      continue;
    }
    if (!is_sum_of_three_squares(n)) continue;
    st.n.push_back(n);
    st.w.push_back(weyl_sum(idx, n));
    st.r3.push_back(static_cast<double>(sphere_points(n).size()));
  }
  if (st.n.empty()) throw EmptyAnnulus(lambda, width);
  return st;
}

}  // namespace

ConsistencyResult weyl_vs_element_consistency(HarmonicIndex idx, double lambda, double delta,
                                              const TorusPoint& x0) {
  check_not_pole(lambda);
  const double width = std::pow(lambda, delta);
  const auto st = annulus_shells(idx, lambda, width);
  Complex num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < st.n.size(); ++i) {
    const double d = static_cast<double>(st.n[i]) - lambda;
    num += st.w[i] / (d * d);
    den += st.r3[i] / (d * d);
  }
  ConsistencyResult res;
  res.shell_sum = num / den;
  res.element = matrix_element(BandSymbol::basis({}, idx.l, idx.m), lambda, width, x0).value;
  const double scale = std::max(std::abs(res.shell_sum), ylm_sup(idx));
  res.residual = std::abs(res.element - res.shell_sum) / scale;
  return res;
}

ShellSplit dominant_shell_split(HarmonicIndex idx, double lambda, double delta) {
  check_not_pole(lambda);
  const double width = std::pow(lambda, delta);
  const auto st = annulus_shells(idx, lambda, width);
  ShellSplit sp;
  sp.n_lambda = nearest_shell(lambda);
  double den = 0.0;
  for (std::size_t i = 0; i < st.n.size(); ++i) {
    const double d = static_cast<double>(st.n[i]) - lambda;
    den += st.r3[i] / (d * d);
  }
  for (std::size_t i = 0; i < st.n.size(); ++i) {
    const double d = static_cast<double>(st.n[i]) - lambda;
    const Complex term = st.w[i] / (d * d) / den;
    if (st.n[i] == sp.n_lambda) {
      sp.near_term = term;
      sp.weyl_ratio = std::abs(st.w[i]) / st.r3[i];
    } else {
      sp.far_sum += term;
    }
  }
  sp.element = matrix_element(BandSymbol::basis({}, idx.l, idx.m), lambda, width, {}).value;
  return sp;
}

}  // namespace scatter3d
