#include "scatter3d/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "scatter3d/errors.hpp"
#include "scatter3d/experiments.hpp"
#include "scatter3d/green.hpp"
#include "scatter3d/harmonics.hpp"
#include "scatter3d/io.hpp"
#include "scatter3d/lattice_arith.hpp"
#include "scatter3d/parallel.hpp"
#include "scatter3d/pdo.hpp"
#include "scatter3d/spectrum.hpp"

namespace scatter3d {

namespace {

namespace fs = std::filesystem;

std::string g17(double v) { return format_double(v); }

std::string class_field(std::optional<ShellClass> k) {
  return k ? std::string(to_string(*k)) : std::string();
}

std::string class_of(std::uint64_t n) {
  if (n == 0 || !is_sum_of_three_squares(n)) return {};
  return std::string(to_string(classify(n)));
}

/// "<out minus .csv>.<tag>.csv"
std::string companion(const std::string& out, const std::string& tag) {
  std::string stem = out;
  if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv") stem.resize(stem.size() - 4);
  return stem + "." + tag + ".csv";
}

// Collects the outputs of one subcommand and writes them with a manifest.
class Run {
 public:
  Run(std::string subcommand, const std::vector<std::string>& args)
      : start_(std::chrono::steady_clock::now()) {
    manifest_.subcommand = std::move(subcommand);
    manifest_.argv = args;
  }

  void config(const std::string& key, const std::string& value) { manifest_.config[key] = value; }
  void config(const std::string& key, double value) { config(key, g17(value)); }
  void cutoff(const std::string& key, const std::string& value) { manifest_.cutoffs[key] = value; }
  void tolerance(const std::string& key, const std::string& value) {
    manifest_.tolerances[key] = value;
  }

  CsvWriter writer(std::vector<std::string> columns) const {
    CsvWriter w(std::move(columns));
    w.comment("scatter3d " + manifest_.subcommand);
    for (const auto& [k, v] : manifest_.config) w.comment(k + "=" + v);
    w.comment("config-sha256 " + manifest_.config_sha256());
    return w;
  }

  void add(const std::string& path, const CsvWriter& w) { files_.emplace_back(path, w.str()); }

  void finish(std::ostream& out) {
    for (const auto& [path, content] : files_) {
      write_text_file(path, content);
      manifest_.outputs[path] = sha256_hex(content);
    }
    manifest_.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const std::string mpath = files_.front().first + ".manifest.json";
    write_text_file(mpath, manifest_.to_json());
    for (const auto& [path, content] : files_) out << "wrote " << path << "\n";
    out << "wrote " << mpath << "\n";
  }

 private:
  RunManifest manifest_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::pair<std::string, std::string>> files_;
};

std::vector<BandSymbol> load_observables(const std::vector<std::string>& specs) {
  std::vector<std::string> paths;
  for (const auto& s : specs) {
    if (fs::is_directory(s)) {
      std::vector<std::string> found;
      for (const auto& e : fs::directory_iterator(s)) {
        if (e.is_regular_file() && e.path().extension() == ".json") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      if (found.empty()) throw ConfigError(fmt::format("no .json observables in '{}'", s));
      paths.insert(paths.end(), found.begin(), found.end());
    } else {
      paths.push_back(s);
    }
  }
  std::vector<BandSymbol> syms;
  for (const auto& p : paths) syms.push_back(load_symbol(p));
  return syms;
}

SequenceKind parse_kind(const std::string& s) {
  if (s == "midpoint") return SequenceKind::Midpoint;
  if (s == "secular") return SequenceKind::Secular;
  throw ParameterError(fmt::format("sequence kind must be midpoint or secular, got '{}'", s));
}

void do_density(Run& run, std::uint64_t x_max, std::size_t budget_mib, const std::string& out_path,
                std::ostream& out) {
  run.config("x_max", std::to_string(x_max));
  run.config("memory_mib", std::to_string(budget_mib));
  run.cutoff("sieve_x_max", std::to_string(x_max));
  if (x_max < 1) throw ParameterError("--x-max must be at least 1");
  const R3Table table(x_max, budget_mib << 20);

  auto w = run.writer({"n", "a", "n1", "in_n3", "r3", "class"});
  w.row({"0", "0", "0", "1", std::to_string(table[0]), ""});
  for (std::uint64_t n = 1; n <= x_max; ++n) {
    const auto rec = table.record(n);
    w.row({std::to_string(n), std::to_string(rec.a), std::to_string(rec.n1), rec.in_n3 ? "1" : "0",
           std::to_string(rec.r3), class_field(rec.klass)});
  }
  run.add(out_path, w);

  auto c = run.writer({"X", "bad_count", "bound"});
  std::vector<std::uint64_t> ladder;
  for (std::uint64_t x = 10; x < x_max; x *= 10) ladder.push_back(x);
  ladder.push_back(x_max);
  for (auto x : ladder) {
    const auto bc = bad_count(x);
    c.row({std::to_string(x), std::to_string(bc.count), g17(bc.bound)});
  }
  run.add(companion(out_path, "counts"), c);
  run.finish(out);
}

void do_spectrum(Run& run, const ScattererConfig& cfg, std::size_t k_max,
                 const std::string& out_path, std::ostream& out) {
  run.config("phi", cfg.phi);
  run.config("k_max", std::to_string(k_max));
  run.config("tail_nmax", std::to_string(cfg.tail_cutoff_nmax));
  run.config("tol_lambda", cfg.tol_lambda);
  run.cutoff("tail_cutoff_nmax", std::to_string(cfg.tail_cutoff_nmax));
  run.tolerance("tol_lambda", g17(cfg.tol_lambda));
  if (k_max < 1) throw ParameterError("--k-max must be at least 1");
  cfg.validate();
  const auto spec = solve_spectrum(cfg, k_max);

  auto w = run.writer({"k", "lambda", "bracket_lo", "bracket_hi", "residual"});
  w.comment("c0=" + g17(spec.c0));
  w.comment("rhs=" + g17(spec.rhs));
  for (const auto& e : spec.entries) {
    w.row({std::to_string(e.k), g17(e.lambda), g17(e.bracket_lo), g17(e.bracket_hi),
           g17(e.residual)});
  }
  run.add(out_path, w);
  run.finish(out);
}

void do_sequence(Run& run, SequenceKind kind, double lambda_max, const ScattererConfig& cfg,
                 const std::string& out_path, std::ostream& out) {
  run.config("kind", kind == SequenceKind::Midpoint ? "midpoint" : "secular");
  run.config("lambda_max", lambda_max);
  if (kind == SequenceKind::Secular) {
    run.config("phi", cfg.phi);
    run.config("tail_nmax", std::to_string(cfg.tail_cutoff_nmax));
    run.cutoff("tail_cutoff_nmax", std::to_string(cfg.tail_cutoff_nmax));
    run.tolerance("tol_lambda", g17(cfg.tol_lambda));
  }
  const auto seq = build_sequence(kind, lambda_max, cfg);
  auto w = run.writer({"lambda", "n_lambda", "class", "in_lambda_inf"});
  for (const auto& e : seq.entries) {
    w.row({g17(e.lambda), std::to_string(e.n_lambda), class_of(e.n_lambda),
           e.in_lambda_infinity ? "1" : "0"});
  }
  run.add(out_path, w);

  const auto dens = density_of_subsequence(seq);
  auto d = run.writer({"X", "count", "count_inf", "ratio"});
  d.comment("fitted_constant=" + g17(dens.fitted_constant));
  for (const auto& r : dens.rows) {
    d.row({g17(r.x), std::to_string(r.count), std::to_string(r.count_inf), g17(r.ratio)});
  }
  run.add(companion(out_path, "density"), d);
  run.finish(out);
}

void do_green_norms(Run& run, const std::string& list, double delta, const std::string& out_path,
                    std::ostream& out) {
  run.config("lambda_list", list);
  run.config("delta", delta);
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("--delta must lie in (0, 1)");
  const auto lambdas = parse_lambda_list(list);
  if (lambdas.empty()) throw ParameterError("--lambda-list is empty");
  std::uint64_t top = 0;
  for (double l : lambdas) {
    if (!(l > 0.0)) throw ParameterError(fmt::format("lambda = {} must be positive", l));
    check_not_pole(l);
    top = std::max({top, default_green_cutoff(l),
                    static_cast<std::uint64_t>(std::ceil(l + std::pow(l, delta))) + 1});
  }
  run.cutoff("green_cutoff", "max(100000, 16 lambda)");
  run.cutoff("sieve_x_max", std::to_string(top));
  const R3Table table(top);

  std::vector<std::vector<std::string>> rows(lambdas.size());
  parallel_for(lambdas.size(), [&](unsigned, std::size_t i) {
    const double l = lambdas[i];
    const double width = std::pow(l, delta);
    const auto nl = nearest_shell(l);
    double full = 0.0;
    double trunc = 0.0;
    double dist = std::nan("");
    try {
      const auto rep = truncation_distance(l, width, table);
      full = rep.norm_full_sq;
      trunc = rep.norm_trunc_sq;
      dist = rep.distance;
    } catch (const EmptyAnnulus&) {
      full = green_norm_sq(l, table);
    }
    rows[i] = {g17(l), std::to_string(nl), class_of(nl), g17(full), g17(trunc), g17(dist)};
  });
  auto w = run.writer({"lambda", "n_lambda", "class", "norm_full_sq", "norm_trunc_sq", "distance"});
  for (const auto& r : rows) w.row(r);
  run.add(out_path, w);
  run.finish(out);
}

void do_weyl(Run& run, int l, int m, std::uint64_t n_max, const std::string& out_path,
             std::ostream& out) {
  run.config("l", std::to_string(l));
  run.config("m", std::to_string(m));
  run.config("n_max", std::to_string(n_max));
  run.cutoff("n_max", std::to_string(n_max));
  const auto prof = weyl_profile({l, m}, n_max);
  auto w = run.writer({"n", "a", "n1", "r3", "W_re", "W_im", "ratio"});
  for (const auto& r : prof.rows) {
    w.row({std::to_string(r.n), std::to_string(r.a), std::to_string(r.n1), std::to_string(r.r3),
           g17(r.w.real()), g17(r.w.imag()), g17(r.ratio)});
  }
  run.add(out_path, w);
  auto d = run.writer({"k", "good_shells", "max_ratio", "argmax"});
  for (const auto& b : prof.dyadic) {
    d.row({std::to_string(b.k), std::to_string(b.good_shells), g17(b.max_ratio),
           std::to_string(b.argmax)});
  }
  run.add(companion(out_path, "dyadic"), d);
  run.finish(out);
}

void do_matrix_element(Run& run, const std::string& symbol_path, double lambda, double delta,
                       const std::string& x0_text, const std::string& out_path,
                       std::ostream& out) {
  run.config("symbol", symbol_path.empty() ? "identity" : symbol_path);
  run.config("lambda", lambda);
  run.config("delta", delta);
  run.config("x0", x0_text);
  const auto sym = symbol_path.empty() ? BandSymbol::identity() : load_symbol(symbol_path);
  const auto x0 = parse_torus_point(x0_text);
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("--delta must lie in (0, 1)");
  if (!(lambda > 0.0)) throw ParameterError("--lambda must be positive");
  const double width = std::pow(lambda, delta);
  const auto me = matrix_element(sym, lambda, width, x0);
  const auto mu = liouville_average(sym);
  const auto nl = nearest_shell(lambda);

  auto w = run.writer({"lambda", "L", "n_lambda", "class", "re", "im", "liouville_re",
                       "liouville_im", "deviation", "points"});
  w.row({g17(lambda), g17(width), std::to_string(nl), class_of(nl), g17(me.value.real()),
         g17(me.value.imag()), g17(mu.real()), g17(mu.imag()), g17(std::abs(me.value - mu)),
         std::to_string(me.points)});
  run.add(out_path, w);
  out << fmt::format("<Op(a) g, g> = {} + {} i  (Liouville {} + {} i, L = {}, {} points)\n",
                     g17(me.value.real()), g17(me.value.imag()), g17(mu.real()), g17(mu.imag()),
                     g17(width), me.points);
  run.finish(out);
}

void do_qe(Run& run, QERunConfig cfg, const std::vector<std::string>& obs_specs,
           const std::string& x0_text, const std::string& out_path, std::ostream& out) {
  run.config("sequence", cfg.sequence_kind == SequenceKind::Midpoint ? "midpoint" : "secular");
  run.config("lambda_max", cfg.lambda_max);
  run.config("delta", cfg.delta);
  run.config("x0", x0_text);
  std::string joined;
  for (const auto& s : obs_specs) joined += (joined.empty() ? "" : ",") + s;
  run.config("observables", joined);
  if (cfg.sequence_kind == SequenceKind::Secular) {
    run.config("phi", cfg.phi);
    run.config("tail_nmax", std::to_string(cfg.tail_cutoff_nmax));
    run.cutoff("tail_cutoff_nmax", std::to_string(cfg.tail_cutoff_nmax));
  }
  cfg.x0 = parse_torus_point(x0_text);
  cfg.observables = load_observables(obs_specs);
  cfg.validate();
  const auto report = run_qe(cfg);

  std::vector<std::string> cols{"lambda", "n_lambda", "class", "in_lambda_inf", "L", "empty"};
  for (const auto& n : report.names) {
    cols.push_back(n + "_re");
    cols.push_back(n + "_im");
    cols.push_back(n + "_dev");
  }
  auto w = run.writer(cols);
  for (const auto& r : report.rows) {
    std::vector<std::string> f{g17(r.lambda), std::to_string(r.n_lambda), class_field(r.klass),
                               r.in_lambda_infinity ? "1" : "0", g17(r.width),
                               r.empty ? "1" : "0"};
    for (std::size_t o = 0; o < report.names.size(); ++o) {
      if (r.empty) {
        f.insert(f.end(), {"nan", "nan", "nan"});
      } else {
        const auto& v = r.values[o];
        f.push_back(g17(v.element.real()));
        f.push_back(g17(v.element.imag()));
        f.push_back(g17(v.deviation));
      }
    }
    w.row(f);
  }
  run.add(out_path, w);

  auto s = run.writer({"observable", "X", "count", "count_inf", "density", "S_all", "S_inf"});
  for (std::size_t o = 0; o < report.names.size(); ++o) {
    for (const auto& row : report.summary[o]) {
      s.row({report.names[o], g17(row.x), std::to_string(row.count),
             std::to_string(row.count_inf), g17(row.density), g17(row.s_all), g17(row.s_inf)});
    }
  }
  run.add(companion(out_path, "summary"), s);
  run.finish(out);
}

// Inserts "--key value" pairs from --config files right after the subcommand,
// so that flags given on the command line take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  if (args.empty()) return args;
  std::vector<std::string> rest;
  std::vector<std::string> injected;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a == "--config" && i + 1 < args.size()) {
      const auto extra = config_file_arguments(args[i + 1]);
      injected.insert(injected.end(), extra.begin(), extra.end());
      ++i;
    } else if (a.rfind("--config=", 0) == 0) {
      const auto extra = config_file_arguments(a.substr(9));
      injected.insert(injected.end(), extra.begin(), extra.end());
    } else {
      rest.push_back(a);
    }
  }
  std::vector<std::string> out{args[0]};
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

}  // namespace

std::vector<double> parse_lambda_list(const std::string& spec) {
  auto num = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) {
      throw ParameterError(fmt::format("cannot read '{}' in lambda list '{}'", s, spec));
    }
    return v;
  };
  auto split = [](const std::string& s, char sep) {
    std::vector<std::string> f;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) f.push_back(item);
    return f;
  };
  if (fs::is_regular_file(spec)) {
    const auto t = read_csv(spec);
    std::vector<double> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) out.push_back(t.number(r, "lambda"));
    return out;
  }
  if (spec.find(':') != std::string::npos) {
    const auto f = split(spec, ':');
    if (f.size() == 3 && f[0] == "midpoints") {
      const double lo = num(f[1]);
      const double hi = num(f[2]);
      std::vector<double> out;
      for (const auto& e : build_midpoint_sequence(hi).entries) {
        if (e.lambda >= lo) out.push_back(e.lambda);
      }
      return out;
    }
    if (f.size() != 3) throw ParameterError(fmt::format("bad lambda range '{}'", spec));
    const double lo = num(f[0]);
    const double hi = num(f[1]);
    const double step = num(f[2]);
    if (!(step > 0.0) || hi < lo) throw ParameterError(fmt::format("bad lambda range '{}'", spec));
    std::vector<double> out;
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
  }
  std::vector<double> out;
  for (const auto& s : split(spec, ',')) out.push_back(num(s));
  return out;
}

TorusPoint parse_torus_point(const std::string& spec) {
  std::vector<double> v;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double d = 0.0;
    try {
      d = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw ParameterError(fmt::format("cannot read torus point '{}'", spec));
    }
    v.push_back(d);
  }
  if (v.size() != 3) throw ParameterError(fmt::format("torus point '{}' needs 3 coordinates", spec));
  return {v[0], v[1], v[2]};
}

std::vector<std::string> config_file_arguments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  std::vector<std::string> out;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("{}:{}: expected key=value", path, lineno));
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(fmt::format("{}:{}: empty key", path, lineno));
    out.push_back("--" + key);
    out.push_back(value);
  }
  return out;
}

int dispatch(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical laboratory for the point scatterer on the flat 3-torus", "scatter3d"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  auto last = [](CLI::Option* o) { return o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast); };
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", "key=value file with default flag values");
  };

  std::string out_path;
  auto add_out = [&](CLI::App* sub, const std::string& def) {
    last(sub->add_option("--out", out_path, "Output CSV path")->default_str(def));
  };

  // density
  std::uint64_t x_max = 0;
  std::size_t memory_mib = 1024;
  auto* density = app.add_subcommand("density", "r3 sieve, 4-adic data and bad-shell counts");
  last(density->add_option("--x-max", x_max, "Largest n")->required());
  last(density->add_option("--memory-mib", memory_mib, "Sieve memory budget in MiB")
           ->capture_default_str());
  add_out(density, "density.csv");
  add_config(density);

  // spectrum
  ScattererConfig scfg;
  std::size_t k_max = 0;
  auto* spectrum = app.add_subcommand("spectrum", "Roots of the secular equation");
  last(spectrum->add_option("--phi", scfg.phi, "Extension parameter in (-pi, pi)")
           ->capture_default_str());
  last(spectrum->add_option("--k-max", k_max, "Number of brackets above n_0")->required());
  last(spectrum->add_option("--tail-nmax", scfg.tail_cutoff_nmax, "Shell cutoff before the tail")
           ->capture_default_str());
  last(spectrum->add_option("--tol", scfg.tol_lambda, "Bisection width")->capture_default_str());
  add_out(spectrum, "spectrum.csv");
  add_config(spectrum);

  // sequence
  std::string kind_text = "midpoint";
  double lambda_max = 0.0;
  auto* sequence = app.add_subcommand("sequence", "Interlaced sequence with Lambda_inf flags");
  last(sequence->add_option("--kind", kind_text, "midpoint or secular")->capture_default_str());
  last(sequence->add_option("--lambda-max", lambda_max, "Largest lambda")->required());
  last(sequence->add_option("--phi", scfg.phi, "Extension parameter (secular)")
           ->capture_default_str());
  last(sequence->add_option("--tail-nmax", scfg.tail_cutoff_nmax, "Shell cutoff (secular)")
           ->capture_default_str());
  add_out(sequence, "sequence.csv");
  add_config(sequence);

  // green-norms
  std::string lambda_list;
  double delta = 0.3;
  auto* green = app.add_subcommand("green-norms", "Full and truncated Green's function norms");
  last(green->add_option("--lambda-list", lambda_list,
                         "CSV file, a,b,c, lo:hi:step or midpoints:lo:hi")
           ->required());
  last(green->add_option("--delta", delta, "L = lambda^delta")->capture_default_str());
  add_out(green, "green_norms.csv");
  add_config(green);

  // weyl
  int l = 0;
  int m = 0;
  std::uint64_t n_max = 0;
  auto* weyl = app.add_subcommand("weyl", "Weyl sums W_{l,m}(n) and dyadic maxima");
  last(weyl->add_option("--l", l, "Degree")->required());
  last(weyl->add_option("--m", m, "Order")->required());
  last(weyl->add_option("--n-max", n_max, "Largest shell (>= 100)")->required());
  add_out(weyl, "weyl.csv");
  add_config(weyl);

  // matrix-element
  std::string symbol_path;
  double lambda = 0.0;
  std::string x0_text = "0,0,0";
  auto* melem = app.add_subcommand("matrix-element", "<Op(a) g_lambda,L, g_lambda,L>");
  last(melem->add_option("--symbol", symbol_path, "Symbol JSON (default: identity)"));
  last(melem->add_option("--lambda", lambda, "Spectral parameter")->required());
  last(melem->add_option("--delta", delta, "L = lambda^delta")->capture_default_str());
  last(melem->add_option("--x0", x0_text, "Scatterer position a,b,c")->capture_default_str());
  add_out(melem, "matrix_element.csv");
  add_config(melem);

  // qe
  QERunConfig qcfg;
  qcfg.lambda_max = 10000.0;
  std::string seq_text = "midpoint";
  std::vector<std::string> obs_specs;
  auto* qe = app.add_subcommand("qe", "Matrix elements along an interlaced sequence");
  last(qe->add_option("--sequence", seq_text, "midpoint or secular")->capture_default_str());
  last(qe->add_option("--phi", qcfg.phi, "Extension parameter (secular)")->capture_default_str());
  last(qe->add_option("--lambda-max", qcfg.lambda_max, "Largest lambda")->capture_default_str());
  last(qe->add_option("--delta", qcfg.delta, "L = lambda^delta")->capture_default_str());
  qe->add_option("--observables", obs_specs, "Symbol files or directories")
      ->required()
      ->delimiter(',');
  last(qe->add_option("--x0", x0_text, "Scatterer position a,b,c")->capture_default_str());
  last(qe->add_option("--tail-nmax", qcfg.tail_cutoff_nmax, "Shell cutoff (secular)")
           ->capture_default_str());
  add_out(qe, "qe.csv");
  add_config(qe);

  std::vector<std::string> args;
  try {
    args = expand_config(raw_args);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  std::vector<std::string> argv_store{"scatter3d"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  auto pick_out = [&](const std::string& def) { return out_path.empty() ? def : out_path; };
  try {
    auto* sub = app.get_subcommands().front();
    if (sub == density) {
      Run r("density", raw_args);
      do_density(r, x_max, memory_mib, pick_out("density.csv"), out);
    } else if (sub == spectrum) {
      Run r("spectrum", raw_args);
      do_spectrum(r, scfg, k_max, pick_out("spectrum.csv"), out);
    } else if (sub == sequence) {
      Run r("sequence", raw_args);
      do_sequence(r, parse_kind(kind_text), lambda_max, scfg, pick_out("sequence.csv"), out);
    } else if (sub == green) {
      Run r("green-norms", raw_args);
      do_green_norms(r, lambda_list, delta, pick_out("green_norms.csv"), out);
    } else if (sub == weyl) {
      Run r("weyl", raw_args);
      do_weyl(r, l, m, n_max, pick_out("weyl.csv"), out);
    } else if (sub == melem) {
      Run r("matrix-element", raw_args);
      do_matrix_element(r, symbol_path, lambda, delta, x0_text, pick_out("matrix_element.csv"),
                        out);
    } else if (sub == qe) {
      Run r("qe", raw_args);
      qcfg.sequence_kind = parse_kind(seq_text);
      do_qe(r, qcfg, obs_specs, x0_text, pick_out("qe.csv"), out);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace scatter3d
