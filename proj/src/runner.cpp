#include "cocyclelab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>

#include <json.hpp>

#include "cocyclelab/errors.hpp"
#include "cocyclelab/genericity.hpp"
#include "cocyclelab/holonomy.hpp"
#include "cocyclelab/parallel.hpp"
#include "cocyclelab/projective.hpp"

namespace cocyclelab {

namespace {

using json = nlohmann::ordered_json;

std::string num(double v) { return format_double(v); }

std::string cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

class Csv {
 public:
  Csv(const std::string& schema, const std::string& meta, const std::vector<std::string>& columns) {
    text_ = "# schema=" + schema + "/1\n# " + meta + "\n";
    row(columns);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cell(cells[i]);
    text_ += "\n";
  }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

std::vector<std::string> lambda_columns(const std::string& prefix, int d) {
  std::vector<std::string> out;
  for (int i = 1; i <= d; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

struct Context {
  const Config& cfg;
  std::string command;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string meta;
  BaseSystem sys;
  GroupDescriptor group;
  std::optional<CocycleSpec> cocycle;
  std::vector<std::pair<std::string, std::string>> outputs;  // file name, bytes
  json results = json::object();
  std::ostream& log;
  std::optional<std::pair<int, std::string>> failure;  // reported after outputs are written

  const CocycleSpec& a() const { return *cocycle; }
  Rng rng(std::uint64_t purpose) const { return Rng::stream(seed, purpose); }
  void emit(const std::string& name, const Csv& csv) { outputs.emplace_back(name + ".csv", csv.text()); }
  /// All configuration has been read: reject leftovers before computing.
  void ready() const { cfg.require_consumed(); }
};

BasePoint point_param(const Context& c, const std::string& key) {
  const std::string v = c.cfg.get("params", key);
  BasePoint p;
  try {
    p = parse_point(v);
  } catch (const std::exception& e) {
    throw ConfigError("params." + key + ": " + e.what());
  }
  const bool torus = std::holds_alternative<TorusPoint>(p);
  if (torus != (c.sys.kind == BaseKind::CatMap))
    throw ConfigError("params." + key + " does not live on base " + to_string(c.sys.kind));
  if (!torus && std::get<SymbolSequence>(p).symbols() != c.sys.symbols)
    throw ConfigError("params." + key + " uses a different alphabet than the base");
  return p;
}

HolonomyKind kind_param(const Context& c) {
  const std::string k = c.cfg.get("params", "kind", "stable");
  if (k == "stable") return HolonomyKind::Stable;
  if (k == "unstable") return HolonomyKind::Unstable;
  throw ConfigError("params.kind = '" + k + "' (expected stable or unstable)");
}

std::int64_t positive_int(const Context& c, const std::string& key, std::int64_t fallback) {
  const auto v = c.cfg.get_int("params", key, fallback);
  if (v <= 0) throw ConfigError("params." + key + " must be positive");
  return v;
}

json certificate_json(const DominationCertificate& cert) {
  return {{"N", cert.N},           {"theta", cert.theta},   {"k_max", cert.k_max}, {"max_log_ratio", cert.max_log_ratio},
          {"holds", cert.holds},   {"tau", cert.tau},       {"bunched", cert.bunched}};
}

// ---------------------------------------------------------------- commands

void cmd_lyap(Context& c) {
  const auto n = positive_int(c, "n", 1000);
  const auto trace_every = c.cfg.get_int("params", "trace_every", 0);
  if (trace_every < 0) throw ConfigError("params.trace_every must be >= 0");
  std::optional<BasePoint> x;
  if (c.cfg.has("params", "x")) x = point_param(c, "x");
  const auto points = x ? std::int64_t{1} : positive_int(c, "points", 1);
  c.ready();

  std::vector<LyapunovReport> reports(static_cast<std::size_t>(points));
  parallel_for(static_cast<int>(points), c.threads, [&](int i) {
    BasePoint start;
    if (x) {
      start = *x;
    } else {
      Rng rng = Rng::stream(c.seed, static_cast<std::uint64_t>(i));
      start = sample_orbit_start(c.sys, rng, n);
    }
    reports[static_cast<std::size_t>(i)] = lyapunov_spectrum(c.a(), start, n, trace_every);
  });

  const int d = c.a().d();
  auto cols = std::vector<std::string>{"point", "x0", "n"};
  for (auto& s : lambda_columns("lambda_", d)) cols.push_back(s);
  cols.insert(cols.end(), {"sum_residual", "window_drift"});
  Csv csv("lyap", c.meta, cols);
  auto tcols = std::vector<std::string>{"point", "n"};
  for (auto& s : lambda_columns("lambda_", d)) tcols.push_back(s);
  Csv trace("lyap_trace", c.meta, tcols);
  json pts = json::array();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    std::vector<std::string> row{std::to_string(i), point_to_string(r.x0), std::to_string(r.n)};
    for (double l : r.exponents) row.push_back(num(l));
    row.push_back(num(r.sum_residual));
    row.push_back(num(r.window_drift));
    csv.row(row);
    for (const auto& [k, ls] : r.trace) {
      std::vector<std::string> t{std::to_string(i), std::to_string(k)};
      for (double l : ls) t.push_back(num(l));
      trace.row(t);
    }
    pts.push_back({{"x0", point_to_string(r.x0)},
                   {"n", r.n},
                   {"exponents", r.exponents},
                   {"sum_residual", r.sum_residual},
                   {"window_drift", r.window_drift}});
    std::string line = "point=" + std::to_string(i) + " lambda=";
    for (std::size_t j = 0; j < r.exponents.size(); ++j) line += (j ? "," : "") + num(r.exponents[j]);
    c.log << line << " window_drift=" << num(r.window_drift) << "\n";
  }
  c.emit("lyap", csv);
  if (trace_every > 0) c.emit("lyap_trace", trace);
  c.results["points"] = pts;
}

void cmd_holonomy(Context& c) {
  const HolonomyKind kind = kind_param(c);
  HolonomyOptions opt;
  opt.tol = c.cfg.get_double("params", "tol", opt.tol);
  opt.n_max = positive_int(c, "n_max", opt.n_max);
  opt.stride = static_cast<int>(positive_int(c, "stride", opt.stride));
  const double offset = c.cfg.get_double("params", "offset", 0.1);
  std::optional<BasePoint> x, y;
  if (c.cfg.has("params", "x")) x = point_param(c, "x");
  if (c.cfg.has("params", "y")) y = point_param(c, "y");
  c.ready();

  Rng rng = c.rng(0);
  if (!x) x = sample_one(c.sys, rng);
  if (!y) y = local_partner(c.sys, *x, kind, rng, offset);
  const auto cert = certify_bunching(c.a(), *x);
  const auto r = kind == HolonomyKind::Stable ? stable_holonomy(c.a(), *x, *y, opt) : unstable_holonomy(c.a(), *x, *y, opt);

  Csv csv("holonomy_gap", c.meta, {"n", "cauchy_gap"});
  for (const auto& [n, gap] : r.gap_trace) csv.row({std::to_string(n), num(gap)});
  c.emit("holonomy", csv);
  c.results = {{"kind", kind == HolonomyKind::Stable ? "stable" : "unstable"},
               {"x", point_to_string(*x)},
               {"y", point_to_string(*y)},
               {"H", format_matrix(r.H)},
               {"n_stop", r.n_stop},
               {"cauchy_gap", r.cauchy_gap},
               {"converged", r.converged},
               {"exact", r.exact},
               {"certificate", certificate_json(cert)}};
  c.log << "H=" << format_matrix(r.H) << " n_stop=" << r.n_stop << " cauchy_gap=" << num(r.cauchy_gap)
        << " converged=" << (r.converged ? "true" : "false") << "\n";
  if (!r.converged) c.failure = {kExitNumerical, "holonomy did not converge within n_max"};
}

void cmd_holonomy_deriv_check(Context& c) {
  const HolonomyKind kind = kind_param(c);
  const double h = c.cfg.get_double("params", "h", 1e-4);
  const double rel_tol = c.cfg.get_double("params", "rel_tol", 1e-4);
  if (!(h > 0.0) || !(rel_tol > 0.0)) throw ConfigError("params.h and params.rel_tol must be positive");
  BasePoint x = c.sys.kind == BaseKind::CatMap ? BasePoint(TorusPoint::fixed(0.0, 0.0))
                                               : BasePoint(SymbolSequence::periodic(c.sys.symbols, {0}));
  if (c.cfg.has("params", "x")) x = point_param(c, "x");
  std::optional<BasePoint> y;
  if (c.cfg.has("params", "y")) y = point_param(c, "y");
  Bump dir;
  dir.center = c.cfg.has("params", "dir_center") ? point_param(c, "dir_center") : x;
  dir.radius = c.cfg.get_double("params", "dir_radius", c.sys.kind == BaseKind::CatMap ? 0.2 : 1.5 * 0.125);
  dir.amplitude = 1.0;
  if (c.cfg.has("params", "dir_direction")) {
    try {
      dir.direction = parse_matrix(c.cfg.get("params", "dir_direction"));
    } catch (const std::exception& e) {
      throw ConfigError(std::string("params.dir_direction: ") + e.what());
    }
    if (dir.direction.rows() != c.group.d || dir.direction.cols() != c.group.d)
      throw ConfigError("params.dir_direction has the wrong shape");
  } else {
    const auto basis = lie_basis(c.group);
    const auto i = c.cfg.get_int("params", "dir_lie", 0);
    if (i < 0 || i >= static_cast<std::int64_t>(basis.size()))
      throw ConfigError("params.dir_lie must be in [0, " + std::to_string(basis.size()) + ")");
    dir.direction = basis[static_cast<std::size_t>(i)];
  }
  HolonomyOptions hopt;
  hopt.tol = c.cfg.get_double("params", "tol", 1e-13);
  hopt.n_max = positive_int(c, "n_max", 20000);
  c.ready();

  Rng rng = c.rng(0);
  if (!y) y = local_partner(c.sys, x, kind, rng);
  DerivativeOptions dopt;
  dopt.inner = hopt;
  const auto an = kind == HolonomyKind::Stable ? stable_holonomy_derivative(c.a(), x, *y, dir, dopt)
                                               : unstable_holonomy_derivative(c.a(), x, *y, dir, dopt);
  const auto with = [&](double amp) {
    auto b = c.a();
    b.bumps.push_back(dir);
    b.bumps.back().amplitude = amp;
    return kind == HolonomyKind::Stable ? stable_holonomy(b, x, *y, hopt).H : unstable_holonomy(b, x, *y, hopt).H;
  };
  const Mat fd = (with(h) - with(-h)) / (2.0 * h);
  const double scale = std::max(an.value.norm(), fd.norm());
  const double rel = scale > 0.0 ? (an.value - fd).norm() / scale : 0.0;

  Csv csv("holonomy_deriv", c.meta, {"row", "col", "analytic_re", "analytic_im", "fd_re", "fd_im"});
  for (int i = 0; i < an.value.rows(); ++i)
    for (int j = 0; j < an.value.cols(); ++j)
      csv.row({std::to_string(i), std::to_string(j), num(an.value(i, j).real()), num(an.value(i, j).imag()),
               num(fd(i, j).real()), num(fd(i, j).imag())});
  c.emit("holonomy-deriv-check", csv);
  const bool pass = rel <= rel_tol;
  c.results = {{"kind", kind == HolonomyKind::Stable ? "stable" : "unstable"},
               {"x", point_to_string(x)},
               {"y", point_to_string(*y)},
               {"analytic", format_matrix(an.value)},
               {"finite_difference", format_matrix(fd)},
               {"relative_error", rel},
               {"rel_tol", rel_tol},
               {"terms", an.terms},
               {"exact", an.exact},
               {"certificate", certificate_json(an.certificate)},
               {"pass", pass}};
  c.log << "relative_error=" << num(rel) << " terms=" << an.terms << " pass=" << (pass ? "true" : "false") << "\n";
  if (!pass) c.failure = {kExitNumerical, "analytic and finite-difference derivatives disagree: relative error " + num(rel)};
}

void cmd_domination(Context& c) {
  std::optional<BasePoint> x;
  if (c.cfg.has("params", "x")) x = point_param(c, "x");
  const auto N = c.cfg.get_int("params", "N", 0);
  const auto k_max = positive_int(c, "k_max", 200);
  std::optional<double> theta;
  if (c.cfg.has("params", "theta")) theta = c.cfg.get_double("params", "theta", 0.0);
  if (N < 0) throw ConfigError("params.N must be >= 0 (0 = automatic)");
  c.ready();

  Rng rng = c.rng(0);
  if (!x) x = sample_one(c.sys, rng);
  const auto cert = theta ? domination_check(c.a(), *x, N > 0 ? static_cast<int>(N) : 1, *theta, static_cast<int>(k_max))
                          : certify_bunching(c.a(), *x, static_cast<int>(N), static_cast<int>(k_max));
  Csv csv("domination", c.meta, {"x", "N", "theta", "k_max", "max_log_ratio", "tau", "holds", "bunched"});
  csv.row({point_to_string(*x), std::to_string(cert.N), num(cert.theta), std::to_string(cert.k_max),
           num(cert.max_log_ratio), num(cert.tau), cert.holds ? "1" : "0", cert.bunched ? "1" : "0"});
  c.emit("domination", csv);
  c.results = certificate_json(cert);
  c.results["x"] = point_to_string(*x);
  c.log << "N=" << cert.N << " theta=" << num(cert.theta) << " tau=" << num(cert.tau)
        << " holds=" << (cert.holds ? "true" : "false") << " bunched=" << (cert.bunched ? "true" : "false") << "\n";
}

void cmd_phi_rank(Context& c) {
  const auto l = positive_int(c, "l", 1);
  const auto depth = positive_int(c, "depth", 1);
  const auto horizon = positive_int(c, "horizon", 200);
  const double h = c.cfg.get_double("params", "h", 1e-4);
  const double rank_tol = c.cfg.get_double("params", "rank_tol", 1e-9);
  const std::string mode = c.cfg.get("params", "mode", "both");
  if (mode != "both" && mode != "analytic" && mode != "fd")
    throw ConfigError("params.mode = '" + mode + "' (expected both, analytic or fd)");
  c.ready();

  const auto data = build_homoclinic_data(c.sys, static_cast<int>(l), static_cast<int>(depth), static_cast<int>(horizon));
  std::vector<std::pair<std::string, PhiJacobian>> jacs;
  if (mode != "fd") jacs.emplace_back("analytic", phi_jacobian(c.a(), data, JacobianMode::Analytic, h));
  if (mode != "analytic") jacs.emplace_back("fd", phi_jacobian(c.a(), data, JacobianMode::FiniteDifference, h));

  Csv csv("phi_rank", c.meta, {"mode", "quantity", "index", "value"});
  json modes = json::object();
  for (auto& [name, j] : jacs) {
    const double top = j.singular_values.size() ? j.singular_values[0] : 0.0;
    int rank = 0;
    for (int i = 0; i < j.singular_values.size(); ++i)
      if (j.singular_values[i] > rank_tol * top) ++rank;
    std::vector<double> sv(j.singular_values.data(), j.singular_values.data() + j.singular_values.size());
    for (std::size_t i = 0; i < sv.size(); ++i) csv.row({name, "singular_value", std::to_string(i), num(sv[i])});
    csv.row({name, "rank", "0", std::to_string(rank)});
    for (int b = 0; b < 4; ++b) csv.row({name, "block_norm", std::to_string(b), num(j.block_norms[static_cast<std::size_t>(b)])});
    for (int b = 0; b < 2; ++b)
      csv.row({name, "diagonal_min_sv", std::to_string(b), num(j.diagonal_min_sv[static_cast<std::size_t>(b)])});
    const double cond = top > 0.0 && !sv.empty() ? sv.back() / top : 0.0;
    modes[name] = {{"rank", rank},
                   {"size", j.J.rows()},
                   {"singular_values", sv},
                   {"sigma_ratio", cond},
                   {"block_norms", {{"upper_left", j.block_norms[0]}, {"upper_right", j.block_norms[1]},
                                    {"lower_left", j.block_norms[2]}, {"lower_right", j.block_norms[3]}}},
                   {"diagonal_min_sv", {j.diagonal_min_sv[0], j.diagonal_min_sv[1]}}};
    c.log << "mode=" << name << " rank=" << rank << "/" << j.J.rows() << " sigma_ratio=" << num(cond)
          << " upper_right=" << num(j.block_norms[1]) << "\n";
  }
  c.results = {{"l", l}, {"depth", depth}, {"modes", modes}};
  if (jacs.size() == 2) {
    const double dis = mode_disagreement(jacs[0].second, jacs[1].second);
    csv.row({"both", "mode_disagreement", "0", num(dis)});
    c.results["mode_disagreement"] = dis;
    c.log << "mode_disagreement=" << num(dis) << "\n";
  }
  c.emit("phi-rank", csv);
}

void cmd_invariant_measure(Context& c) {
  const auto matrix = [&](const std::string& key) {
    try {
      return parse_matrix(c.cfg.get("params", key));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("params." + key + ": " + e.what());
    }
  };
  const Mat g1 = matrix("g1"), g2 = matrix("g2");
  if (g1.rows() != g1.cols() || g1.rows() != g2.rows() || g2.rows() != g2.cols())
    throw ConfigError("params.g1 and params.g2 must be square of equal size");
  CommonMeasureOptions opt;
  opt.L = static_cast<int>(positive_int(c, "L", opt.L));
  opt.bound = c.cfg.get_double("params", "bound", opt.bound);
  opt.words = static_cast<int>(positive_int(c, "words", opt.words));
  opt.finite_orbit = static_cast<int>(c.cfg.get_int("params", "finite_orbit", opt.finite_orbit));
  opt.invariance_tol = c.cfg.get_double("params", "invariance_tol", opt.invariance_tol);
  opt.seed = c.seed;
  const auto iid_n = c.cfg.get_int("params", "iid_n", 0);
  if (iid_n < 0) throw ConfigError("params.iid_n must be >= 0");
  c.ready();

  const auto r = common_invariant_measure_test(g1, g2, opt);
  std::optional<double> iid;
  if (iid_n > 0) {
    if (g1.rows() != c.group.d) throw ConfigError("params.g1 does not match group.d");
    const auto b = bernoulli_cocycle(c.group, g1, g2);
    Rng rng = c.rng(1);
    iid = lyapunov_spectrum(b, sample_orbit_start(b.base, rng, iid_n), iid_n).exponents.front();
  }
  Csv csv("invariant_measure", c.meta,
          {"verdict", "witness_kind", "witness_residual", "max_word_norm", "growth_rate", "subspaces_checked",
           "orbits_checked", "iid_n", "iid_lambda1"});
  csv.row({to_string(r.verdict), r.witness_kind, num(r.witness_residual), num(r.max_word_norm), num(r.growth_rate),
           std::to_string(r.subspaces_checked), std::to_string(r.orbits_checked), std::to_string(iid_n),
           iid ? num(*iid) : ""});
  c.emit("invariant-measure", csv);
  c.results = {{"verdict", to_string(r.verdict)},
               {"witness_kind", r.witness_kind},
               {"witness", r.witness.size() ? format_matrix(r.witness) : ""},
               {"witness_residual", r.witness_residual},
               {"max_word_norm", r.max_word_norm},
               {"growth_rate", r.growth_rate},
               {"subspaces_checked", r.subspaces_checked},
               {"orbits_checked", r.orbits_checked}};
  if (iid) c.results["iid_lambda1"] = *iid;
  c.log << "verdict=" << to_string(r.verdict) << "\nwitness_kind=" << r.witness_kind
        << "\nwitness_residual=" << num(r.witness_residual) << "\ngrowth_rate=" << num(r.growth_rate) << "\n";
  if (iid) c.log << "iid_lambda1=" << num(*iid) << "\n";
}

void cmd_disintegration(Context& c) {
  DisintegrationOptions opt;
  opt.zero_tol = c.cfg.get_double("params", "zero_tol", opt.zero_tol);
  opt.lyap_n = positive_int(c, "lyap_n", opt.lyap_n);
  opt.fiber.n_orbits = static_cast<int>(positive_int(c, "n_orbits", opt.fiber.n_orbits));
  opt.fiber.n_iter = static_cast<int>(positive_int(c, "n_iter", opt.fiber.n_iter));
  opt.fiber.threads = c.threads;
  opt.holonomy.tol = c.cfg.get_double("params", "holonomy_tol", opt.holonomy.tol);
  const auto n_stable = c.cfg.get_int("params", "stable_pairs", 25);
  const auto n_unstable = c.cfg.get_int("params", "unstable_pairs", 25);
  if (n_stable < 0 || n_unstable < 0) throw ConfigError("params.stable_pairs and unstable_pairs must be >= 0");
  const auto width = c.cfg.get_int("params", "width", 0);
  Partition part = c.sys.kind == BaseKind::CatMap
                       ? Partition::grid(static_cast<int>(positive_int(c, "grid", 4)))
                       : Partition::cylinders(c.sys.symbols, static_cast<int>(positive_int(c, "depth", 1)));
  c.ready();

  Rng prng = c.rng(0), frng = c.rng(1);
  const auto pairs = sample_holonomy_pairs(c.sys, prng, static_cast<int>(n_stable), static_cast<int>(n_unstable),
                                           static_cast<int>(width));
  const auto r = disintegration_invariance_test(c.a(), pairs, part, frng, opt);
  Csv csv("disintegration", c.meta, {"pair", "kind", "cell_from", "cell_to", "distance"});
  for (std::size_t i = 0; i < r.pairs.size(); ++i) {
    const auto& p = r.pairs[i];
    csv.row({std::to_string(i), p.pair.kind == HolonomyKind::Stable ? "stable" : "unstable", part.label(p.cell_from),
             part.label(p.cell_to), num(p.distance)});
  }
  c.emit("disintegration", csv);
  const bool pass = r.max_distance <= 2.0 * r.resolution;
  c.results = {{"exponents", r.exponents},
               {"pairs", r.pairs.size()},
               {"skipped", r.skipped},
               {"max_distance", r.max_distance},
               {"mean_distance", r.mean_distance},
               {"resolution", r.resolution},
               {"cells", r.cells},
               {"atoms", r.atoms},
               {"within_twice_resolution", pass}};
  c.log << "max_distance=" << num(r.max_distance) << " resolution=" << num(r.resolution)
        << " within_twice_resolution=" << (pass ? "true" : "false") << "\n";
}

void cmd_sweep(Context& c) {
  SweepOptions opt;
  opt.epsilon = c.cfg.get_double("params", "epsilon", opt.epsilon);
  opt.trials = static_cast<int>(positive_int(c, "trials", opt.trials));
  opt.n = positive_int(c, "n", opt.n);
  opt.threshold = c.cfg.get_double("params", "threshold", opt.threshold);
  opt.bumps = static_cast<int>(positive_int(c, "bumps", opt.bumps));
  opt.radius = c.cfg.get_double("params", "radius", opt.radius);
  opt.recheck = c.cfg.get_bool("params", "recheck", opt.recheck);
  opt.holder.samples = static_cast<int>(positive_int(c, "holder_samples", opt.holder.samples));
  opt.holder.nu = c.cfg.get_double("params", "holder_nu", opt.holder.nu);
  opt.holder.r = static_cast<int>(c.cfg.get_int("params", "holder_r", opt.holder.r));
  const auto bins = positive_int(c, "bins", 20);
  opt.holder.seed = c.seed;
  opt.threads = c.threads;
  c.ready();

  Rng rng = c.rng(0);
  const auto r = positivity_sweep(c.a(), opt, rng);
  Csv csv("sweep", c.meta,
          {"trial", "amplitude", "holder_distance", "lambda1", "n", "flag", "lambda1_recheck", "recheck_ok", "failed"});
  for (const auto& t : r.trials)
    csv.row({std::to_string(t.index), num(t.amplitude), num(t.holder_distance), num(t.lambda1), std::to_string(t.n),
             t.positive ? "1" : "0", num(t.lambda1_recheck), t.recheck_ok ? "1" : "0", t.failed ? "1" : "0"});
  c.emit("sweep", csv);
  Csv hist("sweep_histogram", c.meta, {"lower", "upper", "count"});
  for (const auto& b : lambda_histogram(r, static_cast<int>(bins))) hist.row({num(b[0]), num(b[1]), num(b[2])});
  c.emit("sweep_histogram", hist);
  c.results = {{"trials", r.trials.size()},
               {"positive", r.positive},
               {"failed", r.failed},
               {"recheck_failures", r.recheck_failures},
               {"fraction", r.fraction}};
  c.log << "positive=" << r.positive << "/" << r.trials.size() << " failed=" << r.failed
        << " fraction=" << num(r.fraction) << "\n";
}

const std::map<std::string, std::function<void(Context&)>>& commands() {
  static const std::map<std::string, std::function<void(Context&)>> table = {
      {"lyap", cmd_lyap},
      {"holonomy", cmd_holonomy},
      {"holonomy-deriv-check", cmd_holonomy_deriv_check},
      {"domination", cmd_domination},
      {"phi-rank", cmd_phi_rank},
      {"invariant-measure", cmd_invariant_measure},
      {"disintegration", cmd_disintegration},
      {"sweep", cmd_sweep},
  };
  return table;
}

void classify(RunResult& r, std::exception_ptr e) {
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError& x) {
    r = {kExitConfig, "config", x.what(), {}, {}};
  } catch (const TypeError& x) {
    r = {kExitConfig, "config", x.what(), {}, {}};
  } catch (const DomainError& x) {
    r = {kExitConfig, "config", x.what(), {}, {}};
  } catch (const UnsupportedError& x) {
    r = {kExitConfig, "config", x.what(), {}, {}};
  } catch (const RefusalError& x) {
    r = {kExitRefusal, "refusal", x.what(), {}, {}};
  } catch (const std::filesystem::filesystem_error& x) {
    r = {kExitFailure, "io", x.what(), {}, {}};
  } catch (const std::exception& x) {
    r = {kExitNumerical, "numerical", x.what(), {}, {}};
  }
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [k, v] : commands()) out.push_back(k);
    return out;
  }();
  return names;
}

RunResult run(const RunRequest& request, std::ostream& log) {
  RunResult result;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Config cfg = request.config;
    if (request.seed) cfg.set("run.seed=" + std::to_string(*request.seed));
    if (request.threads) cfg.set("run.threads=" + std::to_string(*request.threads));
    if (request.out) cfg.set("run.out=" + *request.out);

    std::string command = cfg.get("run", "command", "");
    if (!request.command.empty()) {
      if (!command.empty() && command != request.command)
        throw ConfigError("command '" + request.command + "' conflicts with run.command = '" + command + "'");
      command = request.command;
    }
    if (command.empty()) throw ConfigError("no command given");
    const auto it = commands().find(command);
    if (it == commands().end()) throw ConfigError("unknown command '" + command + "'");

    const auto seed = cfg.get_int("run", "seed", 1);
    if (seed < 0) throw ConfigError("run.seed must be >= 0");
    const auto threads = cfg.get_int("run", "threads", 1);
    if (threads < 1 || threads > 1024) throw ConfigError("run.threads must be in [1, 1024]");
    std::string out = ".";
    if (const char* env = std::getenv("COCYCLELAB_OUT"); env && *env) out = env;
    out = cfg.get("run", "out", out);

    Context ctx{cfg, command, static_cast<std::uint64_t>(seed), static_cast<int>(threads), "", {}, {}, {}, {}, {}, log, {}};
    ctx.meta = "command=" + command + " config_hash=" + cfg.hash_hex() + " seed=" + std::to_string(seed) +
               " version=" + kVersion;
    try {
      ctx.sys = base_from_config(cfg);
      ctx.group = group_from_config(cfg);
      if (command != "invariant-measure") ctx.cocycle = cocycle_from_config(cfg, ctx.group, ctx.sys);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    it->second(ctx);

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::filesystem::create_directories(out);
    for (const auto& [name, bytes] : ctx.outputs) {
      const auto path = (std::filesystem::path(out) / name).string();
      std::ofstream f(path, std::ios::binary);
      f << bytes;
      if (!f) throw std::filesystem::filesystem_error("cannot write output", path, std::make_error_code(std::errc::io_error));
      result.files.push_back(path);
    }
    if (ctx.failure) {
      result.exit_code = ctx.failure->first;
      result.error_kind = "numerical";
      result.message = ctx.failure->second;
    }
    json summary = {{"command", command},
                    {"version", kVersion},
                    {"seed", seed},
                    {"threads", threads},
                    {"config_hash", cfg.hash_hex()},
                    {"wall_time_s", wall},
                    {"exit_code", result.exit_code},
                    {"files", result.files},
                    {"results", ctx.results}};
    if (ctx.failure) summary["error"] = {{"kind", result.error_kind}, {"message", result.message}};
    result.summary_json = summary.dump(2) + "\n";
    const auto path = (std::filesystem::path(out) / (command + ".json")).string();
    std::ofstream(path, std::ios::binary) << result.summary_json;
    result.files.push_back(path);
  } catch (...) {
    classify(result, std::current_exception());
  }
  return result;
}

std::string error_line(const RunResult& r) {
  std::string msg = r.message;
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  return "error=" + r.error_kind + " message=" + msg;
}

}  // namespace cocyclelab
