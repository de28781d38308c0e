#include "cocyclelab/cocycle.hpp"

#include <algorithm>
#include <cmath>

#include "cocyclelab/errors.hpp"
#include "cocyclelab/parallel.hpp"

namespace cocyclelab {

namespace {

constexpr double kTwoPi = 6.283185307179586;
constexpr int kRenormCadence = 50;
constexpr double kRescaleAbove = 1e100;

const TorusPoint& torus_of(const BasePoint& x) {
  if (const auto* t = std::get_if<TorusPoint>(&x)) return *t;
  throw TypeError("torus cocycle evaluated at a symbolic point");
}

const SymbolSequence& seq_of(const BasePoint& x) {
  if (const auto* s = std::get_if<SymbolSequence>(&x)) return *s;
  throw TypeError("shift cocycle evaluated at a torus point");
}

void check_kind(const CocycleSpec& a, const BasePoint& x) {
  const bool torus = std::holds_alternative<TorusPoint>(x);
  if (torus != (a.base.kind == BaseKind::CatMap)) {
    throw TypeError(std::string("cocycle over ") + to_string(a.base.kind) + " evaluated at a " +
                    (torus ? "torus" : "symbolic") + " point");
  }
}

double smooth_profile(double s) { return s < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0; }

double smooth_profile_slope(double s) {
  if (s >= 1.0) return 0.0;
  const double w = 1.0 - s * s;
  return smooth_profile(s) * (-2.0 * s / (w * w));
}

std::pair<double, double> fourier_phase(const FourierTerm& t, const TorusPoint& p) {
  const double arg = kTwoPi * (t.fx * p.x() + t.fy * p.y());
  return {std::cos(arg), std::sin(arg)};
}

Mat fourier_exponent(const FourierTorusForm& f, const TorusPoint& p, int d) {
  Mat x = Mat::Zero(d, d);
  for (const auto& t : f.terms) {
    const auto [c, s] = fourier_phase(t, p);
    x += (t.sine ? s : c) * t.coeff;
  }
  return x;
}

// Smallest M >= 0 with 2^-M < r: the cylinder |i| < M decides d(x, c) < r.
int cylinder_half_length(double radius) {
  int m = 0;
  while (!(std::ldexp(1.0, -m) < radius)) {
    ++m;
    if (m > 1000) throw ConfigError("bump radius too small on the shift");
  }
  return m;
}

// d/dt exp(X + t dX) at t = 0 via the block-triangular exponential.
Mat dexp(const Mat& x, const Mat& dx) {
  const Eigen::Index d = x.rows();
  Mat block = Mat::Zero(2 * d, 2 * d);
  block.topLeftCorner(d, d) = x;
  block.bottomRightCorner(d, d) = x;
  block.topRightCorner(d, d) = dx;
  return expm(block).topRightCorner(d, d);
}

}  // namespace

void validate(const CocycleSpec& a) {
  const auto& g = a.group;
  const int d = g.d;
  const auto check_member = [&](const Mat& m, const std::string& what) {
    if (m.rows() != d || m.cols() != d) throw ConfigError(what + " must be " + std::to_string(d) + "x" + std::to_string(d));
    const auto mem = contains(g, m);
    if (!mem.member) {
      throw ConfigError(what + " is not in " + g.describe() + " (det residual " + format_double(mem.det_residual) +
                        ", form residual " + format_double(mem.form_residual) + ")");
    }
  };
  LieChart chart(g);
  const auto check_algebra = [&](const Mat& m, const std::string& what) {
    if (m.rows() != d || m.cols() != d) throw ConfigError(what + " must be " + std::to_string(d) + "x" + std::to_string(d));
    if (chart.algebra_residual(m) > g.membership_tol * std::max(1.0, frob_norm(m)) ||
        (g.field == Field::Real && !is_real(m))) {
      throw ConfigError(what + " is not in the Lie algebra of " + g.describe());
    }
  };
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ConstantForm>) {
          check_member(f.g, "constant value");
        } else if constexpr (std::is_same_v<T, LocallyConstantForm>) {
          if (a.base.kind != BaseKind::FullShift) throw ConfigError("locally constant cocycles live on the full shift");
          if (f.window < 0) throw ConfigError("window radius must be >= 0");
          double expected = std::pow(static_cast<double>(a.base.symbols), 2 * f.window + 1);
          if (static_cast<double>(f.table.size()) != expected) throw ConfigError("locally constant table is not total on its words");
          for (std::size_t i = 0; i < f.table.size(); ++i) check_member(f.table[i], "table entry " + std::to_string(i));
        } else {
          if (a.base.kind != BaseKind::CatMap) throw ConfigError("Fourier cocycles live on the torus");
          for (const auto& t : f.terms) check_algebra(t.coeff, "Fourier coefficient");
        }
      },
      a.form);
  for (const auto& b : a.bumps) {
    if (!(b.radius > 0.0)) throw ConfigError("bump radius must be positive");
    if (std::holds_alternative<TorusPoint>(b.center) != (a.base.kind == BaseKind::CatMap)) {
      throw ConfigError("bump center does not live on the base");
    }
    check_algebra(b.direction, "bump direction");
    if (!std::isfinite(b.amplitude)) throw ConfigError("bump amplitude must be finite");
  }
}

CocycleSpec constant_cocycle(const GroupDescriptor& g, const BaseSystem& sys, const Mat& value) {
  CocycleSpec a{g, sys, ConstantForm{value}, {}};
  return a;
}

CocycleSpec identity_cocycle(const GroupDescriptor& g, const BaseSystem& sys) {
  return constant_cocycle(g, sys, Mat::Identity(g.d, g.d));
}

CocycleSpec random_fourier_cocycle(const GroupDescriptor& g, Rng& rng, double scale, int max_freq) {
  if (max_freq < 0) throw DomainError("max_freq must be >= 0");
  FourierTorusForm f;
  for (int fx = 0; fx <= max_freq; ++fx)
    for (int fy = 0; fy <= max_freq; ++fy) f.terms.push_back({fx, fy, (fx + fy) % 2 == 1, scale * random_lie_vector(g, rng)});
  return CocycleSpec{g, BaseSystem::cat_map(), f, {}};
}

double bump_profile(const BaseSystem& sys, const Bump& b, const BasePoint& x) {
  const double dist = distance(sys, b.center, x);
  if (sys.kind == BaseKind::FullShift) return dist < b.radius ? 1.0 : 0.0;
  return smooth_profile(dist / b.radius);
}

Mat evaluate_unperturbed(const CocycleSpec& a, const BasePoint& x) {
  check_kind(a, x);
  return std::visit(
      [&](const auto& f) -> Mat {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ConstantForm>) {
          return f.g;
        } else if constexpr (std::is_same_v<T, LocallyConstantForm>) {
          const auto& s = seq_of(x);
          const int k = s.symbols();
          std::size_t idx = 0;
          for (int i = -f.window; i <= f.window; ++i) idx = idx * static_cast<std::size_t>(k) + static_cast<std::size_t>(s.at(i));
          return f.table[idx];
        } else {
          if (f.terms.empty()) return Mat::Identity(a.d(), a.d());
          return expm(fourier_exponent(f, torus_of(x), a.d()));
        }
      },
      a.form);
}

Mat evaluate(const CocycleSpec& a, const BasePoint& x) {
  Mat v = evaluate_unperturbed(a, x);
  for (const auto& b : a.bumps) {
    if (b.amplitude == 0.0) continue;
    const double rho = bump_profile(a.base, b, x);
    if (rho == 0.0) continue;
    v = v * expm((b.amplitude * rho) * b.direction);
  }
  return v;
}

std::array<Mat, 2> spatial_derivative(const CocycleSpec& a, const BasePoint& x) {
  check_kind(a, x);
  const int d = a.d();
  std::array<Mat, 2> out{Mat::Zero(d, d), Mat::Zero(d, d)};
  if (a.base.kind == BaseKind::FullShift) return out;
  const auto& p = torus_of(x);

  Mat base = evaluate_unperturbed(a, x);
  std::array<Mat, 2> dbase{Mat::Zero(d, d), Mat::Zero(d, d)};
  if (const auto* f = std::get_if<FourierTorusForm>(&a.form); f && !f->terms.empty()) {
    const Mat xm = fourier_exponent(*f, p, d);
    for (int axis = 0; axis < 2; ++axis) {
      Mat dx = Mat::Zero(d, d);
      for (const auto& t : f->terms) {
        const auto [c, s] = fourier_phase(t, p);
        const double freq = kTwoPi * (axis == 0 ? t.fx : t.fy);
        dx += (t.sine ? freq * c : -freq * s) * t.coeff;
      }
      dbase[static_cast<std::size_t>(axis)] = dexp(xm, dx);
    }
  }

  // Product rule over B = A E_1 ... E_m with E_j = exp(a_j rho_j X_j),
  // dE_j = a_j (d rho_j) X_j E_j.
  std::vector<Mat> factors;
  std::vector<std::array<Mat, 2>> dfactors;
  for (const auto& b : a.bumps) {
    if (b.amplitude == 0.0) continue;
    const auto& c = torus_of(b.center);
    const auto [dx, dy] = catmap::displacement(c, p);
    const double dist = std::hypot(dx, dy);
    const double s = dist / b.radius;
    if (s >= 1.0) continue;
    const Mat e = expm((b.amplitude * smooth_profile(s)) * b.direction);
    std::array<Mat, 2> de{Mat::Zero(d, d), Mat::Zero(d, d)};
    if (dist > 0.0) {
      const double slope = smooth_profile_slope(s) / b.radius;
      de[0] = (b.amplitude * slope * dx / dist) * b.direction * e;
      de[1] = (b.amplitude * slope * dy / dist) * b.direction * e;
    }
    factors.push_back(e);
    dfactors.push_back(de);
  }
  for (int axis = 0; axis < 2; ++axis) {
    const auto ax = static_cast<std::size_t>(axis);
    Mat acc = dbase[ax];
    Mat prefix = base;
    for (std::size_t j = 0; j < factors.size(); ++j) {
      acc = acc * factors[j] + prefix * dfactors[j][ax];
      prefix = prefix * factors[j];
    }
    out[ax] = acc;
  }
  return out;
}

std::optional<int> dependence_radius(const CocycleSpec& a) {
  int w = 0;
  bool finite = true;
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, LocallyConstantForm>) {
          w = f.window;
        } else if constexpr (std::is_same_v<T, FourierTorusForm>) {
          finite = f.terms.empty();
        }
      },
      a.form);
  for (const auto& b : a.bumps) {
    if (b.amplitude == 0.0) continue;
    if (a.base.kind != BaseKind::FullShift) return std::nullopt;
    w = std::max(w, cylinder_half_length(b.radius) - 1);
  }
  if (!finite) return std::nullopt;
  return w;
}

Mat ScaledMatrix::value() const {
  if (log_scale == 0.0) return m;
  const double peak = max_abs_entry(m);
  if (peak > 0.0 && std::log(peak) + log_scale > 690.0) {
    throw RangeError("product entries exceed double range (log scale " + format_double(log_scale) + ")");
  }
  return m * std::exp(log_scale);
}

namespace {

void renormalize(const GroupDescriptor& g, ScaledMatrix& p, ProductDiagnostics* diag) {
  if (p.log_scale != 0.0) return;
  const auto mem = contains(g, p.m, 0.0);
  const double drift = mem.det_residual + mem.form_residual;
  if (diag) diag->max_drift = std::max(diag->max_drift, drift);
  // Projection is only well conditioned for moderate norms; exact members
  // are left untouched so locally constant products stay bitwise exact.
  if (drift > 1e-12 && op_norm(p.m) < 1e4) {
    p.m = project_to_group(g, p.m).matrix;
    if (diag) ++diag->renormalizations;
  }
}

void rescale(ScaledMatrix& p) {
  const double peak = max_abs_entry(p.m);
  if (!std::isfinite(peak)) throw NumericalError("non-finite entries in cocycle product");
  if (peak > kRescaleAbove) {
    p.m /= peak;
    p.log_scale += std::log(peak);
  }
}

}  // namespace

ScaledMatrix product_scaled(const CocycleSpec& a, const BasePoint& x, std::int64_t n, ProductDiagnostics* diag) {
  check_kind(a, x);
  ScaledMatrix p{Mat::Identity(a.d(), a.d()), 0.0};
  BasePoint cur = x;
  const std::int64_t steps = n >= 0 ? n : -n;
  for (std::int64_t k = 1; k <= steps; ++k) {
    if (n > 0) {
      p.m = evaluate(a, cur) * p.m;
      cur = step(a.base, cur, 1);
    } else {
      cur = step(a.base, cur, -1);
      p.m = inverse(evaluate(a, cur)) * p.m;
    }
    rescale(p);
    if (k % kRenormCadence == 0) renormalize(a.group, p, diag);
  }
  return p;
}

Mat product(const CocycleSpec& a, const BasePoint& x, std::int64_t n, ProductDiagnostics* diag) {
  return product_scaled(a, x, n, diag).value();
}

LyapunovReport lyapunov_spectrum(const CocycleSpec& a, const BasePoint& x, std::int64_t n, std::int64_t trace_every) {
  if (n < 10) throw DomainError("lyapunov_spectrum needs n >= 10");
  LyapunovReport rep;
  check_kind(a, x);
  const int d = a.d();
  Mat q = Mat::Identity(d, d);
  std::vector<double> sums(static_cast<std::size_t>(d), 0.0);
  std::vector<double> lo(static_cast<std::size_t>(d), INFINITY), hi(static_cast<std::size_t>(d), -INFINITY);
  const std::int64_t window_start = n - n / 10;
  // Warm start: push the frame along the backward orbit so that it is close
  // to the Oseledets filtration at x; only the n steps from x are averaged.
  const std::int64_t warmup = std::min<std::int64_t>(n / 10, 1000);
  BasePoint cur = step(a.base, x, -warmup);
  for (std::int64_t k = 0; k < warmup; ++k) {
    Eigen::HouseholderQR<Mat> qr(evaluate(a, cur) * q);
    q = qr.householderQ();
    cur = step(a.base, cur, 1);
  }
  for (std::int64_t k = 0; k < n; ++k) {
    Mat m = evaluate(a, cur) * q;
    // Modified Gram-Schmidt with one reorthogonalization pass.
    for (int j = 0; j < d; ++j) {
      auto v = m.col(j);
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i < j; ++i) v -= q.col(i).dot(v) * q.col(i);
      const double r = v.norm();
      if (!(r > 0.0) || !std::isfinite(r)) {
        throw NumericalError("lyapunov_spectrum: degenerate or non-finite frame at step " + std::to_string(k));
      }
      q.col(j) = v / r;
      sums[static_cast<std::size_t>(j)] += std::log(r);
    }
    if (k + 1 >= window_start) {
      for (int j = 0; j < d; ++j) {
        const auto js = static_cast<std::size_t>(j);
        const double avg = sums[js] / static_cast<double>(k + 1);
        lo[js] = std::min(lo[js], avg);
        hi[js] = std::max(hi[js], avg);
      }
    }
    if (trace_every > 0 && (k + 1) % trace_every == 0) {
      std::vector<double> avg;
      for (double v : sums) avg.push_back(v / static_cast<double>(k + 1));
      std::sort(avg.begin(), avg.end(), std::greater<>());
      rep.trace.emplace_back(k + 1, std::move(avg));
    }
    cur = step(a.base, cur, 1);
  }
  rep.n = n;
  rep.x0 = x;
  double total = 0.0;
  for (int j = 0; j < d; ++j) {
    const auto js = static_cast<std::size_t>(j);
    rep.exponents.push_back(sums[js] / static_cast<double>(n));
    total += sums[js] / static_cast<double>(n);
    rep.window_drift = std::max(rep.window_drift, hi[js] - lo[js]);
  }
  std::sort(rep.exponents.begin(), rep.exponents.end(), std::greater<>());
  rep.sum_residual = std::abs(total);
  return rep;
}

BasePoint sample_orbit_start(const BaseSystem& sys, Rng& rng, std::int64_t steps) {
  if (sys.kind == BaseKind::CatMap) return sample_one(sys, rng);
  const std::int64_t w = std::max<std::int64_t>(sys.sample_width, 2 * steps + 64);
  if (w > (std::int64_t{1} << 30)) throw DomainError("orbit too long for a sampled shift core");
  return sample_one(sys, rng, static_cast<int>(w));
}

double norm_growth(const CocycleSpec& a, const BasePoint& x, std::int64_t n) {
  if (n < 1) throw DomainError("norm_growth needs n >= 1");
  const auto p = product_scaled(a, x, n);
  return (std::log(op_norm(p.m)) + p.log_scale) / static_cast<double>(n);
}

MonteCarloResult top_exponent_mc(const CocycleSpec& a, std::int64_t n, int trials, std::uint64_t seed, int threads) {
  if (trials < 1) throw DomainError("top_exponent_mc needs trials >= 1");
  MonteCarloResult res;
  res.samples.assign(static_cast<std::size_t>(trials), 0.0);
  parallel_for(trials, threads, [&](int t) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(t));
    const BasePoint x = sample_orbit_start(a.base, rng, n + n / 10);
    res.samples[static_cast<std::size_t>(t)] = lyapunov_spectrum(a, x, n).exponents.front();
  });
  double sum = 0.0;
  for (double v : res.samples) sum += v;
  res.mean = sum / trials;
  if (trials > 1) {
    double ss = 0.0;
    for (double v : res.samples) ss += (v - res.mean) * (v - res.mean);
    res.std_error = std::sqrt(ss / (trials - 1) / trials);
  }
  return res;
}

namespace {

struct PairSet {
  std::vector<BasePoint> points;
  std::vector<std::pair<BasePoint, BasePoint>> pairs;
};

BasePoint nearby(const BaseSystem& sys, const BasePoint& x, Rng& rng) {
  if (sys.kind == BaseKind::CatMap) {
    const double scale = std::pow(10.0, -rng.uniform(1.0, 4.0));
    const double angle = rng.uniform(0.0, kTwoPi);
    return catmap::translate(std::get<TorusPoint>(x), scale * std::cos(angle), scale * std::sin(angle));
  }
  const auto& s = std::get<SymbolSequence>(x);
  const int m = 1 + static_cast<int>(rng.below(8));
  const auto z = std::get<SymbolSequence>(sample_one(sys, rng, 2 * m + 8));
  const std::int64_t w = std::max<std::int64_t>({-z.core_begin(), z.core_end(), m});
  return SymbolSequence::from_coordinates(s.symbols(), -w, w, static_cast<std::int64_t>(z.left_period()),
                                          static_cast<std::int64_t>(z.right_period()),
                                          [&](std::int64_t i) { return std::abs(i) < m ? s.at(i) : z.at(i); });
}

void add_bump_pairs(const BaseSystem& sys, const std::vector<Bump>& bumps, PairSet& ps) {
  for (const auto& b : bumps) {
    if (sys.kind == BaseKind::CatMap) {
      const auto& c = std::get<TorusPoint>(b.center);
      for (int k = 0; k < 10; ++k) {
        const double s = 0.05 + 0.1 * k;
        ps.pairs.emplace_back(catmap::translate(c, s * b.radius, 0.0), catmap::translate(c, (s + 0.05) * b.radius, 0.0));
      }
    } else {
      const auto& c = std::get<SymbolSequence>(b.center);
      const int m = cylinder_half_length(b.radius);
      if (m < 1) continue;
      const std::int64_t w = std::max<std::int64_t>({-c.core_begin(), c.core_end(), m});
      const auto flipped = SymbolSequence::from_coordinates(
          c.symbols(), -w, w, static_cast<std::int64_t>(c.left_period()), static_cast<std::int64_t>(c.right_period()),
          [&](std::int64_t i) { return i == m - 1 ? (c.at(i) + 1) % c.symbols() : c.at(i); });
      ps.pairs.emplace_back(c, flipped);
    }
  }
}

}  // namespace

double holder_distance(const CocycleSpec& a, const CocycleSpec& b, const HolderOptions& opt) {
  if (opt.r > 1) throw UnsupportedError("holder_distance supports r in {0, 1}");
  if (opt.r < 0 || !(opt.nu >= 0.0 && opt.nu <= 1.0)) throw DomainError("holder_distance needs r >= 0 and nu in [0, 1]");
  if (opt.r == 0 && opt.nu == 0.0) throw DomainError("holder_distance: (r, nu) = (0, 0) is not a Holder distance");
  if (a.base.kind != b.base.kind || a.d() != b.d()) throw TypeError("holder_distance: cocycles over different bases or groups");
  if (opt.samples < 1) throw DomainError("holder_distance needs samples >= 1");

  PairSet ps;
  Rng rng(opt.seed);
  for (int s = 0; s < opt.samples; ++s) {
    BasePoint x = sample_one(a.base, rng, 16);
    BasePoint y = nearby(a.base, x, rng);
    ps.points.push_back(x);
    ps.pairs.emplace_back(std::move(x), std::move(y));
  }
  add_bump_pairs(a.base, a.bumps, ps);
  add_bump_pairs(a.base, b.bumps, ps);

  const auto diff = [&](const BasePoint& x) { return Mat(evaluate(a, x) - evaluate(b, x)); };
  const auto ddiff = [&](const BasePoint& x) {
    const auto da = spatial_derivative(a, x), db = spatial_derivative(b, x);
    return std::array<Mat, 2>{da[0] - db[0], da[1] - db[1]};
  };
  const auto dnorm = [](const std::array<Mat, 2>& m) { return std::hypot(frob_norm(m[0]), frob_norm(m[1])); };

  double c0 = 0.0, holder = 0.0, c1 = 0.0, holder1 = 0.0;
  for (const auto& x : ps.points) {
    c0 = std::max(c0, frob_norm(diff(x)));
    if (opt.r == 1) c1 = std::max(c1, dnorm(ddiff(x)));
  }
  for (const auto& [x, y] : ps.pairs) {
    const Mat dx = diff(x), dy = diff(y);
    c0 = std::max({c0, frob_norm(dx), frob_norm(dy)});
    const double dist = distance(a.base, x, y);
    if (dist <= 0.0) continue;
    const double scale = std::pow(dist, opt.nu);
    if (opt.nu > 0.0) holder = std::max(holder, frob_norm(dx - dy) / scale);
    if (opt.r == 1) {
      const auto gx = ddiff(x), gy = ddiff(y);
      c1 = std::max({c1, dnorm(gx), dnorm(gy)});
      if (opt.nu > 0.0) holder1 = std::max(holder1, std::hypot(frob_norm(gx[0] - gy[0]), frob_norm(gx[1] - gy[1])) / scale);
    }
  }
  return c0 + holder + c1 + holder1;
}

}  // namespace cocyclelab
