#include "cocyclelab/genericity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cocyclelab/errors.hpp"
#include "cocyclelab/parallel.hpp"

namespace cocyclelab {

namespace {

using Word = SymbolSequence::Word;

// Lyndon words over k letters by increasing length, after the word "0".
std::vector<Word> periodic_words(int k, int count) {
  std::vector<Word> out{{0}};
  for (int len = 2; static_cast<int>(out.size()) < count; ++len) {
    if (std::pow(static_cast<double>(k), len) > 1e6) break;
    Word w(static_cast<std::size_t>(len), 0);
    while (true) {
      bool lyndon = true;
      for (int r = 1; r < len && lyndon; ++r) {
        Word rot(w.begin() + r, w.end());
        rot.insert(rot.end(), w.begin(), w.begin() + r);
        lyndon = w < rot;
      }
      if (lyndon) out.push_back(w);
      if (static_cast<int>(out.size()) >= count) break;
      int i = len - 1;
      while (i >= 0 && w[static_cast<std::size_t>(i)] == k - 1) w[static_cast<std::size_t>(i--)] = 0;
      if (i < 0) break;
      ++w[static_cast<std::size_t>(i)];
    }
  }
  out.resize(static_cast<std::size_t>(std::min<int>(count, static_cast<int>(out.size()))));
  return out;
}

bool on_orbit(const BaseSystem& sys, const PeriodicPoint& p, const BasePoint& x) {
  BasePoint cur = p.point;
  for (std::int64_t n = 0; n < p.period; ++n) {
    if (same_point(cur, x)) return true;
    cur = step(sys, cur, 1);
  }
  return false;
}

std::vector<PeriodicPoint> torus_orbits(const BaseSystem& sys, int count) {
  std::vector<PeriodicPoint> out{periodic_point(sys, TorusPoint::rational(0, 0, 1))};
  for (std::uint64_t den = 2; static_cast<int>(out.size()) < count; ++den) {
    if (den > 64) throw DomainError("build_homoclinic_data: too many torus orbits requested");
    for (std::int64_t a = 0; a < static_cast<std::int64_t>(den) && static_cast<int>(out.size()) < count; ++a) {
      for (std::int64_t b = 0; b < static_cast<std::int64_t>(den) && static_cast<int>(out.size()) < count; ++b) {
        const auto t = TorusPoint::rational(a, b, den);
        if (t.den != den) continue;  // reduces to a coarser lattice
        if (std::any_of(out.begin(), out.end(), [&](const PeriodicPoint& p) { return on_orbit(sys, p, t); })) continue;
        out.push_back(periodic_point(sys, t));
      }
    }
  }
  return out;
}

// Orbit indices that exhaust f^n(x) up to the cylinder depth `m` (exact on
// the shift), or |n| <= horizon on the torus.
std::pair<std::int64_t, std::int64_t> orbit_range(const BaseSystem& sys, const BasePoint& x, int m, int horizon) {
  if (sys.kind == BaseKind::CatMap) return {-horizon, horizon};
  const auto& s = std::get<SymbolSequence>(x);
  return {s.core_begin() - m - static_cast<std::int64_t>(s.left_period()),
          s.core_end() + m + static_cast<std::int64_t>(s.right_period())};
}

// Cylinder depth M whose central cylinder is the support of a radius-r bump.
int cylinder_depth(double r) {
  int m = 0;
  while (std::ldexp(1.0, -m) >= r) ++m;
  return m;
}

std::string describe(const char* what, int i, std::int64_t n, int j) {
  return std::string(what) + " (i=" + std::to_string(i + 1) + ", n=" + std::to_string(n) + ", j=" + std::to_string(j + 1) + ")";
}

}  // namespace

std::string support_violation(const BaseSystem& sys, const HomoclinicData& data) {
  const int l = data.l();
  int depth = 0;
  for (const auto& e : data.entries) depth = std::max({depth, cylinder_depth(e.p_radius), cylinder_depth(e.z_radius)});
  const auto inside = [&](const BasePoint& x, const BasePoint& c, double r) { return distance(sys, c, x) < r; };
  for (int i = 0; i < l; ++i) {
    const auto& ei = data.entries[static_cast<std::size_t>(i)];
    {
      const auto [lo, hi] = orbit_range(sys, ei.p.point, depth, data.horizon);
      BasePoint x = step(sys, ei.p.point, lo);
      for (std::int64_t n = lo; n <= hi; ++n, x = step(sys, x, 1)) {
        for (int j = 0; j < l; ++j) {
          const auto& ej = data.entries[static_cast<std::size_t>(j)];
          if (inside(x, ej.z, ej.z_radius)) return describe("periodic orbit meets V_z", i, n, j);
          const bool home = i == j && ((n % ei.p.period) + ei.p.period) % ei.p.period == 0;
          if (!home && inside(x, ej.p.point, ej.p_radius)) return describe("periodic orbit meets V_p", i, n, j);
        }
      }
    }
    const auto [lo, hi] = orbit_range(sys, ei.z, depth, data.horizon);
    BasePoint x = step(sys, ei.z, lo);
    for (std::int64_t n = lo; n <= hi; ++n, x = step(sys, x, 1)) {
      for (int j = 0; j < l; ++j) {
        if (n == 0 && i == j) continue;
        const auto& ej = data.entries[static_cast<std::size_t>(j)];
        if (inside(x, ej.z, ej.z_radius)) return describe("homoclinic orbit meets V_z", i, n, j);
      }
    }
    for (int j = 0; j < l; ++j) {
      const auto& ej = data.entries[static_cast<std::size_t>(j)];
      if (inside(ei.z, ej.p.point, ej.p_radius)) return describe("homoclinic point lies in V_p", i, 0, j);
    }
  }
  return {};
}

HomoclinicData build_homoclinic_data(const BaseSystem& sys, int l, int depth, int horizon) {
  if (l < 1) throw DomainError("build_homoclinic_data: l must be >= 1");
  HomoclinicData data;
  data.horizon = horizon;
  std::vector<PeriodicPoint> orbits;
  if (sys.kind == BaseKind::FullShift) {
    const auto words = periodic_words(sys.symbols, l);
    if (static_cast<int>(words.size()) < l) throw DomainError("build_homoclinic_data: not enough periodic words");
    for (const auto& w : words) orbits.push_back(periodic_word(sys, w));
  } else {
    orbits = torus_orbits(sys, l);
  }
  for (const auto& p : orbits) {
    const auto h = homoclinic_point(sys, p, depth);
    data.entries.push_back({p, h.z, h.q, 0.0, 0.0});
  }
  // Shrink the radii until the support conditions hold: cylinders of
  // growing depth on the shift, halving balls on the torus.
  std::string last;
  for (int k = 1; k <= 30; ++k) {
    const double r = sys.kind == BaseKind::FullShift ? 1.5 * std::ldexp(1.0, -k) : 0.1 * std::ldexp(1.0, 1 - k);
    for (auto& e : data.entries) e.p_radius = e.z_radius = r;
    last = support_violation(sys, data);
    if (last.empty()) return data;
  }
  throw DomainError("build_homoclinic_data: support conditions fail for every radius (" + last +
                    "); try a larger depth");
}

std::vector<Mat> phi(const CocycleSpec& b, const HomoclinicData& data, const HolonomyOptions& opt) {
  const int l = data.l();
  std::vector<Mat> out(static_cast<std::size_t>(2 * l));
  for (int i = 0; i < l; ++i) {
    const auto& e = data.entries[static_cast<std::size_t>(i)];
    const auto cert = certify_bunching(b, e.p.point);
    if (!cert.bunched) {
      throw RefusalError("phi: no bunching certificate at p_" + std::to_string(i + 1) +
                         " (theta = " + format_double(cert.max_log_ratio) + ", tau = " + format_double(cert.tau) + ")");
    }
    out[static_cast<std::size_t>(i)] = product(b, e.p.point, e.p.period);
    const BasePoint fz = step(b.base, e.z, e.q);
    const auto hs = stable_holonomy(b, fz, e.p.point, opt);
    const auto hu = unstable_holonomy(b, e.p.point, e.z, opt);
    if (!hs.converged || !hu.converged) {
      throw NumericalError("phi: holonomy did not converge for i = " + std::to_string(i + 1));
    }
    out[static_cast<std::size_t>(l + i)] = hs.H * product(b, e.z, e.q) * hu.H;
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (!contains(b.group, out[k], 1e-6).member) {
      throw NumericalError("phi: output " + std::to_string(k + 1) + " left the group");
    }
  }
  return out;
}

namespace {

// d/de of B^(n)(x) along B -> B exp(e T).
Mat product_variation(const CocycleSpec& b, const Bump& dir, const BasePoint& x, std::int64_t n) {
  const int d = b.d();
  Mat delta = Mat::Zero(d, d), p = Mat::Identity(d, d);
  BasePoint cur = x;
  bool touched = false;
  for (std::int64_t k = 0; k < n; ++k) {
    const Mat bk = evaluate(b, cur);
    const double rho = bump_profile(b.base, dir, cur);
    if (touched) delta = bk * delta;
    if (rho != 0.0) {
      delta += bk * (rho * dir.amplitude * dir.direction) * p;
      touched = true;
    }
    p = bk * p;
    cur = step(b.base, cur, 1);
  }
  return delta;
}

void finish(PhiJacobian& jac, int l, int dim) {
  const int half = l * dim;
  Eigen::JacobiSVD<RealMat> svd(jac.J);
  jac.singular_values = svd.singularValues();
  const double smax = jac.singular_values.size() ? jac.singular_values[0] : 0.0;
  jac.rank = 0;
  for (Eigen::Index i = 0; i < jac.singular_values.size(); ++i) {
    if (jac.singular_values[i] > jac.rank_tol * smax) ++jac.rank;
  }
  jac.block_norms = {jac.J.topLeftCorner(half, half).norm(), jac.J.topRightCorner(half, half).norm(),
                     jac.J.bottomLeftCorner(half, half).norm(), jac.J.bottomRightCorner(half, half).norm()};
  const auto min_sv = [](const RealMat& m) {
    Eigen::JacobiSVD<RealMat> s(m);
    return s.singularValues()[s.singularValues().size() - 1];
  };
  jac.diagonal_min_sv = {min_sv(jac.J.topLeftCorner(half, half)), min_sv(jac.J.bottomRightCorner(half, half))};
}

}  // namespace

PhiJacobian phi_jacobian(const CocycleSpec& b, const HomoclinicData& data, JacobianMode mode, double h,
                         const DerivativeOptions& opt) {
  if (mode == JacobianMode::FiniteDifference && !(h > 0.0)) throw DomainError("phi_jacobian: h must be > 0");
  const LieChart chart(b.group);
  const int dim = chart.dim();
  const int l = data.l();
  const auto g = phi(b, data, opt.inner);
  std::vector<Mat> ginv;
  for (const auto& m : g) ginv.push_back(inverse(m));

  PhiJacobian jac;
  jac.J = RealMat::Zero(2 * l * dim, 2 * l * dim);
  const auto put = [&](int row_block, int col, const Mat& dg) {
    if ((dg.array() == 0.0).all()) return;
    jac.J.block(row_block * dim, col, dim, 1) = chart.coordinates(dg * ginv[static_cast<std::size_t>(row_block)]);
  };

  // Per-output orbit data reused by every column.
  std::vector<BasePoint> fz;
  std::vector<Mat> hs, hu, pz;
  if (mode == JacobianMode::Analytic) {
    for (const auto& e : data.entries) {
      fz.push_back(step(b.base, e.z, e.q));
      hs.push_back(stable_holonomy(b, fz.back(), e.p.point, opt.inner).H);
      hu.push_back(unstable_holonomy(b, e.p.point, e.z, opt.inner).H);
      pz.push_back(product(b, e.z, e.q));
    }
  }

  for (int c = 0; c < 2 * l; ++c) {
    const auto& src = data.entries[static_cast<std::size_t>(c % l)];
    const bool at_p = c < l;
    for (int a = 0; a < dim; ++a) {
      const int col = c * dim + a;
      const Bump dir{at_p ? src.p.point : src.z, at_p ? src.p_radius : src.z_radius,
                     chart.basis()[static_cast<std::size_t>(a)], 1.0};
      if (mode == JacobianMode::FiniteDifference) {
        auto plus = b, minus = b;
        plus.bumps.push_back(dir);
        plus.bumps.back().amplitude = h;
        minus.bumps.push_back(dir);
        minus.bumps.back().amplitude = -h;
        const auto gp = phi(plus, data, opt.inner), gm = phi(minus, data, opt.inner);
        for (int o = 0; o < 2 * l; ++o) put(o, col, (gp[static_cast<std::size_t>(o)] - gm[static_cast<std::size_t>(o)]) / (2 * h));
        continue;
      }
      for (int i = 0; i < l; ++i) {
        const auto& e = data.entries[static_cast<std::size_t>(i)];
        put(i, col, product_variation(b, dir, e.p.point, e.p.period));
        const auto si = static_cast<std::size_t>(i);
        const Mat dhs = stable_holonomy_derivative(b, fz[si], e.p.point, dir, opt).value;
        const Mat dhu = unstable_holonomy_derivative(b, e.p.point, e.z, dir, opt).value;
        const Mat dp = product_variation(b, dir, e.z, e.q);
        put(l + i, col, Mat(dhs * pz[si] * hu[si] + hs[si] * dp * hu[si] + hs[si] * pz[si] * dhu));
      }
    }
  }
  finish(jac, l, dim);
  return jac;
}

double mode_disagreement(const PhiJacobian& analytic, const PhiJacobian& fd) {
  if (analytic.J.rows() != fd.J.rows() || analytic.J.cols() != fd.J.cols()) throw DomainError("Jacobian shapes differ");
  const double scale = analytic.J.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) return fd.J.cwiseAbs().maxCoeff();
  return (analytic.J - fd.J).cwiseAbs().maxCoeff() / scale;
}

// ------------------------------------------------------------------- sweeps

namespace {

Mat unit_direction(const GroupDescriptor& g, Rng& rng) {
  const Mat x = random_lie_vector(g, rng);
  Mat y = noncompact_part(x);
  if (frob_norm(y) < 1e-12) y = x;
  return y / frob_norm(y);
}

}  // namespace

SweepReport positivity_sweep(const CocycleSpec& a0, const SweepOptions& opt, Rng& rng) {
  if (opt.trials < 0 || opt.n < 1 || opt.bumps < 0 || !(opt.epsilon >= 0.0) || !(opt.radius > 0.0)) {
    throw DomainError("positivity_sweep: invalid options");
  }
  const std::uint64_t seed = rng.bits();
  SweepReport rep;
  rep.trials.resize(static_cast<std::size_t>(opt.trials));
  parallel_for(opt.trials, opt.threads, [&](int t) {
    auto& tr = rep.trials[static_cast<std::size_t>(t)];
    tr.index = t;
    tr.n = opt.n;
    tr.amplitude = opt.epsilon;
    try {
      Rng r = Rng::stream(seed, static_cast<std::uint64_t>(t));
      CocycleSpec b = a0;
      for (int k = 0; k < opt.bumps; ++k) {
        const BasePoint center = sample_one(a0.base, r, 16);
        const Mat dir = unit_direction(a0.group, r);
        const double amp = r.uniform() < 0.5 ? -opt.epsilon : opt.epsilon;
        b.bumps.push_back({center, opt.radius, dir, amp});
      }
      HolderOptions ho = opt.holder;
      ho.seed = Rng::mix(seed ^ static_cast<std::uint64_t>(t));
      tr.holder_distance = holder_distance(a0, b, ho);
      const BasePoint x = sample_orbit_start(a0.base, r, 2 * opt.n + 1000);
      tr.lambda1 = lyapunov_spectrum(b, x, opt.n).exponents.front();
      tr.positive = tr.lambda1 > opt.threshold;
      if (tr.positive && opt.recheck) {
        tr.lambda1_recheck = lyapunov_spectrum(b, x, 2 * opt.n).exponents.front();
        tr.recheck_ok = tr.lambda1_recheck > opt.threshold / 2;
      }
    } catch (const std::exception& e) {
      tr.failed = true;
      tr.positive = false;
      tr.error = e.what();
    }
  });
  for (const auto& tr : rep.trials) {
    if (tr.failed) {
      ++rep.failed;
      continue;
    }
    if (tr.positive) {
      ++rep.positive;
      if (opt.recheck && !tr.recheck_ok) ++rep.recheck_failures;
    }
  }
  const int ok = opt.trials - rep.failed;
  rep.fraction = ok > 0 ? static_cast<double>(rep.positive) / ok : 0.0;
  return rep;
}

std::vector<std::array<double, 3>> lambda_histogram(const SweepReport& r, int bins) {
  std::vector<double> v;
  for (const auto& t : r.trials) {
    if (!t.failed) v.push_back(t.lambda1);
  }
  if (v.empty() || bins < 1) return {};
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it;
  const double hi = *hi_it > lo ? *hi_it : lo + 1e-12;
  std::vector<std::array<double, 3>> out;
  for (int k = 0; k < bins; ++k) out.push_back({lo + (hi - lo) * k / bins, lo + (hi - lo) * (k + 1) / bins, 0.0});
  for (double x : v) out[static_cast<std::size_t>(std::min(bins - 1, static_cast<int>((x - lo) / (hi - lo) * bins)))][2] += 1;
  return out;
}

}  // namespace cocyclelab
