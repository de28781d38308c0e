#include "cocyclelab/holonomy.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "cocyclelab/errors.hpp"

namespace cocyclelab {

namespace {

bool same_matrix(const Mat& a, const Mat& b) { return (a.array() == b.array()).all(); }

// Index from which the truncations stop changing exactly, when the cocycle
// has finite dependence. Stable pairs agree on i >= a, so the factors at
// f^n agree once n >= a + w; unstable pairs agree on i <= b, so the factors
// at f^{-m-1} agree once m >= w - 1 - b.
std::optional<std::int64_t> exact_tail(const CocycleSpec& a, const BasePoint& x, const BasePoint& y, HolonomyKind kind) {
  const auto w = dependence_radius(a);
  if (!w) return std::nullopt;
  if (a.base.kind == BaseKind::CatMap) {
    if (*w == 0) return 0;
    return std::nullopt;
  }
  const auto& sx = std::get<SymbolSequence>(x);
  const auto& sy = std::get<SymbolSequence>(y);
  if (kind == HolonomyKind::Stable) {
    const auto from = SymbolSequence::agree_from(sx, sy);
    if (from == SymbolSequence::kMinusInf) return 0;
    return std::max<std::int64_t>(0, from + *w);
  }
  const auto until = SymbolSequence::agree_until(sx, sy);
  if (until == SymbolSequence::kPlusInf) return 0;
  return std::max<std::int64_t>(0, *w - 1 - until);
}

void require_pair(const CocycleSpec& a, const BasePoint& x, const BasePoint& y, HolonomyKind kind) {
  if (kind == HolonomyKind::Stable) {
    if (!on_local_stable(a.base, x, y)) throw DomainError("stable holonomy: y is not on the local stable set of x");
  } else {
    if (!on_local_unstable(a.base, x, y)) throw DomainError("unstable holonomy: z is not on the local unstable set of x");
  }
}

// Orbits of a pair on a common local leaf (stable: forward, unstable:
// backward). On the torus the partner is carried as f^n x + lambda^{-n} c e,
// its exact orbit; iterating the rounded partner itself would let the
// 2^-64 residue off the leaf grow like lambda^n.
class PairOrbit {
 public:
  PairOrbit(const BaseSystem& sys, const BasePoint& x, const BasePoint& y, HolonomyKind kind)
      : sys_(sys), dir_(kind == HolonomyKind::Stable ? 1 : -1), x_(x), y_(y) {
    if (sys.kind == BaseKind::CatMap) {
      const auto [dx, dy] = catmap::displacement(std::get<TorusPoint>(x), std::get<TorusPoint>(y));
      const auto [a, b] = catmap::eigen_coordinates(dx, dy);
      c_ = dir_ > 0 ? b : a;
      e_ = dir_ > 0 ? catmap::stable_direction() : catmap::unstable_direction();
      contraction_ = 1.0 / catmap::expanding_eigenvalue();
    }
  }

  const BasePoint& x() const { return x_; }
  const BasePoint& y() const { return y_; }

  void advance() {
    x_ = step(sys_, x_, dir_);
    if (sys_.kind == BaseKind::CatMap) {
      c_ *= contraction_;
      y_ = catmap::translate(std::get<TorusPoint>(x_), c_ * e_.first, c_ * e_.second);
    } else {
      y_ = step(sys_, y_, dir_);
    }
  }

 private:
  const BaseSystem& sys_;
  int dir_;
  BasePoint x_, y_;
  double c_ = 0.0, contraction_ = 1.0;
  std::pair<double, double> e_{0.0, 0.0};
};

// Incremental truncations with exact cancellation of coinciding factors.
// Stable:   P_{n+1} = P_n + Y_n^{-1} a_y^{-1} (a_x - a_y) X_n, a at f^n.
// Unstable: Q_{m+1} = Q_m + U_m (a_z - a_x) a_x^{-1} V_m, a at f^{-m-1}.
class Truncator {
 public:
  Truncator(const CocycleSpec& a, const BasePoint& x, const BasePoint& y, HolonomyKind kind)
      : a_(a), kind_(kind), orbit_(a.base, x, y, kind) {
    const int d = a.d();
    p_ = left_ = right_ = Mat::Identity(d, d);
  }

  void advance() {
    if (kind_ == HolonomyKind::Stable) {
      const Mat ax = evaluate(a_, orbit_.x()), ay = evaluate(a_, orbit_.y());
      const Mat ayinv = inverse(ay);
      if (!same_matrix(ax, ay)) p_ += left_ * ayinv * (ax - ay) * right_;
      right_ = ax * right_;
      left_ = left_ * ayinv;
      orbit_.advance();
    } else {
      orbit_.advance();
      const Mat ax = evaluate(a_, orbit_.x()), az = evaluate(a_, orbit_.y());
      const Mat axinv = inverse(ax);
      if (!same_matrix(ax, az)) p_ += left_ * (az - ax) * axinv * right_;
      left_ = left_ * az;
      right_ = axinv * right_;
    }
    if (!p_.allFinite()) throw NumericalError("holonomy truncation became non-finite");
  }

  const Mat& value() const { return p_; }

 private:
  const CocycleSpec& a_;
  HolonomyKind kind_;
  PairOrbit orbit_;
  Mat p_, left_, right_;
};

HolonomyResult holonomy(const CocycleSpec& a, const BasePoint& x, const BasePoint& y, HolonomyKind kind,
                        const HolonomyOptions& opt) {
  if (opt.stride < 1 || opt.n_max < 0) throw DomainError("holonomy: stride must be >= 1 and n_max >= 0");
  require_pair(a, x, y, kind);
  HolonomyResult res;
  res.kind = kind;
  Truncator tr(a, x, y, kind);
  Mat last = tr.value();
  const auto tail = exact_tail(a, x, y, kind);
  const std::int64_t limit = tail ? *tail : opt.n_max;
  for (std::int64_t n = 1; n <= limit; ++n) {
    tr.advance();
    if (n % opt.stride == 0) {
      const double gap = op_norm(tr.value() - last);
      res.gap_trace.emplace_back(n, gap);
      res.cauchy_gap = gap;
      last = tr.value();
      if (!tail && gap < opt.tol) {
        res.H = tr.value();
        res.n_stop = n;
        res.converged = true;
        return res;
      }
    }
  }
  res.H = tr.value();
  res.n_stop = limit;
  if (tail) {
    // Every later factor pair coincides, so all further increments vanish.
    res.exact = true;
    res.converged = true;
    res.cauchy_gap = 0.0;
  }
  return res;
}

}  // namespace

DominationCertificate domination_check(const CocycleSpec& a, const BasePoint& x, int N, double theta, int k_max) {
  if (N < 1 || k_max < 1) throw DomainError("domination_check needs N >= 1 and k_max >= 1");
  DominationCertificate c;
  c.N = N;
  c.theta = theta;
  c.k_max = k_max;
  c.tau = a.base.tau;
  double sum = 0.0;
  c.max_log_ratio = -INFINITY;
  BasePoint cur = x;
  for (int k = 1; k <= k_max; ++k) {
    Mat block = Mat::Identity(a.d(), a.d());
    for (int j = 0; j < N; ++j) {
      block = evaluate(a, cur) * block;
      cur = step(a.base, cur, 1);
    }
    const double smin = min_singular_value(block);
    if (!(smin > 0.0) || !block.allFinite()) throw NumericalError("domination_check: singular block");
    sum += std::log(op_norm(block) / smin);
    c.max_log_ratio = std::max(c.max_log_ratio, sum / (static_cast<double>(k) * N));
  }
  c.holds = c.max_log_ratio <= theta + 1e-12;
  c.bunched = c.holds && 3.0 * theta < c.tau;
  return c;
}

DominationCertificate certify_bunching(const CocycleSpec& a, const BasePoint& x, int N, int k_max) {
  const auto at = [&](int n) {
    auto probe = domination_check(a, x, n, INFINITY, k_max);
    return domination_check(a, x, n, std::max(probe.max_log_ratio, 0.0), k_max);
  };
  if (N > 0) return at(N);
  // Block lengths 1, 2, 4, .., 16 over the same stretch of orbit; the first
  // bunched one wins, else the smallest theta.
  DominationCertificate best;
  for (int n = 1; n <= 16; n *= 2) {
    auto c = at(n);
    c.k_max = k_max;
    if (c.bunched) return c;
    if (n == 1 || c.theta < best.theta) best = c;
  }
  return best;
}

BasePoint local_partner(const BaseSystem& sys, const BasePoint& x, HolonomyKind kind, Rng& rng, double offset) {
  if (sys.kind == BaseKind::CatMap) {
    const auto [vx, vy] = kind == HolonomyKind::Stable ? catmap::stable_direction() : catmap::unstable_direction();
    return catmap::translate(std::get<TorusPoint>(x), offset * vx, offset * vy);
  }
  const auto& s = std::get<SymbolSequence>(x);
  const auto r = std::get<SymbolSequence>(sample_one(sys, rng, 24));
  const std::int64_t w = std::max<std::int64_t>({-s.core_begin(), s.core_end(), -r.core_begin(), r.core_end()}) + 1;
  const int k = s.symbols();
  if (kind == HolonomyKind::Stable)
    return SymbolSequence::from_coordinates(k, -w, w, static_cast<std::int64_t>(r.left_period()),
                                            static_cast<std::int64_t>(s.right_period()), [&](std::int64_t i) {
                                              return i >= 0 ? s.at(i) : i == -1 ? (s.at(i) + 1) % k : r.at(i);
                                            });
  return SymbolSequence::from_coordinates(k, -w, w, static_cast<std::int64_t>(s.left_period()),
                                          static_cast<std::int64_t>(r.right_period()), [&](std::int64_t i) {
                                            return i < 0 ? s.at(i) : i == 0 ? (s.at(i) + 1) % k : r.at(i);
                                          });
}

HolonomyResult stable_holonomy(const CocycleSpec& a, const BasePoint& x, const BasePoint& y, const HolonomyOptions& opt) {
  return holonomy(a, x, y, HolonomyKind::Stable, opt);
}

HolonomyResult unstable_holonomy(const CocycleSpec& a, const BasePoint& x, const BasePoint& z,
                                 const HolonomyOptions& opt) {
  return holonomy(a, x, z, HolonomyKind::Unstable, opt);
}

std::vector<Mat> holonomy_truncations(const CocycleSpec& a, const BasePoint& x, const BasePoint& y, HolonomyKind kind,
                                      std::int64_t n) {
  require_pair(a, x, y, kind);
  Truncator tr(a, x, y, kind);
  std::vector<Mat> out{tr.value()};
  for (std::int64_t k = 1; k <= n; ++k) {
    tr.advance();
    out.push_back(tr.value());
  }
  return out;
}

namespace {

Mat tangent(const CocycleSpec& b, const Bump& dir, const BasePoint& w) {
  const double rho = bump_profile(b.base, dir, w);
  if (rho == 0.0 || dir.amplitude == 0.0) return Mat::Zero(b.d(), b.d());
  return (dir.amplitude * rho) * dir.direction;
}

// Number of leading terms that can be nonzero on the shift, if finite.
std::optional<std::int64_t> exact_terms(const CocycleSpec& b, const Bump& dir, const BasePoint& x, const BasePoint& y,
                                        HolonomyKind kind) {
  if (b.base.kind != BaseKind::FullShift) return std::nullopt;
  CocycleSpec ext = b;
  ext.bumps.push_back(dir);
  ext.bumps.back().amplitude = 1.0;
  const auto w = dependence_radius(ext);
  if (!w) return std::nullopt;
  const auto& sx = std::get<SymbolSequence>(x);
  const auto& sy = std::get<SymbolSequence>(y);
  if (kind == HolonomyKind::Stable) {
    const auto from = SymbolSequence::agree_from(sx, sy);
    if (from == SymbolSequence::kMinusInf) return 0;
    return std::max<std::int64_t>(0, from + *w);
  }
  const auto until = SymbolSequence::agree_until(sx, sy);
  if (until == SymbolSequence::kPlusInf) return 0;
  return std::max<std::int64_t>(0, *w - until);
}

DerivativeResult holonomy_derivative(const CocycleSpec& b, const BasePoint& x, const BasePoint& y, const Bump& dir,
                                     const DerivativeOptions& opt, HolonomyKind kind) {
  require_pair(b, x, y, kind);
  if (dir.direction.rows() != b.d() || dir.direction.cols() != b.d()) throw DomainError("direction has the wrong size");
  DerivativeResult res;
  res.certificate = certify_bunching(b, x, 0, opt.certificate_k_max);
  if (!res.certificate.bunched) {
    throw RefusalError("no bunching certificate at the base point: theta = " +
                       format_double(res.certificate.max_log_ratio) + ", need 3 theta < tau = " +
                       format_double(res.certificate.tau));
  }
  const int d = b.d();
  res.value = Mat::Zero(d, d);
  const auto finite_terms = exact_terms(b, dir, x, y, kind);
  res.exact = finite_terms.has_value();
  const double ratio = std::exp(-(res.certificate.tau - 3.0 * res.certificate.theta));

  const bool stable = kind == HolonomyKind::Stable;
  Mat left = Mat::Identity(d, d), right = Mat::Identity(d, d);
  PairOrbit orbit(b.base, x, y, kind);
  const std::int64_t first = stable ? 0 : 1;
  const std::int64_t last = finite_terms ? (stable ? *finite_terms : *finite_terms - 1) : opt.max_terms;
  int small = 0;
  double envelope = 0.0;
  std::int64_t envelope_at = 0;
  for (std::int64_t i = first; i < first + std::max<std::int64_t>(last, 0); ++i) {
    if (!stable) {
      orbit.advance();
      const Mat bx = evaluate(b, orbit.x());
      left = left * evaluate(b, orbit.y());
      right = inverse(bx) * right;
    }
    const BasePoint& cx = orbit.x();
    const BasePoint& cy = orbit.y();
    const Mat tx = tangent(b, dir, cx), ty = tangent(b, dir, cy);
    double term_norm = 0.0;
    if (tx.norm() != 0.0 || ty.norm() != 0.0) {
      const auto inner = holonomy(b, cx, cy, kind, opt.inner);
      if (!inner.converged) {
        throw NumericalError("inner holonomy did not converge at term " + std::to_string(i));
      }
      const Mat& h = inner.H;
      const Mat term = stable ? Mat(left * (h * tx - ty * h) * right) : Mat(left * (ty * h - h * tx) * right);
      term_norm = op_norm(term);
      if (!std::isfinite(term_norm) || term_norm > 1e8) {
        throw NumericalError("holonomy derivative series diverges at term " + std::to_string(i));
      }
      res.value += term;
      envelope = term_norm;
      envelope_at = i;
    }
    res.terms = i - first + 1;
    if (stable) {
      const Mat by = evaluate(b, cy);
      right = evaluate(b, cx) * right;
      left = left * inverse(by);
      orbit.advance();
    }
    if (!finite_terms) {
      small = term_norm < opt.tol ? small + 1 : 0;
      const double tail = envelope * std::pow(ratio, static_cast<double>(i - envelope_at + 1)) / (1.0 - ratio);
      if (small >= opt.patience && tail < opt.tol) return res;
    }
  }
  if (!finite_terms) throw NumericalError("holonomy derivative series did not settle within max_terms");
  return res;
}

}  // namespace

DerivativeResult stable_holonomy_derivative(const CocycleSpec& b, const BasePoint& x, const BasePoint& y,
                                            const Bump& direction, const DerivativeOptions& opt) {
  return holonomy_derivative(b, x, y, direction, opt, HolonomyKind::Stable);
}

DerivativeResult unstable_holonomy_derivative(const CocycleSpec& b, const BasePoint& x, const BasePoint& w,
                                              const Bump& direction, const DerivativeOptions& opt) {
  return holonomy_derivative(b, x, w, direction, opt, HolonomyKind::Unstable);
}

}  // namespace cocyclelab
