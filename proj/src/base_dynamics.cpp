#include "cocyclelab/base_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cocyclelab/errors.hpp"
#include "cocyclelab/linalg.hpp"

namespace cocyclelab {

namespace {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;

constexpr double kTwo64 = 18446744073709551616.0;

u64 mod_reduce(i64 v, u64 den) {
  const i64 m = static_cast<i64>(den);
  i64 r = v % m;
  if (r < 0) r += m;
  return static_cast<u64>(r);
}

// 2x2 integer matrix acting on torus coordinates modulo den (den == 0: 2^64).
struct IntMat {
  u64 m00, m01, m10, m11;
};

u64 mulmod(u64 a, u64 b, u64 den) {
  if (den == 0) return a * b;
  return static_cast<u64>((static_cast<u128>(a) * b) % den);
}

u64 addmod(u64 a, u64 b, u64 den) {
  if (den == 0) return a + b;
  return static_cast<u64>((static_cast<u128>(a) + b) % den);
}

IntMat compose(const IntMat& x, const IntMat& y, u64 den) {
  return {addmod(mulmod(x.m00, y.m00, den), mulmod(x.m01, y.m10, den), den),
          addmod(mulmod(x.m00, y.m01, den), mulmod(x.m01, y.m11, den), den),
          addmod(mulmod(x.m10, y.m00, den), mulmod(x.m11, y.m10, den), den),
          addmod(mulmod(x.m10, y.m01, den), mulmod(x.m11, y.m11, den), den)};
}

TorusPoint apply(const IntMat& m, const TorusPoint& p) {
  TorusPoint r = p;
  r.a = addmod(mulmod(m.m00, p.a, p.den), mulmod(m.m01, p.b, p.den), p.den);
  r.b = addmod(mulmod(m.m10, p.a, p.den), mulmod(m.m11, p.b, p.den), p.den);
  return r;
}

TorusPoint cat_step(const TorusPoint& p, i64 n) {
  if (n == 0) return p;
  const u64 den = p.den;
  const auto lift = [den](i64 v) { return den == 0 ? static_cast<u64>(v) : mod_reduce(v, den); };
  IntMat base = n > 0 ? IntMat{lift(2), lift(1), lift(1), lift(1)} : IntMat{lift(1), lift(-1), lift(-1), lift(2)};
  u64 k = static_cast<u64>(n > 0 ? n : -n);
  IntMat acc{lift(1), lift(0), lift(0), lift(1)};
  while (k) {
    if (k & 1) acc = compose(acc, base, den);
    base = compose(base, base, den);
    k >>= 1;
  }
  return apply(acc, p);
}

double wrap_half(double v) {
  v -= std::floor(v + 0.5);
  return v;
}

u64 gcd_u(u64 a, u64 b) { return std::gcd(a, b); }

std::int64_t lcm_len(std::size_t a, std::size_t b) {
  return static_cast<std::int64_t>(std::lcm(a, b));
}

SymbolSequence::Word primitive_root(const SymbolSequence::Word& w) {
  const std::size_t n = w.size();
  for (std::size_t p = 1; p < n; ++p) {
    if (n % p != 0) continue;
    bool ok = true;
    for (std::size_t i = p; i < n && ok; ++i) ok = w[i] == w[i - p];
    if (ok) return SymbolSequence::Word(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(p));
  }
  return w;
}

const TorusPoint& as_torus(const BasePoint& p) {
  if (const auto* t = std::get_if<TorusPoint>(&p)) return *t;
  throw TypeError("expected a torus point");
}

const SymbolSequence& as_seq(const BasePoint& p) {
  if (const auto* s = std::get_if<SymbolSequence>(&p)) return *s;
  throw TypeError("expected a symbol sequence");
}

}  // namespace

// ---------------------------------------------------------------- TorusPoint

TorusPoint TorusPoint::fixed(double x, double y) {
  const auto to_fixed = [](double v) {
    const double frac = v - std::floor(v);
    const double scaled = std::ldexp(frac, 64);
    return scaled >= kTwo64 ? u64{0} : static_cast<u64>(scaled);
  };
  return TorusPoint{to_fixed(x), to_fixed(y), 0};
}

TorusPoint TorusPoint::rational(i64 num_x, i64 num_y, u64 den) {
  if (den == 0 || den > (u64{1} << 62)) throw DomainError("rational torus point needs 0 < den <= 2^62");
  u64 a = mod_reduce(num_x, den), b = mod_reduce(num_y, den);
  const u64 g = gcd_u(gcd_u(a, b), den);
  return TorusPoint{a / g, b / g, den / g};
}

double TorusPoint::x() const {
  if (den) return static_cast<double>(a) / static_cast<double>(den);
  return static_cast<double>(a >> 11) * 0x1.0p-53;
}

double TorusPoint::y() const {
  if (den) return static_cast<double>(b) / static_cast<double>(den);
  return static_cast<double>(b >> 11) * 0x1.0p-53;
}

// ------------------------------------------------------------ SymbolSequence

SymbolSequence::SymbolSequence(int k, Word left, Word core, Word right, std::int64_t origin) {
  if (k < 2) throw DomainError("alphabet size must be >= 2");
  if (left.empty() || right.empty()) throw DomainError("periodic parts of a sequence must be nonempty");
  for (const Word* w : {&left, &core, &right})
    for (auto s : *w)
      if (s >= k) throw DomainError("symbol out of range for alphabet of size " + std::to_string(k));
  auto st = std::make_shared<Storage>();
  st->k = k;
  st->left = std::move(left);
  st->core = std::move(core);
  st->right = std::move(right);
  data_ = std::move(st);
  offset_ = origin;
}

SymbolSequence SymbolSequence::periodic(int k, Word word) {
  Word copy = word;
  return SymbolSequence(k, std::move(copy), {}, std::move(word), 0);
}

int SymbolSequence::at(std::int64_t i) const {
  const i64 j = offset_ + i;
  const i64 cs = static_cast<i64>(data_->core.size());
  if (j >= 0 && j < cs) return data_->core[static_cast<std::size_t>(j)];
  if (j >= cs) {
    const i64 rl = static_cast<i64>(data_->right.size());
    return data_->right[static_cast<std::size_t>((j - cs) % rl)];
  }
  const i64 ll = static_cast<i64>(data_->left.size());
  return data_->left[static_cast<std::size_t>(((j % ll) + ll) % ll)];
}

SymbolSequence SymbolSequence::shifted(std::int64_t n) const {
  SymbolSequence s = *this;
  s.offset_ += n;
  return s;
}

SymbolSequence SymbolSequence::normalized() const {
  Word left = primitive_root(data_->left);
  Word right = primitive_root(data_->right);
  Word core = data_->core;
  i64 offset = offset_;
  while (!core.empty() && core.back() == right.back()) {
    core.pop_back();
    std::rotate(right.rbegin(), right.rbegin() + 1, right.rend());
  }
  std::size_t front = 0;
  while (front < core.size() && core[front] == left.front()) {
    ++front;
    std::rotate(left.begin(), left.begin() + 1, left.end());
  }
  core.erase(core.begin(), core.begin() + static_cast<std::ptrdiff_t>(front));
  offset -= static_cast<i64>(front);
  return SymbolSequence(data_->k, std::move(left), std::move(core), std::move(right), offset);
}

std::string SymbolSequence::to_string() const {
  const SymbolSequence n = normalized();
  const i64 lo = std::min<i64>(n.core_begin(), 0);
  const i64 hi = std::max<i64>(n.core_end(), 1);
  const SymbolSequence w = from_coordinates(n.symbols(), lo, hi, static_cast<i64>(n.left_period()),
                                            static_cast<i64>(n.right_period()), [&](i64 i) { return n.at(i); });
  const auto word = [](const Word& v) {
    std::string s;
    for (auto c : v) s += static_cast<char>('0' + c);
    return s;
  };
  return "seq:" + std::to_string(w.symbols()) + ":" + word(w.left_word()) + "|" + word(w.core_word()) + "@" +
         std::to_string(-lo) + "|" + word(w.right_word());
}

SymbolSequence SymbolSequence::parse(std::string_view text) {
  if (text.rfind("seq:", 0) != 0) throw ConfigError("sequence must start with 'seq:'");
  text.remove_prefix(4);
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ConfigError("sequence needs 'seq:k:left|core@origin|right'");
  const int k = static_cast<int>(parse_double(text.substr(0, colon)));
  if (k < 2 || k > 10) throw ConfigError("sequence alphabet size must be in [2, 10]");
  text.remove_prefix(colon + 1);
  const auto bar1 = text.find('|');
  const auto bar2 = text.rfind('|');
  const auto at = text.find('@');
  if (bar1 == std::string_view::npos || bar2 == bar1 || at == std::string_view::npos || at < bar1 || at > bar2) {
    throw ConfigError("sequence needs 'seq:k:left|core@origin|right'");
  }
  const auto word = [k](std::string_view s) {
    Word w;
    for (char c : s) {
      if (c < '0' || c >= '0' + k) throw ConfigError("bad symbol '" + std::string(1, c) + "' in sequence");
      w.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return w;
  };
  Word left = word(text.substr(0, bar1));
  Word core = word(text.substr(bar1 + 1, at - bar1 - 1));
  const i64 origin = static_cast<i64>(parse_double(text.substr(at + 1, bar2 - at - 1)));
  Word right = word(text.substr(bar2 + 1));
  if (left.empty() || right.empty()) throw ConfigError("sequence periods must be nonempty");
  return SymbolSequence(k, std::move(left), std::move(core), std::move(right), origin);
}

std::pair<std::int64_t, std::int64_t> SymbolSequence::comparison_window(const SymbolSequence& x,
                                                                        const SymbolSequence& y) {
  const i64 lo = std::min(x.core_begin(), y.core_begin()) - lcm_len(x.left_period(), y.left_period());
  const i64 hi = std::max(x.core_end(), y.core_end()) + lcm_len(x.right_period(), y.right_period());
  return {lo, hi};
}

bool SymbolSequence::operator==(const SymbolSequence& other) const {
  if (symbols() != other.symbols()) return false;
  const auto [lo, hi] = comparison_window(*this, other);
  for (i64 i = lo; i < hi; ++i)
    if (at(i) != other.at(i)) return false;
  return true;
}

std::int64_t SymbolSequence::agree_from(const SymbolSequence& x, const SymbolSequence& y) {
  const i64 r = std::max(x.core_end(), y.core_end());
  const i64 rper = lcm_len(x.right_period(), y.right_period());
  for (i64 i = r; i < r + rper; ++i)
    if (x.at(i) != y.at(i)) return kPlusInf;
  const i64 l = std::min(x.core_begin(), y.core_begin());
  const i64 lper = lcm_len(x.left_period(), y.left_period());
  for (i64 i = r - 1; i >= l - lper; --i)
    if (x.at(i) != y.at(i)) return i + 1;
  return kMinusInf;
}

std::int64_t SymbolSequence::agree_until(const SymbolSequence& x, const SymbolSequence& y) {
  const i64 l = std::min(x.core_begin(), y.core_begin());
  const i64 lper = lcm_len(x.left_period(), y.left_period());
  for (i64 i = l - lper; i < l; ++i)
    if (x.at(i) != y.at(i)) return kMinusInf;
  const i64 r = std::max(x.core_end(), y.core_end());
  const i64 rper = lcm_len(x.right_period(), y.right_period());
  for (i64 i = l; i < r + rper; ++i)
    if (x.at(i) != y.at(i)) return i - 1;
  return kPlusInf;
}

std::int64_t SymbolSequence::central_agreement(const SymbolSequence& x, const SymbolSequence& y) {
  if (x == y) return kPlusInf;
  const auto [lo, hi] = comparison_window(x, y);
  const i64 reach = std::max(std::abs(lo), std::abs(hi)) + 1;
  for (i64 t = 0; t <= reach; ++t) {
    if (x.at(t) != y.at(t) || x.at(-t) != y.at(-t)) return t;
  }
  return reach;
}

// ---------------------------------------------------------------- BaseSystem

std::string to_string(BaseKind k) { return k == BaseKind::CatMap ? "catmap" : "fullshift"; }

BaseSystem BaseSystem::cat_map() {
  BaseSystem s;
  s.kind = BaseKind::CatMap;
  s.tau = std::log(catmap::expanding_eigenvalue());
  return s;
}

BaseSystem BaseSystem::full_shift(int k, std::vector<double> weights) {
  if (k < 2) throw ConfigError("full shift needs at least 2 symbols");
  if (weights.empty()) weights.assign(static_cast<std::size_t>(k), 1.0 / k);
  if (static_cast<int>(weights.size()) != k) throw ConfigError("Bernoulli weights must have one entry per symbol");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw ConfigError("Bernoulli weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("Bernoulli weights must sum to 1");
  BaseSystem s;
  s.kind = BaseKind::FullShift;
  s.symbols = k;
  s.weights = std::move(weights);
  s.tau = std::log(2.0);
  return s;
}

namespace catmap {

double expanding_eigenvalue() { return (3.0 + std::sqrt(5.0)) / 2.0; }

std::pair<double, double> unstable_direction() {
  const double s = (std::sqrt(5.0) - 1.0) / 2.0;
  const double n = std::hypot(1.0, s);
  return {1.0 / n, s / n};
}

std::pair<double, double> stable_direction() {
  const double s = -(1.0 + std::sqrt(5.0)) / 2.0;
  const double n = std::hypot(1.0, s);
  return {1.0 / n, s / n};
}

std::pair<double, double> displacement(const TorusPoint& p, const TorusPoint& q) {
  if (!p.is_rational() && !q.is_rational()) {
    return {std::ldexp(static_cast<double>(static_cast<i64>(q.a - p.a)), -64),
            std::ldexp(static_cast<double>(static_cast<i64>(q.b - p.b)), -64)};
  }
  return {wrap_half(q.x() - p.x()), wrap_half(q.y() - p.y())};
}

std::pair<double, double> eigen_coordinates(double dx, double dy) {
  // The eigenvectors are orthonormal (the cat matrix is symmetric).
  const auto [ux, uy] = unstable_direction();
  const auto [vx, vy] = stable_direction();
  return {dx * ux + dy * uy, dx * vx + dy * vy};
}

TorusPoint translate(const TorusPoint& p, double dx, double dy) {
  if (p.is_rational()) return TorusPoint::fixed(p.x() + dx, p.y() + dy);
  const auto shift = [](double v) {
    const double s = std::ldexp(wrap_half(v), 64);
    return static_cast<u64>(static_cast<i64>(std::llround(std::clamp(s, -9.2e18, 9.2e18))));
  };
  return TorusPoint{p.a + shift(dx), p.b + shift(dy), 0};
}

}  // namespace catmap

BasePoint step(const BaseSystem& sys, const BasePoint& p, std::int64_t n) {
  if (sys.kind == BaseKind::CatMap) return cat_step(as_torus(p), n);
  return as_seq(p).shifted(n);
}

double distance(const BaseSystem& sys, const BasePoint& p, const BasePoint& q) {
  if (sys.kind == BaseKind::CatMap) {
    const auto [dx, dy] = catmap::displacement(as_torus(p), as_torus(q));
    return std::hypot(dx, dy);
  }
  const i64 m = SymbolSequence::central_agreement(as_seq(p), as_seq(q));
  if (m == SymbolSequence::kPlusInf) return 0.0;
  return std::ldexp(1.0, -static_cast<int>(std::min<i64>(m, 1000)));
}

BasePoint bracket(const BaseSystem& sys, const BasePoint& y, const BasePoint& z) {
  if (sys.kind == BaseKind::CatMap) {
    const auto& ty = as_torus(y);
    const auto& tz = as_torus(z);
    const auto [dx, dy] = catmap::displacement(ty, tz);
    if (std::hypot(dx, dy) >= sys.box_radius) throw DomainError("points not in a common product box");
    if (ty == tz) return y;
    const auto [a, b] = catmap::eigen_coordinates(dx, dy);
    (void)b;
    const auto [ux, uy] = catmap::unstable_direction();
    return catmap::translate(ty, a * ux, a * uy);
  }
  const auto& sy = as_seq(y);
  const auto& sz = as_seq(z);
  if (sy.symbols() != sz.symbols()) throw TypeError("sequences over different alphabets");
  if (sy.at(0) != sz.at(0)) throw DomainError("points not in a common product box");
  const i64 lo = std::min<i64>(sy.core_begin(), 0);
  const i64 hi = std::max<i64>(sz.core_end(), 0);
  return SymbolSequence::from_coordinates(sy.symbols(), lo, hi, static_cast<i64>(sy.left_period()),
                                          static_cast<i64>(sz.right_period()),
                                          [&](i64 i) { return i < 0 ? sy.at(i) : sz.at(i); });
}

bool on_local_stable(const BaseSystem& sys, const BasePoint& x, const BasePoint& y) {
  if (sys.kind == BaseKind::CatMap) {
    const auto [dx, dy] = catmap::displacement(as_torus(x), as_torus(y));
    const auto [a, b] = catmap::eigen_coordinates(dx, dy);
    return std::abs(a) < 1e-10 && std::abs(b) <= sys.box_radius;
  }
  return SymbolSequence::agree_from(as_seq(x), as_seq(y)) <= 0;
}

bool on_local_unstable(const BaseSystem& sys, const BasePoint& x, const BasePoint& y) {
  if (sys.kind == BaseKind::CatMap) {
    const auto [dx, dy] = catmap::displacement(as_torus(x), as_torus(y));
    const auto [a, b] = catmap::eigen_coordinates(dx, dy);
    return std::abs(b) < 1e-10 && std::abs(a) <= sys.box_radius;
  }
  return SymbolSequence::agree_until(as_seq(x), as_seq(y)) >= -1;
}

PeriodicPoint periodic_point(const BaseSystem& sys, const BasePoint& candidate, std::int64_t claimed_period) {
  PeriodicPoint out;
  out.point = candidate;
  if (sys.kind == BaseKind::CatMap) {
    const auto& t = as_torus(candidate);
    if (!t.is_rational()) throw DomainError("periodic_point needs an exact rational torus point");
    const i64 limit = 3 * static_cast<i64>(t.den) + 8;
    TorusPoint cur = cat_step(t, 1);
    i64 k = 1;
    while (!(cur == t)) {
      if (++k > limit) throw NumericalError("periodic_point: no return within the orbit bound");
      cur = cat_step(cur, 1);
    }
    out.period = k;
  } else {
    const auto& s = as_seq(candidate);
    const SymbolSequence n = s.normalized();
    if (!n.core_word().empty() || !(n.shifted(0) == n)) throw DomainError("periodic_point needs a purely periodic sequence");
    const i64 bound = static_cast<i64>(n.right_period());
    i64 k = 1;
    while (k <= bound && !(s.shifted(k) == s)) ++k;
    if (k > bound) throw DomainError("periodic_point needs a purely periodic sequence");
    out.period = k;
  }
  out.corrected = claimed_period > 0 && claimed_period != out.period;
  return out;
}

PeriodicPoint periodic_word(const BaseSystem& sys, const SymbolSequence::Word& word) {
  if (sys.kind != BaseKind::FullShift) throw TypeError("periodic words live on the full shift");
  if (word.empty()) throw DomainError("periodic word must be nonempty");
  return periodic_point(sys, SymbolSequence::periodic(sys.symbols, word), static_cast<i64>(word.size()));
}

HomoclinicPoint homoclinic_point(const BaseSystem& sys, const PeriodicPoint& p, int depth) {
  if (depth < 1) throw DomainError("homoclinic_point: depth must be >= 1 to deviate from the periodic orbit");
  if (sys.kind == BaseKind::FullShift) {
    const auto& s = as_seq(p.point);
    const int k = s.symbols();
    const i64 kappa = p.period;
    HomoclinicPoint h;
    h.q = depth;
    h.z = SymbolSequence::from_coordinates(k, 0, depth, kappa, kappa, [&](i64 i) {
      if (i < 0) return s.at(i);
      if (i < depth) return (s.at(i) + 1) % k;
      return s.at(i - depth);
    });
    return h;
  }
  // Torus: intersect the unstable line through p with stable lines through
  // the lattice translates p + (m, n); keep the crossing nearest the
  // stable side so that q is minimal.
  const auto& tp = as_torus(p.point);
  const auto [ux, uy] = catmap::unstable_direction();
  const auto [vx, vy] = catmap::stable_direction();
  const double box = sys.box_radius;
  double best_s = 0.0, best_t = 0.0;
  bool found = false;
  for (int m = -depth; m <= depth; ++m) {
    for (int n = -depth; n <= depth; ++n) {
      if (m == 0 && n == 0) continue;
      // t u - s v = (m, n); u, v orthonormal.
      const double t = m * ux + n * uy;
      const double s = -(m * vx + n * vy);
      if (std::abs(t) < 0.25 * box || std::abs(t) > 0.75 * box) continue;
      if (!found || std::abs(s) < std::abs(best_s)) {
        best_s = s;
        best_t = t;
        found = true;
      }
    }
  }
  if (!found) throw DomainError("homoclinic_point: no lattice crossing within depth " + std::to_string(depth));
  const double contraction = 1.0 / catmap::expanding_eigenvalue();
  HomoclinicPoint h;
  h.q = p.period;
  while (std::abs(best_s) * std::pow(contraction, static_cast<double>(h.q)) > 0.5 * box) h.q += p.period;
  h.z = catmap::translate(tp.is_rational() ? TorusPoint::fixed(tp.x(), tp.y()) : tp, best_t * ux, best_t * uy);
  return h;
}

BasePoint sample_one(const BaseSystem& sys, Rng& rng, int width) {
  if (sys.kind == BaseKind::CatMap) {
    TorusPoint t;
    t.a = rng.bits();
    t.b = rng.bits();
    return t;
  }
  const int w = width > 0 ? width : sys.sample_width;
  const auto draw = [&]() {
    const double u = rng.uniform();
    double acc = 0.0;
    for (int s = 0; s < sys.symbols; ++s) {
      acc += sys.weights[static_cast<std::size_t>(s)];
      if (u < acc) return static_cast<std::uint8_t>(s);
    }
    return static_cast<std::uint8_t>(sys.symbols - 1);
  };
  SymbolSequence::Word core(static_cast<std::size_t>(w));
  for (auto& c : core) c = draw();
  SymbolSequence::Word left(static_cast<std::size_t>(sys.tail_period)), right(static_cast<std::size_t>(sys.tail_period));
  for (auto& c : left) c = draw();
  for (auto& c : right) c = draw();
  return SymbolSequence(sys.symbols, std::move(left), std::move(core), std::move(right), w / 2);
}

std::vector<BasePoint> sample(const BaseSystem& sys, Rng& rng, int n, int width) {
  if (n < 1) throw DomainError("sample: n must be >= 1");
  std::vector<BasePoint> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(sample_one(sys, rng, width));
  return out;
}

namespace {

// "p/q" or decimal.
struct Coordinate {
  bool rational = false;
  i64 num = 0;
  u64 den = 1;
  double value = 0.0;
};

Coordinate parse_coordinate(std::string_view s) {
  Coordinate c;
  const auto slash = s.find('/');
  if (slash == std::string_view::npos) {
    c.value = parse_double(s);
    return c;
  }
  c.rational = true;
  c.num = static_cast<i64>(parse_double(s.substr(0, slash)));
  const double den = parse_double(s.substr(slash + 1));
  if (!(den >= 1.0)) throw ConfigError("rational coordinate needs a positive denominator");
  c.den = static_cast<u64>(den);
  c.value = static_cast<double>(c.num) / den;
  return c;
}

}  // namespace

BasePoint parse_point(std::string_view text) {
  if (text.rfind("torus:", 0) == 0) {
    text.remove_prefix(6);
    const auto comma = text.find(',');
    if (comma == std::string_view::npos) throw ConfigError("torus point needs 'torus:x,y'");
    const Coordinate x = parse_coordinate(text.substr(0, comma));
    const Coordinate y = parse_coordinate(text.substr(comma + 1));
    if (x.rational && y.rational) {
      const u64 den = std::lcm(x.den, y.den);
      return TorusPoint::rational(x.num * static_cast<i64>(den / x.den), y.num * static_cast<i64>(den / y.den), den);
    }
    return TorusPoint::fixed(x.value, y.value);
  }
  if (text.rfind("seq:", 0) == 0) return SymbolSequence::parse(text);
  throw ConfigError("unknown point encoding '" + std::string(text) + "' (expected torus: or seq:)");
}

std::string point_to_string(const BasePoint& p) {
  if (const auto* t = std::get_if<TorusPoint>(&p)) {
    if (t->is_rational()) {
      return "torus:" + std::to_string(t->a) + "/" + std::to_string(t->den) + "," + std::to_string(t->b) + "/" +
             std::to_string(t->den);
    }
    return "torus:" + format_double(t->x()) + "," + format_double(t->y());
  }
  return std::get<SymbolSequence>(p).to_string();
}

bool same_point(const BasePoint& p, const BasePoint& q) {
  if (p.index() != q.index()) return false;
  if (const auto* t = std::get_if<TorusPoint>(&p)) return *t == std::get<TorusPoint>(q);
  return std::get<SymbolSequence>(p) == std::get<SymbolSequence>(q);
}

}  // namespace cocyclelab
