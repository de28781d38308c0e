#include "cocyclelab/projective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cocyclelab/errors.hpp"
#include "cocyclelab/parallel.hpp"

namespace cocyclelab {

ProjPoint ProjPoint::normalize(const Vec& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("projective point needs a nonzero finite vector");
  // Already-normalized input is returned untouched, so fixed lines stay
  // bitwise fixed.
  if (std::abs(n - 1.0) <= 4 * std::numeric_limits<double>::epsilon()) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (std::abs(v[i]) > 1e-12) {
        if (v[i].imag() == 0.0 && v[i].real() > 0.0) return ProjPoint{v};
        break;
      }
    }
  }
  Vec u = v / n;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double r = std::abs(u[i]);
    if (r > 1e-12) {
      u *= std::conj(u[i]) / r;
      u[i] = cplx(u[i].real(), 0.0);
      break;
    }
  }
  return ProjPoint{std::move(u)};
}

void EmpiricalMeasure::normalize() {
  double total = 0.0;
  for (const auto& a : atoms) total += a.weight;
  if (!(total > 0.0)) throw DomainError("empirical measure has no mass");
  for (auto& a : atoms) a.weight /= total;
}

std::pair<BasePoint, ProjPoint> proj_step(const CocycleSpec& a, const BasePoint& x, const ProjPoint& v) {
  return {step(a.base, x, 1), ProjPoint::normalize(evaluate(a, x) * v.v)};
}

// ---------------------------------------------------------------- partition

Partition Partition::grid(int side) {
  if (side < 1) throw DomainError("grid partition needs side >= 1");
  return Partition{BaseKind::CatMap, side, 2};
}

Partition Partition::cylinders(int symbols, int depth) {
  if (depth < 1 || symbols < 2) throw DomainError("cylinder partition needs depth >= 1 and k >= 2");
  if (std::pow(static_cast<double>(symbols), 2.0 * depth) > 1e6) throw DomainError("cylinder partition too fine");
  return Partition{BaseKind::FullShift, depth, symbols};
}

int Partition::cells() const {
  if (kind == BaseKind::CatMap) return resolution * resolution;
  int c = 1;
  for (int i = 0; i < 2 * resolution; ++i) c *= symbols;
  return c;
}

int Partition::cell(const BasePoint& x) const {
  if (kind == BaseKind::CatMap) {
    const auto& p = std::get<TorusPoint>(x);
    const int i = std::min(resolution - 1, static_cast<int>(p.x() * resolution));
    const int j = std::min(resolution - 1, static_cast<int>(p.y() * resolution));
    return i + resolution * j;
  }
  const auto& s = std::get<SymbolSequence>(x);
  int c = 0;
  for (int i = -resolution; i < resolution; ++i) c = c * symbols + s.at(i);
  return c;
}

std::string Partition::label(int c) const {
  if (kind == BaseKind::CatMap) return "grid:" + std::to_string(c % resolution) + "," + std::to_string(c / resolution);
  std::string w(static_cast<std::size_t>(2 * resolution), '0');
  for (int i = 2 * resolution - 1; i >= 0; --i) {
    w[static_cast<std::size_t>(i)] = static_cast<char>('0' + c % symbols);
    c /= symbols;
  }
  return "cyl:" + w.substr(0, static_cast<std::size_t>(resolution)) + "." +
         w.substr(static_cast<std::size_t>(resolution));
}

// ----------------------------------------------------------- fiber measures

namespace {

struct Visit {
  int cell;
  ProjPoint p;
};

Vec random_direction(int d, bool complex, Rng& rng) {
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = cplx(rng.normal(), complex ? rng.normal() : 0.0);
  return v;
}

// Visits per orbit, kept in orbit order so the merge is schedule-independent.
std::vector<std::vector<Visit>> fiber_visits(const CocycleSpec& a, std::uint64_t seed, const FiberOptions& opt,
                                             const Partition& part) {
  if (opt.n_orbits < 1 || opt.n_iter < 1) throw DomainError("fiber measures need n_orbits >= 1 and n_iter >= 1");
  if (part.kind != a.base.kind) throw DomainError("partition does not match the base system");
  if (part.kind == BaseKind::FullShift && part.symbols != a.base.symbols) throw DomainError("partition alphabet mismatch");
  const bool complex = a.group.field == Field::Complex;
  std::vector<std::vector<Visit>> out(static_cast<std::size_t>(opt.n_orbits));
  const int burn = opt.n_iter / 10;
  parallel_for(opt.n_orbits, opt.threads, [&](int j) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(j));
    BasePoint x = sample_orbit_start(a.base, rng, opt.n_iter);
    ProjPoint v = ProjPoint::normalize(random_direction(a.d(), complex, rng));
    auto& visits = out[static_cast<std::size_t>(j)];
    visits.reserve(static_cast<std::size_t>(opt.n_iter - burn));
    for (int t = 0; t < opt.n_iter; ++t) {
      if (t >= burn) visits.push_back({part.cell(x), v});
      std::tie(x, v) = proj_step(a, x, v);
    }
  });
  return out;
}

std::map<int, EmpiricalMeasure> collect(const std::vector<std::vector<Visit>>& visits, int parity) {
  std::map<int, EmpiricalMeasure> cells;
  for (std::size_t j = 0; j < visits.size(); ++j) {
    if (parity >= 0 && static_cast<int>(j % 2) != parity) continue;
    for (const auto& vis : visits[j]) cells[vis.cell].atoms.push_back({vis.p, 1.0});
  }
  for (auto& [c, m] : cells) m.normalize();
  return cells;
}

}  // namespace

std::map<int, EmpiricalMeasure> empirical_fiber_measures(const CocycleSpec& a, Rng& rng, const FiberOptions& opt,
                                                         const Partition& part) {
  return collect(fiber_visits(a, rng.bits(), opt, part), -1);
}

EmpiricalMeasure pushforward(const Mat& h, const EmpiricalMeasure& m) {
  if (h.rows() != h.cols() || (m.d() != 0 && h.cols() != m.d())) throw DomainError("pushforward: size mismatch");
  const double smax = op_norm(h);
  if (!(smax > 0.0) || !(min_singular_value(h) > 1e-14 * smax)) throw DomainError("pushforward: singular matrix");
  EmpiricalMeasure out;
  out.atoms.reserve(m.atoms.size());
  for (const auto& a : m.atoms) out.atoms.push_back({ProjPoint::normalize(h * a.p.v), a.weight});
  return out;
}

// ------------------------------------------------------------------ distance

namespace {

bool real_plane(const EmpiricalMeasure& m) {
  if (m.d() != 2) return false;
  for (const auto& a : m.atoms) {
    if (std::abs(a.p.v[0].imag()) > 1e-12 || std::abs(a.p.v[1].imag()) > 1e-12) return false;
  }
  return true;
}

double angle(const ProjPoint& p) {
  double t = std::atan2(p.v[1].real(), p.v[0].real());
  if (t < 0.0) t += M_PI;
  if (t >= M_PI) t -= M_PI;
  return t;
}

// W1 on a circle of circumference pi: with D = F1 - F2 piecewise constant,
// W1 = min_c integral |D - c|, attained at a weighted median of D.
double circle_w1(const EmpiricalMeasure& m1, const EmpiricalMeasure& m2) {
  std::vector<std::pair<double, double>> ev;
  ev.reserve(m1.atoms.size() + m2.atoms.size());
  for (const auto& a : m1.atoms) ev.emplace_back(angle(a.p), a.weight);
  for (const auto& a : m2.atoms) ev.emplace_back(angle(a.p), -a.weight);
  std::sort(ev.begin(), ev.end());
  std::vector<std::pair<double, double>> pieces;  // (D, length)
  double acc = 0.0;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    acc += ev[i].second;
    const double next = i + 1 < ev.size() ? ev[i + 1].first : ev.front().first + M_PI;
    const double len = next - ev[i].first;
    if (len > 0.0) pieces.emplace_back(acc, len);
  }
  if (pieces.empty()) return 0.0;
  std::vector<std::pair<double, double>> sorted = pieces;
  std::sort(sorted.begin(), sorted.end());
  double half = 0.0;
  for (const auto& p : sorted) half += p.second;
  half /= 2.0;
  double run = 0.0, c = sorted.back().first;
  for (const auto& p : sorted) {
    run += p.second;
    if (run >= half) {
      c = p.first;
      break;
    }
  }
  double w = 0.0;
  for (const auto& p : pieces) w += std::abs(p.first - c) * p.second;
  return w;
}

std::vector<Vec> dictionary(int d) {
  Rng rng(0x5eed0000ULL + static_cast<std::uint64_t>(d));
  std::vector<Vec> u;
  for (int j = 0; j < 50; ++j) u.push_back(random_direction(d, true, rng).normalized());
  return u;
}

double dictionary_distance(const EmpiricalMeasure& m1, const EmpiricalMeasure& m2, int d) {
  const auto dict = dictionary(d);
  double best = 0.0;
  for (const auto& u : dict) {
    double s1 = 0.0, s2 = 0.0;
    for (const auto& a : m1.atoms) s1 += a.weight * std::norm(u.dot(a.p.v));
    for (const auto& a : m2.atoms) s2 += a.weight * std::norm(u.dot(a.p.v));
    best = std::max(best, std::abs(s1 - s2));
  }
  return best;
}

}  // namespace

double measure_distance(const EmpiricalMeasure& m1, const EmpiricalMeasure& m2) {
  if (m1.atoms.empty() || m2.atoms.empty()) throw DomainError("measure_distance: empty measure");
  if (m1.d() != m2.d()) throw DomainError("measure_distance: dimension mismatch");
  if (real_plane(m1) && real_plane(m2)) return circle_w1(m1, m2);
  return dictionary_distance(m1, m2, m1.d());
}

// ------------------------------------------------------------ common measure

std::string to_string(MeasureVerdict v) {
  return v == MeasureVerdict::NoCommonMeasure ? "NoCommonMeasure" : "PossiblyCommon";
}

namespace {

Mat orthonormal_basis(const Mat& cols) {
  Eigen::JacobiSVD<Mat> svd(cols, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  int r = 0;
  while (r < s.size() && s[r] > 1e-10 * std::max(1.0, s[0])) ++r;
  return svd.matrixU().leftCols(r);
}

// Relative residual of g on span(q): ||(I - q q^H) g q|| / ||g||.
double invariance_residual(const Mat& g, const Mat& q) {
  const Mat gq = g * q;
  return op_norm(gq - q * (q.adjoint() * gq)) / op_norm(g);
}

// Generalized eigenspaces of g, eigenvalues clustered.
std::vector<Mat> generalized_eigenspaces(const Mat& g) {
  const int d = static_cast<int>(g.rows());
  Eigen::ComplexEigenSolver<Mat> es(g);
  std::vector<cplx> centers;
  for (int i = 0; i < d; ++i) {
    const cplx l = es.eigenvalues()[i];
    bool seen = false;
    for (const auto& c : centers) seen = seen || std::abs(c - l) < 1e-6 * std::max(1.0, std::abs(l));
    if (!seen) centers.push_back(l);
  }
  std::vector<Mat> spaces;
  for (const auto& l : centers) {
    Mat p = Mat::Identity(d, d);
    const Mat shifted = g - l * Mat::Identity(d, d);
    for (int k = 0; k < d; ++k) p = shifted * p;
    Eigen::JacobiSVD<Mat> svd(p, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double scale = std::max(1.0, s[0]);
    int null = 0;
    for (int i = d - 1; i >= 0 && s[i] < 1e-8 * scale; --i) ++null;
    if (null == 0) null = 1;  // clustered root below resolution
    spaces.push_back(svd.matrixV().rightCols(null));
  }
  return spaces;
}

struct SubspaceHit {
  Mat basis;
  double residual;
};

std::optional<SubspaceHit> common_subspace(const Mat& g1, const Mat& g2, double tol, int& checked) {
  const int d = static_cast<int>(g1.rows());
  const auto spaces = generalized_eigenspaces(g1);
  const int n = static_cast<int>(spaces.size());
  for (int mask = 1; mask < (1 << n); ++mask) {
    Mat cols(d, 0);
    for (int i = 0; i < n; ++i) {
      if (!(mask & (1 << i))) continue;
      Mat next(d, cols.cols() + spaces[i].cols());
      next << cols, spaces[i];
      cols = next;
    }
    const Mat q = orthonormal_basis(cols);
    if (q.cols() == 0 || q.cols() >= d) continue;
    ++checked;
    const double r = invariance_residual(g2, q);
    if (r < tol) return SubspaceHit{q, r};
  }
  return std::nullopt;
}

double line_gap(const Vec& u, const Vec& v) { return std::sqrt(std::max(0.0, 1.0 - std::norm(u.dot(v)))); }

// Orbit of the line [v] under the group generated by `gens`, if it has at
// most `limit` elements.
std::optional<Mat> finite_orbit(const std::vector<Mat>& gens, const Vec& v, int limit, double tol) {
  std::vector<Vec> lines{v.normalized()};
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (const auto& g : gens) {
      const Vec w = (g * lines[i]).normalized();
      bool known = false;
      for (const auto& l : lines) known = known || line_gap(l, w) < tol;
      if (known) continue;
      if (static_cast<int>(lines.size()) >= limit) return std::nullopt;
      lines.push_back(w);
    }
  }
  Mat out(v.size(), static_cast<Eigen::Index>(lines.size()));
  for (std::size_t i = 0; i < lines.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = lines[i];
  return out;
}

}  // namespace

CommonMeasureReport common_invariant_measure_test(const Mat& g1, const Mat& g2, const CommonMeasureOptions& opt) {
  const int d = static_cast<int>(g1.rows());
  if (g1.cols() != d || g2.rows() != d || g2.cols() != d) throw DomainError("common measure test: square matrices of one size");
  if (d > 4) throw UnsupportedError("common measure test supports d <= 4");
  if (d < 2) throw DomainError("common measure test needs d >= 2");
  if (opt.L < 1 || opt.words < 1) throw DomainError("common measure test needs L >= 1 and words >= 1");
  const std::vector<Mat> gens{g1, g2, inverse(g1), inverse(g2)};
  CommonMeasureReport rep;

  // (a) Boundedness: pure powers first (they expose hyperbolic generators
  // at once), then random words; every prefix is probed.
  std::vector<std::vector<int>> words;
  for (int pattern : {0, 1, 2}) {
    std::vector<int> w;
    for (int t = 0; t < opt.L; ++t) w.push_back(pattern < 2 ? pattern : t % 2);
    words.push_back(w);
  }
  Rng rng(opt.seed);
  for (int k = 0; k < opt.words; ++k) {
    std::vector<int> w;
    for (int t = 0; t < opt.L; ++t) w.push_back(static_cast<int>(rng.below(4)));
    words.push_back(w);
  }
  Mat form = Mat::Zero(d, d);
  double growth = 0.0;
  int random_words = 0;
  for (std::size_t k = 0; k < words.size(); ++k) {
    Mat p = Mat::Identity(d, d);
    for (int s : words[k]) {
      p = gens[static_cast<std::size_t>(s)] * p;
      const double n = op_norm(p);
      if (!std::isfinite(n)) {
        rep.max_word_norm = INFINITY;
        break;
      }
      rep.max_word_norm = std::max(rep.max_word_norm, n);
      form += p.adjoint() * p / n / n;
    }
    if (k >= 3 && std::isfinite(rep.max_word_norm)) {
      growth += std::log(op_norm(p)) / opt.L;
      ++random_words;
    }
  }
  rep.growth_rate = random_words > 0 ? growth / random_words : 0.0;
  if (rep.max_word_norm < opt.bound) {
    form *= static_cast<double>(d) / form.trace().real();
    double r = 0.0;
    for (const auto& g : {g1, g2}) r = std::max(r, op_norm(g.adjoint() * form * g - form) / op_norm(form));
    rep.verdict = MeasureVerdict::PossiblyCommon;
    rep.witness_kind = "bounded";
    rep.witness = form;
    rep.witness_residual = r;
    return rep;
  }

  // (b) Sums of generalized eigenspaces of either generator, then finite
  // unions of lines through eigen-directions of low powers.
  for (const auto& [a, b] : {std::pair{g1, g2}, std::pair{g2, g1}}) {
    if (auto hit = common_subspace(a, b, opt.invariance_tol, rep.subspaces_checked)) {
      rep.verdict = MeasureVerdict::PossiblyCommon;
      rep.witness_kind = "subspace";
      rep.witness = hit->basis;
      rep.witness_residual = hit->residual;
      return rep;
    }
  }
  for (const auto& g : {g1, g2}) {
    Mat power = Mat::Identity(d, d);
    for (int m = 1; m <= opt.finite_orbit; ++m) {
      power = g * power;
      Eigen::ComplexEigenSolver<Mat> es(power);
      for (int i = 0; i < d; ++i) {
        ++rep.orbits_checked;
        if (auto orbit = finite_orbit(gens, es.eigenvectors().col(i), opt.finite_orbit, 1e-7)) {
          double r = 0.0;
          for (Eigen::Index c = 0; c < orbit->cols(); ++c) {
            const Vec v = orbit->col(c);
            for (const auto& h : {g1, g2}) {
              const Vec w = (h * v).normalized();
              double best = INFINITY;
              for (Eigen::Index e = 0; e < orbit->cols(); ++e) best = std::min(best, line_gap(orbit->col(e), w));
              r = std::max(r, best);
            }
          }
          rep.verdict = MeasureVerdict::PossiblyCommon;
          rep.witness_kind = "finite_orbit";
          rep.witness = *orbit;
          rep.witness_residual = r;
          return rep;
        }
      }
    }
  }
  rep.verdict = MeasureVerdict::NoCommonMeasure;
  return rep;
}

CocycleSpec bernoulli_cocycle(const GroupDescriptor& g, const Mat& g1, const Mat& g2) {
  CocycleSpec a{g, BaseSystem::full_shift(2), LocallyConstantForm{0, {g1, g2}}, {}};
  validate(a);
  return a;
}

// ------------------------------------------------------------ disintegration

std::vector<HolonomyPair> sample_holonomy_pairs(const BaseSystem& sys, Rng& rng, int n_stable, int n_unstable,
                                                int width) {
  std::vector<HolonomyPair> out;
  for (int k = 0; k < n_stable + n_unstable; ++k) {
    const auto kind = k < n_stable ? HolonomyKind::Stable : HolonomyKind::Unstable;
    const BasePoint y = sample_one(sys, rng, width);
    if (sys.kind == BaseKind::CatMap) {
      const auto [ex, ey] = kind == HolonomyKind::Stable ? catmap::stable_direction() : catmap::unstable_direction();
      const double t = rng.uniform(-0.5, 0.5) * sys.box_radius;
      out.push_back({kind, y, catmap::translate(std::get<TorusPoint>(y), t * ex, t * ey)});
      continue;
    }
    const auto& s = std::get<SymbolSequence>(y);
    const auto r = std::get<SymbolSequence>(sample_one(sys, rng, width));
    const std::int64_t lo = std::min(s.core_begin(), r.core_begin());
    const std::int64_t hi = std::max(s.core_end(), r.core_end());
    const bool stable = kind == HolonomyKind::Stable;
    // Stable partners keep i >= 0, unstable partners keep i < 0.
    const auto z = SymbolSequence::from_coordinates(
        sys.symbols, lo, hi, static_cast<std::int64_t>(stable ? r.left_period() : s.left_period()),
        static_cast<std::int64_t>(stable ? s.right_period() : r.right_period()),
        [&](std::int64_t i) { return (i >= 0) == stable ? s.at(i) : r.at(i); });
    out.push_back({kind, y, z});
  }
  return out;
}

DisintegrationReport disintegration_invariance_test(const CocycleSpec& a, const std::vector<HolonomyPair>& pairs,
                                                    const Partition& part, Rng& rng,
                                                    const DisintegrationOptions& opt) {
  DisintegrationReport rep;
  const std::uint64_t lyap_seed = rng.bits();
  const std::uint64_t fiber_seed = rng.bits();
  Rng lr(lyap_seed);
  const auto spectrum =
      lyapunov_spectrum(a, sample_orbit_start(a.base, lr, opt.lyap_n + opt.lyap_n / 10), opt.lyap_n);
  rep.exponents = spectrum.exponents;
  for (std::size_t i = 0; i < rep.exponents.size(); ++i) {
    if (!(std::abs(rep.exponents[i]) < opt.zero_tol)) {
      throw RefusalError("disintegration test needs vanishing exponents: lambda_" + std::to_string(i + 1) + " = " +
                         format_double(rep.exponents[i]) + " exceeds zero_tol = " + format_double(opt.zero_tol));
    }
  }

  const auto visits = fiber_visits(a, fiber_seed, opt.fiber, part);
  const auto measures = collect(visits, -1);
  rep.cells = static_cast<int>(measures.size());
  for (const auto& v : visits) rep.atoms += v.size();
  const auto even = collect(visits, 0), odd = collect(visits, 1);
  for (const auto& [c, m] : even) {
    const auto it = odd.find(c);
    if (it != odd.end()) rep.resolution = std::max(rep.resolution, measure_distance(m, it->second));
  }

  double sum = 0.0;
  for (const auto& pr : pairs) {
    const int cf = part.cell(pr.from), ct = part.cell(pr.to);
    const auto mf = measures.find(cf), mt = measures.find(ct);
    if (mf == measures.end() || mt == measures.end()) {
      ++rep.skipped;
      continue;
    }
    const auto h = pr.kind == HolonomyKind::Stable ? stable_holonomy(a, pr.from, pr.to, opt.holonomy)
                                                   : unstable_holonomy(a, pr.from, pr.to, opt.holonomy);
    if (!h.converged) throw NumericalError("holonomy did not converge for a sampled pair");
    const double dist = measure_distance(pushforward(h.H, mf->second), mt->second);
    rep.pairs.push_back({pr, cf, ct, dist});
    rep.max_distance = std::max(rep.max_distance, dist);
    sum += dist;
  }
  if (!rep.pairs.empty()) rep.mean_distance = sum / static_cast<double>(rep.pairs.size());
  return rep;
}

}  // namespace cocyclelab
