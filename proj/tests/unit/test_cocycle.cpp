#include <doctest.h>

#include <cmath>

#include "cocyclelab/cocycle.hpp"
#include "cocyclelab/errors.hpp"

using namespace cocyclelab;

namespace {

Mat m2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

Mat rotation(double t) { return m2(std::cos(t), -std::sin(t), std::sin(t), std::cos(t)); }

const GroupDescriptor kSL2 = make_group(Family::SL, Field::Real, 2);

CocycleSpec rotation_cocycle() {
  // theta(x, y) = 1 + 0.7 cos(2 pi x) + 0.3 sin(2 pi (x + y)).
  FourierTorusForm f;
  const Mat gen = m2(0, -1, 1, 0);
  f.terms.push_back({0, 0, false, 1.0 * gen});
  f.terms.push_back({1, 0, false, 0.7 * gen});
  f.terms.push_back({1, 1, true, 0.3 * gen});
  return CocycleSpec{kSL2, BaseSystem::cat_map(), f, {}};
}

CocycleSpec two_symbol(const Mat& u, const Mat& v) {
  return CocycleSpec{kSL2, BaseSystem::full_shift(2), LocallyConstantForm{0, {u, v}}, {}};
}

}  // namespace

TEST_CASE("evaluate: constant, empty Fourier and bump support") {
  const auto g = m2(2, 1, 1, 1);
  const auto a = constant_cocycle(kSL2, BaseSystem::cat_map(), g);
  CHECK((evaluate(a, TorusPoint::fixed(0.3, 0.1)) - g).norm() == 0.0);
  const CocycleSpec e{kSL2, BaseSystem::cat_map(), FourierTorusForm{}, {}};
  CHECK((evaluate(e, TorusPoint::fixed(0.3, 0.1)) - Mat::Identity(2, 2)).norm() == 0.0);

  auto b = a;
  b.bumps.push_back({TorusPoint::fixed(0.5, 0.5), 0.1, m2(1, 0, 0, -1), 0.3});
  CHECK((evaluate(b, TorusPoint::fixed(0.5, 0.61)) - g).norm() == 0.0);
  const Mat inside = evaluate(b, TorusPoint::fixed(0.5, 0.5));
  CHECK((inside - g * m2(std::exp(0.3), 0, 0, std::exp(-0.3))).norm() < 1e-14);
  CHECK_THROWS_AS(evaluate(a, SymbolSequence::periodic(2, {0})), TypeError);
}

TEST_CASE("product: spec examples and negative times") {
  const auto g = m2(2, 1, 1, 1);
  const auto a = constant_cocycle(kSL2, BaseSystem::cat_map(), g);
  const BasePoint x = TorusPoint::fixed(0.1, 0.2);
  CHECK((product(a, x, 0) - Mat::Identity(2, 2)).norm() == 0.0);
  CHECK((product(a, x, 3) - g * g * g).norm() < 1e-12);
  CHECK((product(a, x, -2) * g * g - Mat::Identity(2, 2)).norm() < 1e-12);

  const auto lc = two_symbol(m2(2, 0, 0, 0.5), m2(0.5, 0, 0, 2));
  CHECK((product(lc, SymbolSequence::periodic(2, {0, 1}), 2) - Mat::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("product: overflow engages the scaled representation") {
  const auto a = constant_cocycle(kSL2, BaseSystem::full_shift(2), m2(2, 0, 0, 0.5));
  const auto p = product_scaled(a, SymbolSequence::periodic(2, {0}), 2000);
  CHECK(p.log_scale > 0);
  CHECK(std::abs(std::log(op_norm(p.m)) + p.log_scale - 2000 * std::log(2.0)) < 1e-9);
  CHECK_THROWS_AS(p.value(), RangeError);
}

TEST_CASE("cocycle identity on both bases") {
  Rng rng(21);
  std::vector<CocycleSpec> specs{rotation_cocycle(), two_symbol(m2(2, 0, 0, 0.5), rotation(M_PI / 2))};
  auto pert = rotation_cocycle();
  pert.bumps.push_back({TorusPoint::fixed(0.3, 0.3), 0.3, m2(1, 0.5, 0.5, -1), 0.2});
  specs.push_back(pert);
  for (const auto& a : specs) {
    for (int t = 0; t < 40; ++t) {
      const BasePoint x = sample_one(a.base, rng, 24);
      const auto m = static_cast<std::int64_t>(rng.below(41)) - 20;
      const auto n = static_cast<std::int64_t>(rng.below(41)) - 20;
      const Mat lhs = product(a, x, m + n);
      const Mat rhs = product(a, step(a.base, x, m), n) * product(a, x, m);
      CHECK(op_norm(lhs - rhs) <= 1e-9 * op_norm(lhs));
    }
  }
}

TEST_CASE("lyapunov spectrum: closed-form cases") {
  const auto diag = constant_cocycle(kSL2, BaseSystem::full_shift(2), m2(2, 0, 0, 0.5));
  const auto r1 = lyapunov_spectrum(diag, SymbolSequence::periodic(2, {0}), 1000);
  CHECK(std::abs(r1.exponents[0] - std::log(2.0)) < 1e-12);
  CHECK(std::abs(r1.exponents[1] + std::log(2.0)) < 1e-12);

  const auto cat = constant_cocycle(kSL2, BaseSystem::cat_map(), m2(2, 1, 1, 1));
  const auto r2 = lyapunov_spectrum(cat, TorusPoint::fixed(0.2, 0.7), 1000);
  const double lam = std::log((3 + std::sqrt(5.0)) / 2);
  CHECK(std::abs(r2.exponents[0] - lam) < 1e-6);
  CHECK(std::abs(r2.exponents[1] + lam) < 1e-6);
  CHECK(r2.sum_residual < 1e-8);

  const auto rot = lyapunov_spectrum(rotation_cocycle(), TorusPoint::fixed(0.13, 0.29), 10000);
  CHECK(std::abs(rot.exponents[0]) < 1e-6);
  CHECK(std::abs(rot.exponents[1]) < 1e-6);
  CHECK_THROWS_AS(lyapunov_spectrum(cat, TorusPoint::fixed(0, 0), 5), DomainError);
}

TEST_CASE("lyapunov spectrum: QR and norm growth agree") {
  const auto a = two_symbol(m2(2, 0, 0, 0.5), rotation(M_PI / 2) * m2(1.5, 0.3, 0, 1 / 1.5));
  Rng rng(3);
  const BasePoint x = sample_one(a.base, rng, 20000);
  const auto rep = lyapunov_spectrum(a, x, 10000);
  const double ng = norm_growth(a, x, 10000);
  CHECK(std::abs(rep.exponents[0] - ng) <= 2 * rep.window_drift + 1e-3);
  CHECK(rep.sum_residual < 1e-8);
}

TEST_CASE("form-preserving spectra are symmetric") {
  Rng rng(17);
  for (const auto& g : {make_group(Family::Sp, Field::Real, 4), make_group(Family::SO_pq, Field::Real, 3, {{2, 1}}),
                        make_group(Family::SU_pq, Field::Complex, 2, {{1, 1}})}) {
    FourierTorusForm f;
    for (int fx = 0; fx <= 1; ++fx)
      for (int fy = 0; fy <= 1; ++fy) f.terms.push_back({fx, fy, (fx + fy) % 2 == 1, 0.5 * random_lie_vector(g, rng)});
    const CocycleSpec a{g, BaseSystem::cat_map(), f, {}};
    validate(a);
    const auto rep = lyapunov_spectrum(a, sample_one(a.base, rng), 4000);
    const int d = g.d;
    double worst = 0.0;
    for (int i = 0; i < d; ++i)
      worst = std::max(worst, std::abs(rep.exponents[static_cast<std::size_t>(i)] + rep.exponents[static_cast<std::size_t>(d - 1 - i)]));
    CAPTURE(g.describe());
    CHECK(worst <= 3 * rep.window_drift + 1e-12);
    CHECK(rep.sum_residual < 1e-8);
  }
}

TEST_CASE("top_exponent_mc: determinism and i.i.d. oracle") {
  const auto cat = constant_cocycle(kSL2, BaseSystem::cat_map(), m2(2, 1, 1, 1));
  const auto c = top_exponent_mc(cat, 100, 4, 5);
  CHECK(c.std_error < 1e-12);

  // Generic pair (no common finite set of lines), so lambda_1 > 0.
  const Mat u = m2(2, 0, 0, 0.5), v = rotation(1.0);
  const auto a = two_symbol(u, v);
  const auto r1 = top_exponent_mc(a, 20000, 20, 99, 1);
  const auto r4 = top_exponent_mc(a, 20000, 20, 99, 4);
  CHECK(r1.samples == r4.samples);

  // Oracle: one long i.i.d. orbit, plain real 2x2 arithmetic.
  Rng rng(12345);
  double vx = 1.0, vy = 0.0, acc = 0.0;
  const int steps = 2000000;
  for (int k = 0; k < steps; ++k) {
    double nx, ny;
    if (rng.uniform() < 0.5) {
      nx = 2 * vx;
      ny = 0.5 * vy;
    } else {
      nx = std::cos(1.0) * vx - std::sin(1.0) * vy;
      ny = std::sin(1.0) * vx + std::cos(1.0) * vy;
    }
    const double r = std::hypot(nx, ny);
    acc += std::log(r);
    vx = nx / r;
    vy = ny / r;
  }
  const double oracle = acc / steps;
  CHECK(std::abs(r1.mean - oracle) <= 3 * r1.std_error + 2e-3);
}

TEST_CASE("holder distance") {
  const auto a = constant_cocycle(kSL2, BaseSystem::cat_map(), m2(2, 1, 1, 1));
  HolderOptions opt{0, 1.0, 50, 3};
  CHECK(holder_distance(a, a, opt) == 0.0);

  const Mat xi = m2(0.3, 1, 0.2, -0.3);
  const double t = 0.01;
  const auto b = constant_cocycle(kSL2, BaseSystem::cat_map(), a.form.index() == 0 ? std::get<ConstantForm>(a.form).g * expm(t * xi) : Mat());
  const double expected = frob_norm(std::get<ConstantForm>(a.form).g * (expm(t * xi) - Mat::Identity(2, 2)));
  CHECK(std::abs(holder_distance(a, b, opt) - expected) < 1e-14);

  // Bump of amplitude t and radius r: the difference quotient across the
  // profile is at least c |t| / r, with c = max|rho'| * ||g X|| / 2.
  auto c = a;
  const double radius = 0.1;
  c.bumps.push_back({TorusPoint::fixed(0.5, 0.5), radius, xi, t});
  const double est = holder_distance(a, c, opt);
  CHECK(est >= 0.5 * t / radius * frob_norm(std::get<ConstantForm>(a.form).g * xi));

  // Monotone in the sample count.
  CHECK(holder_distance(a, c, {0, 1.0, 100, 3}) >= est);
  CHECK_THROWS_AS(holder_distance(a, c, {2, 0.5, 10, 1}), UnsupportedError);
  CHECK_THROWS_AS(holder_distance(a, c, {0, 0.0, 10, 1}), DomainError);
}

TEST_CASE("spatial derivative matches finite differences") {
  auto a = rotation_cocycle();
  a.bumps.push_back({TorusPoint::fixed(0.4, 0.45), 0.2, m2(1, 0.5, 0.5, -1), 0.3});
  const auto p = TorusPoint::fixed(0.47, 0.41);
  const auto d = spatial_derivative(a, p);
  const double h = 1e-6;
  const Mat fdx = (evaluate(a, catmap::translate(p, h, 0)) - evaluate(a, catmap::translate(p, -h, 0))) / (2 * h);
  const Mat fdy = (evaluate(a, catmap::translate(p, 0, h)) - evaluate(a, catmap::translate(p, 0, -h))) / (2 * h);
  CHECK((d[0] - fdx).norm() < 1e-6 * (1 + d[0].norm()));
  CHECK((d[1] - fdy).norm() < 1e-6 * (1 + d[1].norm()));
}

TEST_CASE("dependence radius") {
  const auto lc = two_symbol(m2(2, 0, 0, 0.5), rotation(1.0));
  CHECK(dependence_radius(lc) == 0);
  auto pert = lc;
  pert.bumps.push_back({SymbolSequence::periodic(2, {0}), 1.5 * std::ldexp(1.0, -3), m2(1, 0, 0, -1), 0.1});
  CHECK(dependence_radius(pert) == 2);
  CHECK_FALSE(dependence_radius(rotation_cocycle()).has_value());
}

TEST_CASE("validate rejects bad specs") {
  CHECK_THROWS_AS(validate(constant_cocycle(kSL2, BaseSystem::cat_map(), m2(2, 0, 0, 2))), ConfigError);
  CocycleSpec partial{kSL2, BaseSystem::full_shift(2), LocallyConstantForm{1, {Mat::Identity(2, 2)}}, {}};
  CHECK_THROWS_AS(validate(partial), ConfigError);
}
