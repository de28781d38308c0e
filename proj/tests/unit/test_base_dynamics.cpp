#include <doctest.h>

#include <cmath>

#include "cocyclelab/base_dynamics.hpp"
#include "cocyclelab/errors.hpp"

using namespace cocyclelab;

namespace {

SymbolSequence seq(const char* text) { return SymbolSequence::parse(text); }

}  // namespace

TEST_CASE("cat map: exact rational orbits") {
  const auto sys = BaseSystem::cat_map();
  const BasePoint p = TorusPoint::rational(1, 2, 5);
  const auto q = std::get<TorusPoint>(step(sys, p, 1));
  CHECK(q == TorusPoint::rational(4, 3, 5));
  CHECK(std::get<TorusPoint>(step(sys, TorusPoint::rational(0, 0, 1), 5)) == TorusPoint::rational(0, 0, 1));
  // Group action, including negative times and the fast power path.
  for (std::int64_t m : {-40, -3, 0, 7, 33}) {
    for (std::int64_t n : {-25, -1, 2, 19}) {
      CHECK(same_point(step(sys, step(sys, p, m), n), step(sys, p, m + n)));
    }
  }
  const auto pp = periodic_point(sys, p);
  // Brute-force oracle for the period.
  std::int64_t k = 1;
  BasePoint cur = step(sys, p, 1);
  while (!same_point(cur, p)) {
    cur = step(sys, cur, 1);
    ++k;
  }
  CHECK(pp.period == k);
  CHECK(periodic_point(sys, TorusPoint::rational(0, 0, 1)).period == 1);
  CHECK(periodic_point(sys, TorusPoint::rational(0, 0, 1), 3).corrected);
}

TEST_CASE("cat map: fixed-point orbits are exactly invertible") {
  const auto sys = BaseSystem::cat_map();
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const BasePoint x = sample_one(sys, rng);
    CHECK(same_point(step(sys, step(sys, x, 1000), -1000), x));
    CHECK(same_point(step(sys, x, 37), step(sys, step(sys, x, 30), 7)));
  }
}

TEST_CASE("cat map: float step agrees with the formula") {
  const auto sys = BaseSystem::cat_map();
  const auto p = TorusPoint::fixed(0.3, 0.45);
  const auto q = std::get<TorusPoint>(step(sys, p, 1));
  CHECK(std::abs(q.x() - std::fmod(2 * 0.3 + 0.45, 1.0)) < 1e-15);
  CHECK(std::abs(q.y() - std::fmod(0.3 + 0.45, 1.0)) < 1e-15);
}

TEST_CASE("cat map: contraction along stable segments") {
  const auto sys = BaseSystem::cat_map();
  const auto [vx, vy] = catmap::stable_direction();
  const BasePoint y = TorusPoint::fixed(0.21, 0.77);
  const double delta = 0.05;
  const BasePoint z = catmap::translate(std::get<TorusPoint>(y), delta * vx, delta * vy);
  CHECK(on_local_stable(sys, y, z));
  // Double-precision eigenvectors and the 2^-64 lattice leave an unstable
  // residue of order delta*2^-52 in the displacement; it grows at the
  // expanding rate.
  for (int n = 0; n <= 30; ++n) {
    const double dn = distance(sys, step(sys, y, n), step(sys, z, n));
    const double rounding = (delta * std::ldexp(1.0, -50) + std::ldexp(1.0, -63)) * std::exp(n * sys.tau);
    CHECK(dn <= sys.k_hyp * std::exp(-n * sys.tau) * delta * (1 + 1e-6) + rounding);
  }
}

TEST_CASE("cat map: bracket lands on both local leaves") {
  const auto sys = BaseSystem::cat_map();
  const BasePoint o = TorusPoint::fixed(0, 0);
  const BasePoint z = TorusPoint::fixed(0.07, 0.03);
  const BasePoint w = bracket(sys, o, z);
  CHECK(on_local_stable(sys, z, w));
  CHECK(on_local_unstable(sys, o, w));
  CHECK(same_point(bracket(sys, z, z), z));
  CHECK_THROWS_AS(bracket(sys, o, TorusPoint::fixed(0.4, 0.4)), DomainError);
}

TEST_CASE("cat map: measure preservation histogram") {
  const auto sys = BaseSystem::cat_map();
  Rng rng(2);
  std::vector<double> hist(10, 0.0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto p = std::get<TorusPoint>(step(sys, sample_one(sys, rng), 1));
    hist[static_cast<std::size_t>(p.x() * 10)] += 1.0 / n;
  }
  double l1 = 0;
  for (double h : hist) l1 += std::abs(h - 0.1);
  CHECK(l1 < 0.05);
}

TEST_CASE("cat map: homoclinic point of the origin") {
  const auto sys = BaseSystem::cat_map();
  const auto p = periodic_point(sys, TorusPoint::rational(0, 0, 1));
  const auto h = homoclinic_point(sys, p, 3);
  CHECK(on_local_unstable(sys, p.point, h.z));
  const auto fq = std::get<TorusPoint>(step(sys, h.z, h.q));
  const auto [dx, dy] = catmap::displacement(std::get<TorusPoint>(p.point), fq);
  const auto [a, b] = catmap::eigen_coordinates(dx, dy);
  CHECK(std::abs(a) < 1e-12);
  CHECK(std::abs(b) < sys.box_radius);
  CHECK_FALSE(same_point(h.z, p.point));
}

TEST_CASE("sequences: encoding, shift and equality") {
  const auto s = seq("seq:2:1|0@0|1");
  CHECK(s.at(0) == 0);
  CHECK(s.at(1) == 1);
  CHECK(s.at(-1) == 1);
  CHECK(s.at(-100) == 1);
  CHECK(s.shifted(1).at(-1) == 0);
  CHECK(seq("seq:2:11|1101@2|1") == s);
  CHECK(seq("seq:2:1|0@0|1").to_string() == "seq:2:1|0@0|1");
  const auto zero = SymbolSequence::periodic(2, {0});
  CHECK(zero.shifted(-3) == zero);
  const auto alt = SymbolSequence::periodic(2, {0, 1});
  CHECK_FALSE(alt.shifted(1) == alt);
  CHECK(alt.shifted(2) == alt);
  CHECK(SymbolSequence::parse(alt.shifted(5).to_string()) == alt.shifted(5));
}

TEST_CASE("sequences: agreement indices and distance") {
  const auto x = seq("seq:2:0|0110@0|0");
  const auto y = seq("seq:2:0|0010@0|0");
  CHECK(SymbolSequence::agree_from(x, y) == 2);
  CHECK(SymbolSequence::agree_until(x, y) == 0);
  CHECK(SymbolSequence::central_agreement(x, y) == 1);
  const auto sys = BaseSystem::full_shift(2);
  CHECK(distance(sys, x, y) == 0.5);
  CHECK(distance(sys, x, x) == 0.0);
  CHECK(SymbolSequence::agree_from(SymbolSequence::periodic(2, {0}), SymbolSequence::periodic(2, {1})) ==
        SymbolSequence::kPlusInf);
}

TEST_CASE("shift: bracket splices and is equivariant") {
  const auto sys = BaseSystem::full_shift(2);
  const BasePoint y = seq("seq:2:1|0@0|1");
  const BasePoint z = SymbolSequence::periodic(2, {0});
  const auto w = std::get<SymbolSequence>(bracket(sys, y, z));
  CHECK(w == seq("seq:2:1|0@0|0"));
  CHECK(on_local_unstable(sys, y, w));
  CHECK(on_local_stable(sys, z, w));
  CHECK_THROWS_AS(bracket(sys, y, SymbolSequence::periodic(2, {1})), DomainError);

  Rng rng(4);
  int checked = 0;
  for (int t = 0; t < 1000 && checked < 100; ++t) {
    const BasePoint a = sample_one(sys, rng, 12), b = sample_one(sys, rng, 12);
    if (std::get<SymbolSequence>(a).at(0) != std::get<SymbolSequence>(b).at(0)) continue;
    const BasePoint c = bracket(sys, a, b);
    // Product-structure round trip: w = [[w, x], [x, w]].
    CHECK(same_point(bracket(sys, bracket(sys, a, b), bracket(sys, b, a)), a));
    CHECK(on_local_unstable(sys, a, c));
    CHECK(on_local_stable(sys, b, c));
    if (std::get<SymbolSequence>(a).at(1) == std::get<SymbolSequence>(b).at(1)) {
      CHECK(same_point(step(sys, c, 1), bracket(sys, step(sys, a, 1), step(sys, b, 1))));
    }
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("shift: periodic and homoclinic points") {
  const auto sys = BaseSystem::full_shift(2);
  const auto p = periodic_word(sys, {0, 1});
  CHECK(p.period == 2);
  CHECK_FALSE(p.corrected);
  CHECK(periodic_word(sys, {0, 1, 0, 1}).corrected);
  const auto p0 = periodic_word(sys, {0});
  const auto h = homoclinic_point(sys, p0, 1);
  CHECK(h.q == 1);
  CHECK(std::get<SymbolSequence>(h.z) == seq("seq:2:0|1@0|0"));
  CHECK(on_local_unstable(sys, p0.point, h.z));
  CHECK(on_local_stable(sys, p0.point, step(sys, h.z, h.q)));
  CHECK_FALSE(same_point(h.z, step(sys, h.z, h.q)));
  CHECK_THROWS_AS(homoclinic_point(sys, p0, 0), DomainError);
  const auto h2 = homoclinic_point(sys, p, 3);
  CHECK(on_local_unstable(sys, p.point, h2.z));
  CHECK(on_local_stable(sys, p.point, step(sys, h2.z, h2.q)));
}

TEST_CASE("sampling") {
  const auto shift = BaseSystem::full_shift(2);
  Rng a(8), b(8);
  const auto s1 = sample(shift, a, 50), s2 = sample(shift, b, 50);
  for (std::size_t i = 0; i < s1.size(); ++i) CHECK(same_point(s1[i], s2[i]));
  Rng r(9);
  int zeros = 0;
  for (int i = 0; i < 10000; ++i) zeros += std::get<SymbolSequence>(sample_one(shift, r)).at(0) == 0;
  CHECK(zeros >= 4700);
  CHECK(zeros <= 5300);
  const auto cat = BaseSystem::cat_map();
  double mean = 0;
  for (const auto& p : sample(cat, r, 10000)) mean += std::get<TorusPoint>(p).x() / 10000;
  CHECK(mean > 0.47);
  CHECK(mean < 0.53);
  CHECK_THROWS_AS(BaseSystem::full_shift(2, {0.3, 0.3}), ConfigError);
}

TEST_CASE("point text round trip") {
  CHECK(point_to_string(parse_point("torus:1/5,2/5")) == "torus:1/5,2/5");
  CHECK(same_point(parse_point("torus:0.25,0.5"), TorusPoint::fixed(0.25, 0.5)));
  CHECK_THROWS_AS(parse_point("plane:1,2"), ConfigError);
}
