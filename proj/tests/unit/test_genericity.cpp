#include <doctest.h>

#include <cmath>

#include "cocyclelab/errors.hpp"
#include "cocyclelab/genericity.hpp"

using namespace cocyclelab;

namespace {

const GroupDescriptor kSL2 = make_group(Family::SL, Field::Real, 2);

Mat m2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

CocycleSpec window0(const Mat& u, const Mat& v) {
  return CocycleSpec{kSL2, BaseSystem::full_shift(2), LocallyConstantForm{0, {u, v}}, {}};
}

CocycleSpec near_identity(std::uint64_t seed, double scale) {
  Rng rng(seed);
  const Mat u = random_element(kSL2, rng, scale);
  const Mat v = random_element(kSL2, rng, scale);
  return window0(u, v);
}

}  // namespace

TEST_CASE("homoclinic data on the shift") {
  const auto sys = BaseSystem::full_shift(2);
  const auto d1 = build_homoclinic_data(sys, 1);
  REQUIRE(d1.l() == 1);
  const auto& e = d1.entries[0];
  CHECK(std::get<SymbolSequence>(e.p.point) == SymbolSequence::periodic(2, {0}));
  CHECK(e.p.period == 1);
  CHECK(std::get<SymbolSequence>(e.z) == SymbolSequence::parse("seq:2:0|1@0|0"));
  CHECK(e.q == 1);
  CHECK(on_local_unstable(sys, e.p.point, e.z));
  CHECK(on_local_stable(sys, e.p.point, step(sys, e.z, e.q)));

  const auto d2 = build_homoclinic_data(sys, 2);
  REQUIRE(d2.l() == 2);
  CHECK(std::get<SymbolSequence>(d2.entries[1].p.point) == SymbolSequence::periodic(2, {0, 1}));
  CHECK(d2.entries[1].p.period == 2);
  CHECK(support_violation(sys, d2).empty());
  for (const auto& ei : d2.entries) {
    CHECK(on_local_unstable(sys, ei.p.point, ei.z));
    CHECK(on_local_stable(sys, ei.p.point, step(sys, ei.z, ei.q)));
    for (const auto& ej : d2.entries) CHECK(distance(sys, ei.p.point, ej.z) >= ei.p_radius);
  }
  // Orbits are distinct: no point of the orbit of p_2 equals p_1.
  for (int n = 0; n < 2; ++n) CHECK_FALSE(same_point(step(sys, d2.entries[1].p.point, n), d2.entries[0].p.point));

  auto wide = d2;
  for (auto& x : wide.entries) x.p_radius = x.z_radius = 0.75;
  CHECK_FALSE(support_violation(sys, wide).empty());

  const auto d4 = build_homoclinic_data(sys, 4);
  CHECK(std::get<SymbolSequence>(d4.entries[2].p.point) == SymbolSequence::periodic(2, {0, 0, 1}));
  CHECK(std::get<SymbolSequence>(d4.entries[3].p.point) == SymbolSequence::periodic(2, {0, 1, 1}));
  CHECK(support_violation(sys, d4).empty());
}

TEST_CASE("homoclinic data on the torus") {
  const auto sys = BaseSystem::cat_map();
  const auto d = build_homoclinic_data(sys, 2, 3, 60);
  REQUIRE(d.l() == 2);
  CHECK(d.entries[0].p.period == 1);
  CHECK(d.entries[1].p.period == 3);
  CHECK(support_violation(sys, d).empty());
  for (const auto& e : d.entries) {
    CHECK(on_local_unstable(sys, e.p.point, e.z));
    CHECK(on_local_stable(sys, e.p.point, step(sys, e.z, e.q)));
  }
}

TEST_CASE("phi: spec examples") {
  const auto sys = BaseSystem::full_shift(2);
  const auto data = build_homoclinic_data(sys, 2);
  const auto c = constant_cocycle(kSL2, sys, m2(1.0, 0.1, 0.0, 1.0));
  const auto out = phi(c, data);
  REQUIRE(out.size() == 4);
  for (int i = 0; i < 2; ++i) {
    const auto& e = data.entries[static_cast<std::size_t>(i)];
    Mat pk = Mat::Identity(2, 2), pq = Mat::Identity(2, 2);
    for (int k = 0; k < e.p.period; ++k) pk = pk * m2(1.0, 0.1, 0.0, 1.0);
    for (int k = 0; k < e.q; ++k) pq = pq * m2(1.0, 0.1, 0.0, 1.0);
    CHECK((out[static_cast<std::size_t>(i)] - pk).norm() < 1e-14);
    CHECK((out[static_cast<std::size_t>(2 + i)] - pq).norm() < 1e-14);
  }
  for (const auto& m : phi(identity_cocycle(kSL2, sys), data)) CHECK((m - Mat::Identity(2, 2)).norm() == 0.0);

  Rng rng(3);
  const Mat u = random_element(kSL2, rng, 0.4), v = random_element(kSL2, rng, 0.4);
  const auto one = phi(window0(u, v), build_homoclinic_data(sys, 1));
  CHECK((one[0] - u).norm() == 0.0);
  CHECK((one[1] - v).norm() == 0.0);

  const auto hyper = constant_cocycle(kSL2, sys, m2(4, 0, 0, 0.25));
  CHECK_THROWS_AS(phi(hyper, data), RefusalError);
}

TEST_CASE("phi Jacobian: identity cocycle gives the identity map") {
  const auto sys = BaseSystem::full_shift(2);
  const auto data = build_homoclinic_data(sys, 1);
  const auto jac = phi_jacobian(identity_cocycle(kSL2, sys), data, JacobianMode::Analytic);
  CHECK(jac.J.rows() == 6);
  CHECK((jac.J - RealMat::Identity(6, 6)).norm() < 1e-14);
  CHECK(jac.rank == 6);
  const auto fd = phi_jacobian(identity_cocycle(kSL2, sys), data, JacobianMode::FiniteDifference);
  CHECK(mode_disagreement(jac, fd) < 1e-6);
}

TEST_CASE("phi Jacobian: near identity, l = 1 and 2") {
  const auto sys = BaseSystem::full_shift(2);
  for (int l : {1, 2}) {
    CAPTURE(l);
    const auto data = build_homoclinic_data(sys, l);
    const auto b = near_identity(40 + l, 0.1);
    const auto an = phi_jacobian(b, data, JacobianMode::Analytic);
    const auto fd = phi_jacobian(b, data, JacobianMode::FiniteDifference, 1e-4);
    const int n = 2 * l * 3;
    CHECK(an.J.rows() == n);
    CHECK(an.rank == n);
    CHECK(an.singular_values[n - 1] / an.singular_values[0] > 1e-6);
    CHECK(an.block_norms[1] == 0.0);
    CHECK(fd.block_norms[1] <= 1e-8 * fd.J.norm());
    // Window-0 holonomies stay trivial under depth-1 bumps, so only l = 2
    // (depth-2 cylinders) has a nonzero lower-left block.
    if (l == 2) CHECK(an.block_norms[2] > 0.0);
    CHECK(an.diagonal_min_sv[0] > 1e-8);
    CHECK(an.diagonal_min_sv[1] > 1e-8);
    CHECK(mode_disagreement(an, fd) < 1e-3);
  }
}

TEST_CASE("phi Jacobian: rank persists under perturbation") {
  const auto sys = BaseSystem::full_shift(2);
  const auto data = build_homoclinic_data(sys, 2);
  const auto b = near_identity(7, 0.05);
  Rng rng(70);
  for (int t = 0; t < 10; ++t) {
    auto c = b;
    auto& table = std::get<LocallyConstantForm>(c.form).table;
    for (auto& m : table) m = m * random_element(kSL2, rng, 0.02);
    const auto jac = phi_jacobian(c, data, JacobianMode::Analytic);
    CHECK(jac.rank == 12);
    CHECK(jac.block_norms[1] == 0.0);
  }
}

TEST_CASE("positivity sweep") {
  const auto a0 = identity_cocycle(kSL2, BaseSystem::cat_map());
  SweepOptions opt;
  opt.trials = 6;
  opt.n = 3000;
  opt.holder.samples = 20;
  opt.epsilon = 0.0;
  Rng r0(1);
  const auto zero = positivity_sweep(a0, opt, r0);
  CHECK(zero.positive == 0);
  CHECK(zero.fraction == 0.0);
  for (const auto& t : zero.trials) CHECK(std::abs(t.lambda1) < 1e-2);

  opt.epsilon = 0.05;
  Rng r1(9), r2(9);
  const auto one = positivity_sweep(a0, opt, r1);
  opt.threads = 3;
  const auto three = positivity_sweep(a0, opt, r2);
  REQUIRE(one.trials.size() == three.trials.size());
  for (std::size_t i = 0; i < one.trials.size(); ++i) {
    CHECK(one.trials[i].lambda1 == three.trials[i].lambda1);
    CHECK(one.trials[i].holder_distance == three.trials[i].holder_distance);
  }
  CHECK(one.failed == 0);
  CHECK(one.positive >= 5);
  for (const auto& t : one.trials) {
    CHECK(t.holder_distance > 0.0);
    if (t.positive) CHECK(t.recheck_ok);
  }
  const auto hist = lambda_histogram(one, 5);
  double total = 0;
  for (const auto& b : hist) total += b[2];
  CHECK(total == 6);
}
