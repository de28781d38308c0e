#include <doctest.h>

#include <cmath>

#include "cocyclelab/errors.hpp"
#include "cocyclelab/group_atlas.hpp"

using namespace cocyclelab;

namespace {

// Independent oracle: real dimension of {X : tr X = 0, X^H J + J X = 0},
// computed as the nullity of the linearized constraint map.
int constraint_nullity(const GroupDescriptor& g) {
  const int d = g.d;
  const bool cplx_entries = g.field == Field::Complex;
  const int unknowns = (cplx_entries ? 2 : 1) * d * d;
  std::vector<RealVec> images;
  for (int k = 0; k < unknowns; ++k) {
    Mat x = Mat::Zero(d, d);
    const int idx = k % (d * d);
    x(idx / d, idx % d) = k < d * d ? cplx(1.0) : cplx(0.0, 1.0);
    std::vector<double> out;
    const cplx t = x.trace();
    out.push_back(t.real());
    out.push_back(t.imag());
    if (g.form) {
      const Mat c = g.adjoint(x) * (*g.form) + (*g.form) * x;
      for (Eigen::Index i = 0; i < c.size(); ++i) {
        out.push_back(c.data()[i].real());
        out.push_back(c.data()[i].imag());
      }
    }
    images.push_back(Eigen::Map<RealVec>(out.data(), static_cast<Eigen::Index>(out.size())));
  }
  RealMat m(images.front().size(), unknowns);
  for (int k = 0; k < unknowns; ++k) m.col(k) = images[static_cast<std::size_t>(k)];
  Eigen::FullPivLU<RealMat> lu(m);
  lu.setThreshold(1e-12);
  return unknowns - static_cast<int>(lu.rank());
}

std::vector<GroupDescriptor> all_groups() {
  return {make_group(Family::SL, Field::Real, 2),       make_group(Family::SL, Field::Real, 3),
          make_group(Family::SL, Field::Complex, 2),    make_group(Family::Sp, Field::Real, 2),
          make_group(Family::Sp, Field::Real, 4),       make_group(Family::SO_pq, Field::Real, 3, {{2, 1}}),
          make_group(Family::SO_pq, Field::Real, 4, {{2, 2}}), make_group(Family::SU_pq, Field::Complex, 2, {{1, 1}}),
          make_group(Family::SU_pq, Field::Complex, 3, {{2, 1}})};
}

}  // namespace

TEST_CASE("make_group: canonical forms and dimensions") {
  const auto sl2 = make_group(Family::SL, Field::Real, 2);
  CHECK_FALSE(sl2.form.has_value());
  CHECK(sl2.lie_dim() == 3);

  const auto sp2 = make_group(Family::Sp, Field::Real, 2);
  Mat j(2, 2);
  j << 0, 1, -1, 0;
  CHECK((*sp2.form - j).norm() == 0.0);
  CHECK(sp2.lie_dim() == 3);

  const auto so21 = make_group(Family::SO_pq, Field::Real, 3, {{2, 1}});
  CHECK((*so21.form - Mat(RealVec(RealVec::Map(std::vector<double>{1, 1, -1}.data(), 3)).cast<cplx>().asDiagonal())).norm() == 0.0);
  CHECK(so21.lie_dim() == 3);
  CHECK(make_group(Family::Sp, Field::Real, 4).lie_dim() == 10);
}

TEST_CASE("make_group: invalid parameters name the constraint") {
  CHECK_THROWS_WITH_AS(make_group(Family::Sp, Field::Real, 3), doctest::Contains("even d"), ConfigError);
  CHECK_THROWS_WITH_AS(make_group(Family::SO_pq, Field::Real, 3, {{1, 1}}), doctest::Contains("p + q = d"), ConfigError);
  CHECK_THROWS_WITH_AS(make_group(Family::SO_pq, Field::Real, 3), doctest::Contains("signature"), ConfigError);
  CHECK_THROWS_AS(make_group(Family::SU_pq, Field::Complex, 2, {{2, 0}}), ConfigError);
  CHECK_THROWS_AS(make_group(Family::SL, Field::Real, 1), ConfigError);
}

TEST_CASE("lie_basis matches the constraint nullity") {
  for (const auto& g : all_groups()) {
    CAPTURE(g.describe());
    const auto basis = lie_basis(g);
    CHECK(static_cast<int>(basis.size()) == g.lie_dim());
    CHECK(constraint_nullity(g) == g.lie_dim());
    LieChart chart(g);
    for (const auto& x : basis) CHECK(chart.algebra_residual(x) == 0.0);
    // Linear independence through the chart's least-squares round trip.
    RealVec c(chart.dim());
    for (int k = 0; k < chart.dim(); ++k) c(k) = std::sin(1.0 + k);
    CHECK((chart.coordinates(chart.element(c)) - c).norm() < 1e-12);
  }
}

TEST_CASE("contains: spec examples") {
  const auto sl2 = make_group(Family::SL, Field::Real, 2);
  Mat m(2, 2);
  m << 2, 0, 0, 0.5;
  CHECK(contains(sl2, m).member);
  const auto sp2 = make_group(Family::Sp, Field::Real, 2);
  CHECK(contains(sp2, *sp2.form).member);
  const auto so21 = make_group(Family::SO_pq, Field::Real, 3, {{2, 1}});
  Mat n = Mat::Zero(3, 3);
  n(0, 0) = 2;
  n(1, 1) = 0.5;
  n(2, 2) = 1;
  CHECK_FALSE(contains(so21, n).member);
  const auto singular = contains(sl2, Mat::Zero(2, 2));
  CHECK_FALSE(singular.member);
  CHECK(std::isinf(singular.det_residual));
}

TEST_CASE("exp_retract") {
  const auto sl2 = make_group(Family::SL, Field::Real, 2);
  Mat h(2, 2);
  h << 1, 0, 0, -1;
  const Mat e = exp_retract(sl2, h, std::log(2.0));
  CHECK(std::abs(e(0, 0) - 2.0) < 1e-15);
  CHECK(std::abs(e(1, 1) - 0.5) < 1e-15);
  CHECK((exp_retract(sl2, h, 0.0) - Mat::Identity(2, 2)).norm() == 0.0);
  CHECK_THROWS_AS(exp_retract(sl2, h, 100.0), RangeError);

  const auto so21 = make_group(Family::SO_pq, Field::Real, 3, {{2, 1}});
  Mat rot = Mat::Zero(3, 3);
  rot(0, 1) = 1;
  rot(1, 0) = -1;
  const Mat r = exp_retract(so21, rot, M_PI / 2);
  CHECK(contains(so21, r).member);
  CHECK(std::abs(r(0, 1) - 1.0) < 1e-15);

  Rng rng(7);
  for (const auto& g : all_groups()) {
    for (int t = 0; t < 5; ++t) {
      const Mat x = random_element(g, rng, 1.0);
      CHECK(contains(g, x, 10 * g.membership_tol).member);
    }
  }
}

TEST_CASE("random_element determinism and scale 0") {
  const auto g = make_group(Family::Sp, Field::Real, 4);
  Rng a(11), b(11);
  CHECK((random_element(g, a, 0.7) - random_element(g, b, 0.7)).norm() == 0.0);
  Rng c(3);
  CHECK((random_element(g, c, 0.0) - Mat::Identity(4, 4)).norm() == 0.0);
}

TEST_CASE("form-preserving elements have reciprocal singular values") {
  Rng rng(5);
  for (const auto& g : all_groups()) {
    if (!g.form) continue;
    const Mat m = random_element(g, rng, 0.8);
    const RealVec s = Eigen::JacobiSVD<Mat>(m).singularValues();
    for (int i = 0; i < g.d; ++i) CHECK(std::abs(s(i) * s(g.d - 1 - i) - 1.0) < 1e-10);
  }
}

TEST_CASE("closure under products and inverses") {
  Rng rng(9);
  for (const auto& g : all_groups()) {
    const Mat a = random_element(g, rng, 0.5), b = random_element(g, rng, 0.5);
    CHECK(contains(g, a * b).member);
    CHECK(contains(g, inverse(a)).member);
    CHECK((group_inverse(g, a) * a - Mat::Identity(g.d, g.d)).norm() < 1e-12);
  }
}

TEST_CASE("project_to_group pulls a drifted element back") {
  Rng rng(13);
  for (const auto& g : all_groups()) {
    const Mat a = random_element(g, rng, 0.5);
    Mat drift = a;
    for (Eigen::Index i = 0; i < drift.size(); ++i) drift.data()[i] *= 1.0 + 1e-7 * std::sin(3.0 * i);
    const auto p = project_to_group(g, drift);
    CHECK(p.residual_before > 1e-9);
    CHECK(p.residual_after < 1e-13);
    CHECK((p.matrix - a).norm() < 1e-5);
  }
}
