#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <sstream>
#include <unistd.h>

#include "cocyclelab/errors.hpp"
#include "cocyclelab/genericity.hpp"
#include "cocyclelab/holonomy.hpp"
#include "cocyclelab/projective.hpp"
#include "cocyclelab/runner.hpp"

namespace cocyclelab {

namespace {

Mat m2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

Mat rot(double t) { return m2(std::cos(t), -std::sin(t), std::sin(t), std::cos(t)); }

std::string expect(bool ok, const std::string& what) { return ok ? "" : what; }

template <class E, class F>
std::string expect_throw(F&& f, const std::string& what) {
  try {
    f();
  } catch (const E&) {
    return "";
  } catch (const std::exception& e) {
    return what + " (threw a different error: " + e.what() + ")";
  }
  return what + " (no error)";
}

struct Case {
  std::string name;
  std::function<std::string()> body;
};

/// Runs the CLI entry point in a scratch directory.
RunResult cli(const std::string& command, const std::string& text) {
  const auto dir = std::filesystem::temp_directory_path() / ("cocyclelab-selftest-" + std::to_string(::getpid()));
  RunRequest req;
  req.command = command;
  req.config = Config::parse(text, "<selftest>");
  req.out = dir.string();
  std::ostringstream sink;
  auto r = run(req, sink);
  std::error_code ec;
  std::filesystem::remove_all(dir, ec);
  return r;
}

}  // namespace

SelftestReport selftest(bool corrupt_tolerance) {
  const auto group = [&](Family f, Field k, int d, std::optional<std::pair<int, int>> sig = std::nullopt) {
    auto g = make_group(f, k, d, sig);
    if (corrupt_tolerance) g.membership_tol = 0.0;
    return g;
  };
  const auto member_case = [&](Family f, Field k, int d, std::optional<std::pair<int, int>> sig) {
    return [=]() {
      const auto g = group(f, k, d, sig);
      Rng rng(11);
      for (int i = 0; i < 5; ++i)
        if (!contains(g, random_element(g, rng, 0.7)).member) return std::string("random element rejected");
      return std::string();
    };
  };
  const auto shift = BaseSystem::full_shift(2);
  const auto cat = BaseSystem::cat_map();

  const std::vector<Case> cases = {
      {"membership: SL(2,R) random elements", member_case(Family::SL, Field::Real, 2, std::nullopt)},
      {"membership: SL(3,C) random elements", member_case(Family::SL, Field::Complex, 3, std::nullopt)},
      {"membership: Sp(4,R) random elements", member_case(Family::Sp, Field::Real, 4, std::nullopt)},
      {"membership: SO(2,1) random elements", member_case(Family::SO_pq, Field::Real, 3, std::make_pair(2, 1))},
      {"membership: SU(1,1) random elements", member_case(Family::SU_pq, Field::Complex, 2, std::make_pair(1, 1))},
      {"membership: projection restores a drifted product",
       [&] {
         const auto g = group(Family::SL, Field::Real, 2);
         const Mat drifted = m2(2.0, 1.0, 1.0, 1.0) * (1.0 + 1e-7);
         return expect(contains(g, project_to_group(g, drifted).matrix).member, "projected matrix rejected");
       }},
      {"group: Sp with odd d is rejected",
       [] { return expect_throw<ConfigError>([] { make_group(Family::Sp, Field::Real, 3); }, "Sp(3) accepted"); }},
      {"group: lie dimension of SL(2,R) is 3",
       [] { return expect(make_group(Family::SL, Field::Real, 2).lie_dim() == 3, "wrong dimension"); }},
      {"base: (0,0) is a fixed point of the cat map",
       [&] {
         const BasePoint p = TorusPoint::fixed(0, 0);
         return expect(same_point(step(cat, p, 1), p), "f(0,0) != (0,0)");
       }},
      {"base: shift step is invertible",
       [&] {
         Rng rng(3);
         const auto x = sample_one(shift, rng, 12);
         return expect(same_point(step(shift, step(shift, x, 5), -5), x), "f^-5 f^5 x != x");
       }},
      {"base: minimal period of the word 0101 is 2",
       [&] { return expect(periodic_word(shift, {0, 1, 0, 1}).period == 2, "wrong period"); }},
      {"cocycle: diag(2, 1/2) exponents are (ln 2, -ln 2)",
       [&] {
         const auto a = constant_cocycle(group(Family::SL, Field::Real, 2), shift, m2(2, 0, 0, 0.5));
         Rng rng(1);
         const auto r = lyapunov_spectrum(a, sample_one(shift, rng), 1000);
         return expect(std::abs(r.exponents[0] - std::log(2.0)) < 1e-12 && std::abs(r.exponents[1] + std::log(2.0)) < 1e-12,
                       "exponents off");
       }},
      {"cocycle: rotation has zero exponents",
       [&] {
         const auto a = constant_cocycle(group(Family::SL, Field::Real, 2), cat, rot(0.3));
         const auto r = lyapunov_spectrum(a, TorusPoint::fixed(0.1, 0.2), 1000);
         return expect(std::abs(r.exponents[0]) < 1e-9, "nonzero exponent");
       }},
      {"cocycle: product over n steps composes",
       [&] {
         const auto g = group(Family::SL, Field::Real, 2);
         const CocycleSpec a{g, shift, LocallyConstantForm{0, {rot(0.4), m2(1, 0.5, 0, 1)}}, {}};
         Rng rng(4);
         const auto x = sample_one(shift, rng);
         const Mat lhs = product(a, x, 7), rhs = product(a, step(shift, x, 3), 4) * product(a, x, 3);
         return expect((lhs - rhs).norm() <= 1e-12 * lhs.norm(), "A(7) != A(4) A(3)");
       }},
      {"holonomy: window-0 cocycle has trivial stable holonomy",
       [&] {
         const auto g = group(Family::SL, Field::Real, 2);
         const CocycleSpec a{g, shift, LocallyConstantForm{0, {rot(0.4), rot(1.3)}}, {}};
         Rng rng(5);
         const auto x = sample_one(shift, rng);
         const auto y = local_partner(shift, x, HolonomyKind::Stable, rng);
         return expect((stable_holonomy(a, x, y).H - Mat::Identity(2, 2)).norm() == 0.0, "H^s != I");
       }},
      {"holonomy: rotations are dominated with theta near 0",
       [&] {
         const auto a = constant_cocycle(group(Family::SL, Field::Real, 2), shift, rot(0.7));
         return expect(domination_check(a, SymbolSequence::periodic(2, {0}), 1, 1e-9, 50).holds, "not dominated");
       }},
      {"holonomy: hyperbolic constant cocycle is not bunched",
       [&] {
         const auto a = constant_cocycle(group(Family::SL, Field::Real, 2), shift, m2(4, 0, 0, 0.25));
         return expect(!certify_bunching(a, SymbolSequence::periodic(2, {0})).bunched, "bunching certified");
       }},
      {"projective: identity fixes every direction",
       [&] {
         const auto a = identity_cocycle(group(Family::SL, Field::Real, 2), cat);
         Vec v(2);
         v << 0.6, 0.8;
         const auto p = ProjPoint::normalize(v);
         const auto [x1, p1] = proj_step(a, TorusPoint::fixed(0.1, 0.1), p);
         return expect((p1.v - p.v).norm() < 1e-15, "direction moved");
       }},
      {"projective: two rotations share an invariant measure",
       [] {
         return expect(common_invariant_measure_test(rot(0.3), rot(1.1)).verdict == MeasureVerdict::PossiblyCommon,
                       "rotations reported as having no common measure");
       }},
      {"projective: generic hyperbolic pair has no common measure",
       [] {
         const auto r = common_invariant_measure_test(m2(2, 0, 0, 0.5), m2(1, 1, 1, 2));
         return expect(r.verdict == MeasureVerdict::NoCommonMeasure, "common measure claimed");
       }},
      {"projective: disintegration refuses a positive exponent",
       [&] {
         const auto a = constant_cocycle(group(Family::SL, Field::Real, 2), shift,
                                         m2(std::exp(0.05), 0, 0, std::exp(-0.05)));
         Rng rng(2);
         const auto pairs = sample_holonomy_pairs(shift, rng, 2, 2);
         return expect_throw<RefusalError>(
             [&] { disintegration_invariance_test(a, pairs, Partition::cylinders(2, 1), rng); }, "no refusal");
       }},
      {"genericity: phi of the identity cocycle is the identity",
       [&] {
         const auto data = build_homoclinic_data(shift, 2);
         for (const auto& m : phi(identity_cocycle(group(Family::SL, Field::Real, 2), shift), data))
           if ((m - Mat::Identity(2, 2)).norm() != 0.0) return std::string("non-identity entry");
         return std::string();
       }},
      {"genericity: homoclinic data satisfy the support conditions",
       [&] { return expect(support_violation(shift, build_homoclinic_data(shift, 3)).empty(), "support violated"); }},
      {"cli: lyap on diag(2, 1/2) exits 0",
       [] {
         const auto r = cli("lyap",
                            "[base]\nkind = fullshift\n[cocycle]\nform = constant\nvalue = 2 0; 0 0.5\n[params]\nn = 1000\n");
         return expect(r.exit_code == 0 && r.summary_json.find("0.6931471805599") != std::string::npos,
                       "exit " + std::to_string(r.exit_code) + " " + r.message);
       }},
      {"cli: Sp with odd d exits 2 naming the constraint",
       [] {
         const auto r = cli("lyap", "[group]\nfamily = Sp\nd = 3\n[cocycle]\nform = identity\n");
         return expect(r.exit_code == 2 && r.message.find("even") != std::string::npos,
                       "exit " + std::to_string(r.exit_code) + " " + r.message);
       }},
      {"cli: unknown key exits 2",
       [] {
         const auto r = cli("lyap", "[cocycle]\nform = identity\n[params]\nbogus = 1\n");
         return expect(r.exit_code == 2 && r.message.find("params.bogus") != std::string::npos, r.message);
       }},
      {"cli: disintegration with lambda_1 = 0.05 exits 4",
       [] {
         const auto r = cli("disintegration",
                            "[base]\nkind = fullshift\n[cocycle]\nform = constant\n"
                            "value = 1.0512710963760241 0; 0 0.95122942450071402\n[params]\nlyap_n = 1000\n");
         return expect(r.exit_code == 4, "exit " + std::to_string(r.exit_code) + " " + r.message);
       }},
  };

  SelftestReport report;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& c : cases) {
    SelftestCase out{c.name, false, ""};
    try {
      out.detail = c.body();
      out.passed = out.detail.empty();
    } catch (const std::exception& e) {
      out.detail = std::string("unexpected error: ") + e.what();
    }
    if (!out.passed) ++report.failed;
    report.cases.push_back(out);
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace cocyclelab
