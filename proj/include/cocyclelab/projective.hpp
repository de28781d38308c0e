#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cocyclelab/cocycle.hpp"
#include "cocyclelab/holonomy.hpp"

namespace cocyclelab {

/// Unit vector representing a line; the first coordinate with modulus
/// above 1e-12 is real positive.
struct ProjPoint {
  Vec v;

  /// Throws DomainError for a (numerically) zero vector.
  static ProjPoint normalize(const Vec& v);
  int d() const { return static_cast<int>(v.size()); }
};

struct Atom {
  ProjPoint p;
  double weight = 1.0;
};

/// Finitely supported probability measure on projective space.
struct EmpiricalMeasure {
  std::vector<Atom> atoms;

  int d() const { return atoms.empty() ? 0 : atoms.front().p.d(); }
  /// Rescales weights to sum to one.
  void normalize();
};

/// (x, [v]) -> (f x, [A(x) v]).
std::pair<BasePoint, ProjPoint> proj_step(const CocycleSpec& a, const BasePoint& x, const ProjPoint& v);

/// Box partition of the base: a side x side grid on the torus, or the
/// cylinders fixed by x_{-depth} .. x_{depth-1} on the shift.
struct Partition {
  BaseKind kind = BaseKind::CatMap;
  int resolution = 4;
  int symbols = 2;

  static Partition grid(int side);
  static Partition cylinders(int symbols, int depth);
  int cells() const;
  int cell(const BasePoint& x) const;
  std::string label(int cell) const;
};

struct FiberOptions {
  int n_orbits = 32;
  int n_iter = 2000;  // the first n_iter / 10 steps are burn-in
  int threads = 1;
};

/// Per-cell empirical fiber measures from random starts (orbit j uses
/// Rng::stream(seed, j), seed drawn from `rng`). Cells never visited are
/// omitted.
std::map<int, EmpiricalMeasure> empirical_fiber_measures(const CocycleSpec& a, Rng& rng, const FiberOptions& opt,
                                                         const Partition& part);

/// Image of m under the projective action of H; throws DomainError when H
/// is singular.
EmpiricalMeasure pushforward(const Mat& h, const EmpiricalMeasure& m);

/// Exact Wasserstein-1 on P^1 (circle of circumference pi) when both
/// measures are real with d = 2; otherwise the largest discrepancy over a
/// fixed dictionary of 50 test functions v -> |<u_j, v>|^2.
double measure_distance(const EmpiricalMeasure& m1, const EmpiricalMeasure& m2);

enum class MeasureVerdict { NoCommonMeasure, PossiblyCommon };
std::string to_string(MeasureVerdict v);

struct CommonMeasureOptions {
  int L = 60;            // word length for the boundedness probe
  double bound = 1e6;    // norm bound for "bounded"
  int words = 200;       // random words sampled
  int finite_orbit = 4;  // largest finite union of lines checked
  double invariance_tol = 1e-8;
  std::uint64_t seed = 1;
};

/// Heuristic verdict. Witness kinds: "bounded" (witness = averaged positive
/// form), "subspace" (witness = orthonormal basis), "finite_orbit"
/// (witness columns = the lines), "none".
struct CommonMeasureReport {
  MeasureVerdict verdict = MeasureVerdict::NoCommonMeasure;
  std::string witness_kind = "none";
  Mat witness;
  double witness_residual = 0.0;
  double max_word_norm = 0.0;
  double growth_rate = 0.0;  // mean (1/L) log ||w|| over sampled words
  int subspaces_checked = 0;
  int orbits_checked = 0;
};

CommonMeasureReport common_invariant_measure_test(const Mat& g1, const Mat& g2, const CommonMeasureOptions& opt = {});

/// Window-0 cocycle over the Bernoulli(1/2, 1/2) full 2-shift taking g1 on
/// [0] and g2 on [1] (i.i.d. random products).
CocycleSpec bernoulli_cocycle(const GroupDescriptor& g, const Mat& g1, const Mat& g2);

struct HolonomyPair {
  HolonomyKind kind = HolonomyKind::Stable;
  BasePoint from, to;
};

/// n_stable pairs (y, z), z in W^s_loc(y), and n_unstable pairs (w, z),
/// z in W^u_loc(w). Shift samples carry cores of `width` symbols.
std::vector<HolonomyPair> sample_holonomy_pairs(const BaseSystem& sys, Rng& rng, int n_stable, int n_unstable,
                                                int width = 0);

struct DisintegrationOptions {
  double zero_tol = 1e-2;
  std::int64_t lyap_n = 10000;
  FiberOptions fiber;
  HolonomyOptions holonomy;
};

struct PairDistance {
  HolonomyPair pair;
  int cell_from = 0;
  int cell_to = 0;
  double distance = 0.0;
};

struct DisintegrationReport {
  std::vector<double> exponents;
  std::vector<PairDistance> pairs;  // pairs whose cells both carry mass
  int skipped = 0;
  double max_distance = 0.0;
  double mean_distance = 0.0;
  /// Largest distance between the even-orbit and odd-orbit halves of one
  /// cell: the sampling noise floor of the comparison.
  double resolution = 0.0;
  int cells = 0;
  std::size_t atoms = 0;
};

/// Compares (H_{y,z})_* m_y with m_z along the given pairs. Refuses
/// (RefusalError) unless every Lyapunov exponent is below zero_tol.
DisintegrationReport disintegration_invariance_test(const CocycleSpec& a, const std::vector<HolonomyPair>& pairs,
                                                    const Partition& part, Rng& rng,
                                                    const DisintegrationOptions& opt = {});

}  // namespace cocyclelab
