#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cocyclelab/cocycle.hpp"
#include "cocyclelab/holonomy.hpp"

namespace cocyclelab {

/// One periodic orbit with a homoclinic companion: z in W^u_loc(p),
/// f^q(z) in W^s_loc(p), plus the radii of the bump supports V_p, V_z.
struct HomoclinicEntry {
  PeriodicPoint p;
  BasePoint z;
  std::int64_t q = 1;
  double p_radius = 0.0;
  double z_radius = 0.0;
};

struct HomoclinicData {
  std::vector<HomoclinicEntry> entries;
  int horizon = 200;  // |n| range checked on the torus (shift checks are exact)

  int l() const { return static_cast<int>(entries.size()); }
};

/// l distinct periodic orbits (shift: words "0", "01", "001", "011", ...;
/// torus: orbits of (0,0), (1/2,0), (1/3,0), ...) with homoclinic points of
/// the given depth; radii shrink until the support conditions hold.
HomoclinicData build_homoclinic_data(const BaseSystem& sys, int l, int depth = 1, int horizon = 200);

/// Empty when the support conditions hold, otherwise the first violation:
///   f^n(p_i) not in V_{z_j};  f^n(z_i) not in V_{z_j} unless (n, i) = (0, j);
///   f^n(p_i) not in V_{p_j} unless i = j and kappa_i | n;  z_i not in V_{p_j}.
std::string support_violation(const BaseSystem& sys, const HomoclinicData& data);

/// [g_{1,1}, .., g_{l,1}, g_{1,2}, .., g_{l,2}] with g_{i,1} = B^(kappa_i)(p_i)
/// and g_{i,2} = H^s_{f^q z_i, p_i} B^(q_i)(z_i) H^u_{p_i, z_i}.
std::vector<Mat> phi(const CocycleSpec& b, const HomoclinicData& data, const HolonomyOptions& opt = {});

enum class JacobianMode { Analytic, FiniteDifference };

/// Columns: unit-amplitude bumps along the Lie basis at p_1..p_l, then at
/// z_1..z_l. Rows: Lie coordinates of dg g^{-1} for g_{i,1}, then g_{i,2}.
struct PhiJacobian {
  RealMat J;
  RealVec singular_values;  // descending
  int rank = 0;
  double rank_tol = 1e-9;  // relative to the largest singular value
  /// Frobenius norms: upper-left, upper-right, lower-left, lower-right.
  std::array<double, 4> block_norms{};
  /// Smallest singular values of the two diagonal blocks.
  std::array<double, 2> diagonal_min_sv{};
};

PhiJacobian phi_jacobian(const CocycleSpec& b, const HomoclinicData& data, JacobianMode mode, double h = 1e-4,
                         const DerivativeOptions& opt = {});

/// max |J_a - J_fd| / max |J_a|.
double mode_disagreement(const PhiJacobian& analytic, const PhiJacobian& fd);

struct SweepOptions {
  double epsilon = 1e-2;
  int trials = 100;
  std::int64_t n = 100000;
  double threshold = 1e-3;
  int bumps = 1;          // bumps per trial
  double radius = 0.45;   // bump radius (torus metric or shift distance)
  bool recheck = true;    // re-run flagged trials at 2n
  int threads = 1;
  HolderOptions holder{0, 1.0, 200, 1};
};

struct SweepTrial {
  int index = 0;
  double amplitude = 0.0;
  double holder_distance = 0.0;
  double lambda1 = 0.0;
  std::int64_t n = 0;
  bool positive = false;
  double lambda1_recheck = 0.0;  // at 2n, flagged trials only
  bool recheck_ok = false;
  bool failed = false;
  std::string error;
};

struct SweepReport {
  std::vector<SweepTrial> trials;
  int positive = 0;
  int failed = 0;
  int recheck_failures = 0;
  double fraction = 0.0;  // positive / (trials - failed)
};

/// Trial t perturbs A0 by `bumps` bumps with random centers, unit
/// noncompact Lie directions and amplitude +-epsilon, drawn from
/// Rng::stream(seed, t) with seed = rng.bits(); lambda_1 is estimated from a
/// random start. Results do not depend on the thread count.
SweepReport positivity_sweep(const CocycleSpec& a0, const SweepOptions& opt, Rng& rng);

/// Equal-width histogram of the lambda_1 values of successful trials:
/// (lower edge, upper edge, count).
std::vector<std::array<double, 3>> lambda_histogram(const SweepReport& r, int bins = 20);

}  // namespace cocyclelab
