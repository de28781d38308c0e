#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cocyclelab/cocycle.hpp"

namespace cocyclelab {

/// Finite-horizon check of the domination inequality: for k = 1..k_max,
///   (1/(kN)) sum_{j<k} log(||A^(N)(f^{jN}x)|| ||A^(N)(f^{jN}x)^{-1}||) <= theta.
struct DominationCertificate {
  int N = 1;
  double theta = 0.0;
  int k_max = 0;
  double max_log_ratio = 0.0;
  bool holds = false;
  double tau = 0.0;
  bool bunched = false;  // holds and 3 theta < tau
};

DominationCertificate domination_check(const CocycleSpec& a, const BasePoint& x, int N, double theta, int k_max);

/// Certificate with the smallest admissible theta (= max_log_ratio) for
/// block length N; N = 0 tries N = 1, 2, 4, 8, 16 and keeps the first
/// bunched one.
DominationCertificate certify_bunching(const CocycleSpec& a, const BasePoint& x, int N = 0, int k_max = 200);

enum class HolonomyKind { Stable, Unstable };

struct HolonomyResult {
  Mat H;
  std::int64_t n_stop = 0;
  double cauchy_gap = 0.0;
  bool converged = false;
  HolonomyKind kind = HolonomyKind::Stable;
  /// The limit is attained exactly at n_stop (finite dependence on the shift).
  bool exact = false;
  std::vector<std::pair<std::int64_t, double>> gap_trace;
};

struct HolonomyOptions {
  double tol = 1e-12;
  std::int64_t n_max = 5000;
  int stride = 5;
};

/// Point on W^s_loc(x) (stable) or W^u_loc(x) (unstable). Shift partners
/// copy x on the local leaf, flip the first symbol past it (x_{-1} or x_0)
/// and draw the rest at random; torus partners sit `offset` along the
/// eigenline.
BasePoint local_partner(const BaseSystem& sys, const BasePoint& x, HolonomyKind kind, Rng& rng, double offset = 0.1);

/// H^s_{x,y} = lim A^(n)(y)^{-1} A^(n)(x), y in W^s_loc(x).
HolonomyResult stable_holonomy(const CocycleSpec& a, const BasePoint& x, const BasePoint& y,
                               const HolonomyOptions& opt = {});
/// H^u_{x,z} = lim_{n -> -inf} A^(n)(z)^{-1} A^(n)(x), z in W^u_loc(x).
HolonomyResult unstable_holonomy(const CocycleSpec& a, const BasePoint& x, const BasePoint& z,
                                 const HolonomyOptions& opt = {});

/// Truncations P_0 .. P_n (stable) or Q_0 .. Q_n (unstable, n counts
/// backward steps), without any stopping rule.
std::vector<Mat> holonomy_truncations(const CocycleSpec& a, const BasePoint& x, const BasePoint& y, HolonomyKind kind,
                                      std::int64_t n);

struct DerivativeOptions {
  double tol = 1e-13;
  int patience = 5;
  std::int64_t max_terms = 5000;
  HolonomyOptions inner{};
  int certificate_k_max = 200;
};

struct DerivativeResult {
  Mat value;
  std::int64_t terms = 0;
  bool exact = false;  // series is a finite sum on the shift
  DominationCertificate certificate;
};

/// Derivative of H^s_{x,y} along B -> B exp(eps rho X) for the bump
/// `direction` (amplitude scales the tangent vector):
///   sum_{i>=0} B^(i)(y)^{-1} [H_i T(f^i x) - T(f^i y) H_i] B^(i)(x),
/// T = B^{-1} dB = amplitude * rho * X, H_i = H^s_{f^i x, f^i y}.
DerivativeResult stable_holonomy_derivative(const CocycleSpec& b, const BasePoint& x, const BasePoint& y,
                                            const Bump& direction, const DerivativeOptions& opt = {});

/// Derivative of H^u_{x,w}:
///   sum_{i>=1} B^(-i)(w)^{-1} [T(f^{-i}w) H_{-i} - H_{-i} T(f^{-i}x)] B^(-i)(x).
DerivativeResult unstable_holonomy_derivative(const CocycleSpec& b, const BasePoint& x, const BasePoint& w,
                                              const Bump& direction, const DerivativeOptions& opt = {});

}  // namespace cocyclelab
