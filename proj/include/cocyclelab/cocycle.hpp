#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "cocyclelab/base_dynamics.hpp"
#include "cocyclelab/group_atlas.hpp"

namespace cocyclelab {

/// B(x) = A(x) * exp(amplitude * rho(d(x, center) / radius) * direction).
/// Torus profile: rho(s) = exp(1 - 1/(1 - s^2)) for s < 1. Shift profile:
/// the cylinder indicator rho = [d < radius], so support conditions are
/// exact cylinder statements.
struct Bump {
  BasePoint center;
  double radius = 0.1;
  Mat direction;
  double amplitude = 0.0;
};

struct ConstantForm {
  Mat g;
};

/// Value read from the window x_{-w} .. x_{w}; table indexed by the word
/// read as a base-k integer with x_{-w} most significant.
struct LocallyConstantForm {
  int window = 0;
  std::vector<Mat> table;
};

/// phi(x, y) = cos(2 pi (fx x + fy y)) or sin(...); (0, 0, cos) is the constant 1.
struct FourierTerm {
  int fx = 0;
  int fy = 0;
  bool sine = false;
  Mat coeff;
};

/// A(x) = exp(sum_f coeff_f phi_f(x)).
struct FourierTorusForm {
  std::vector<FourierTerm> terms;
};

using CocycleForm = std::variant<ConstantForm, LocallyConstantForm, FourierTorusForm>;

struct CocycleSpec {
  GroupDescriptor group;
  BaseSystem base;
  CocycleForm form;
  std::vector<Bump> bumps;  // applied on the right, in order

  int d() const { return group.d; }
};

/// Validates shapes and membership of stored data (ConfigError on failure).
void validate(const CocycleSpec& a);

CocycleSpec constant_cocycle(const GroupDescriptor& g, const BaseSystem& sys, const Mat& value);
CocycleSpec identity_cocycle(const GroupDescriptor& g, const BaseSystem& sys);
/// Torus cocycle exp(sum scale X_f phi_f) over frequencies 0 <= fx, fy <=
/// max_freq (sine terms when fx + fy is odd), X_f = random_lie_vector.
CocycleSpec random_fourier_cocycle(const GroupDescriptor& g, Rng& rng, double scale, int max_freq = 1);

/// Bump profile rho at x (0 outside the support).
double bump_profile(const BaseSystem& sys, const Bump& b, const BasePoint& x);

/// Cocycle value without the bump factors.
Mat evaluate_unperturbed(const CocycleSpec& a, const BasePoint& x);
Mat evaluate(const CocycleSpec& a, const BasePoint& x);

/// Partial derivatives (d/dx, d/dy) of the value on the torus. Zero on the
/// shift (locally constant in the symbolic metric).
std::array<Mat, 2> spatial_derivative(const CocycleSpec& a, const BasePoint& x);

/// Largest |i| such that the value at x depends on x_i (shift only);
/// nullopt when the dependence is not finite.
std::optional<int> dependence_radius(const CocycleSpec& a);

/// M * exp(log_scale); keeps long products finite.
struct ScaledMatrix {
  Mat m;
  double log_scale = 0.0;
  Mat value() const;
};

struct ProductDiagnostics {
  int renormalizations = 0;
  double max_drift = 0.0;  // largest membership residual seen before projection
};

/// A^(n)(x); n < 0 uses A^(n)(x) = (A^(-n)(f^n x))^{-1}.
ScaledMatrix product_scaled(const CocycleSpec& a, const BasePoint& x, std::int64_t n,
                            ProductDiagnostics* diag = nullptr);
/// Unscaled product; throws RangeError if the entries leave double range.
Mat product(const CocycleSpec& a, const BasePoint& x, std::int64_t n, ProductDiagnostics* diag = nullptr);

struct LyapunovReport {
  std::vector<double> exponents;
  std::int64_t n = 0;
  double sum_residual = 0.0;
  double window_drift = 0.0;
  BasePoint x0;
  /// Running estimates (k, sorted exponents) every trace_every steps.
  std::vector<std::pair<std::int64_t, std::vector<double>>> trace;
};

/// QR re-orthonormalization estimate of the full spectrum along the orbit of x.
LyapunovReport lyapunov_spectrum(const CocycleSpec& a, const BasePoint& x, std::int64_t n,
                                 std::int64_t trace_every = 0);

/// Random start whose orbit stays generic for `steps` steps in both
/// directions (a shift sample gets a random core wide enough to never
/// reach its periodic tails).
BasePoint sample_orbit_start(const BaseSystem& sys, Rng& rng, std::int64_t steps);

/// (1/n) log ||A^(n)(x)||.
double norm_growth(const CocycleSpec& a, const BasePoint& x, std::int64_t n);

struct MonteCarloResult {
  double mean = 0.0;
  double std_error = 0.0;
  std::vector<double> samples;
};

/// Trial t starts from a point drawn with Rng::stream(seed, t); the result
/// does not depend on `threads`.
MonteCarloResult top_exponent_mc(const CocycleSpec& a, std::int64_t n, int trials, std::uint64_t seed,
                                 int threads = 1);

struct HolderOptions {
  int r = 0;
  double nu = 1.0;
  int samples = 200;
  std::uint64_t seed = 1;
};

/// Sampled lower bound for d_{r,nu}(A, B) (Frobenius norm): sup |A - B|,
/// plus the nu-Holder seminorm of A - B when nu > 0, plus for r = 1 the
/// sup of the spatial derivative of A - B (and its nu-Holder seminorm).
double holder_distance(const CocycleSpec& a, const CocycleSpec& b, const HolderOptions& opt);

}  // namespace cocyclelab
