#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cocyclelab/rng.hpp"

namespace cocyclelab {

/// Point of the 2-torus. Two exact encodings share one type: rationals
/// a/den (den > 0) and 64-bit fixed point a/2^64 (den == 0). The cat map
/// acts exactly on both, so orbits are reproducible and invertible.
struct TorusPoint {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  std::uint64_t den = 0;

  static TorusPoint fixed(double x, double y);
  static TorusPoint rational(std::int64_t num_x, std::int64_t num_y, std::uint64_t den);

  bool is_rational() const { return den != 0; }
  double x() const;
  double y() const;
  bool operator==(const TorusPoint&) const = default;
};

/// Bi-infinite eventually periodic sequence
///   ...(left)(left) core (right)(right)...
/// Coordinate i is stored at core position offset + i, so shifting only
/// moves the offset and the symbol storage is shared.
class SymbolSequence {
 public:
  using Word = std::vector<std::uint8_t>;
  static constexpr std::int64_t kMinusInf = std::numeric_limits<std::int64_t>::min();
  static constexpr std::int64_t kPlusInf = std::numeric_limits<std::int64_t>::max();

  SymbolSequence() = default;
  /// `origin` is the core index holding coordinate 0 (may lie outside the core).
  SymbolSequence(int k, Word left, Word core, Word right, std::int64_t origin);

  /// word^infinity with coordinate 0 = word[0].
  static SymbolSequence periodic(int k, Word word);

  /// Sequence whose coordinates in [lo, hi) come from `coord`, with the
  /// parts left of lo and right of hi periodic of the given lengths (also
  /// read from `coord`).
  template <class F>
  static SymbolSequence from_coordinates(int k, std::int64_t lo, std::int64_t hi, std::int64_t left_len,
                                         std::int64_t right_len, F&& coord) {
    Word left(static_cast<std::size_t>(left_len)), core(static_cast<std::size_t>(hi - lo)),
        right(static_cast<std::size_t>(right_len));
    for (std::int64_t t = 0; t < left_len; ++t) left[t] = static_cast<std::uint8_t>(coord(lo - left_len + t));
    for (std::int64_t t = lo; t < hi; ++t) core[t - lo] = static_cast<std::uint8_t>(coord(t));
    for (std::int64_t t = 0; t < right_len; ++t) right[t] = static_cast<std::uint8_t>(coord(hi + t));
    return SymbolSequence(k, std::move(left), std::move(core), std::move(right), -lo);
  }

  int symbols() const { return data_ ? data_->k : 0; }
  int at(std::int64_t i) const;
  /// (f^n x)_i = x_{i+n}.
  SymbolSequence shifted(std::int64_t n) const;

  /// Coordinate range of the stored core: [core_begin, core_end).
  std::int64_t core_begin() const { return -offset_; }
  std::int64_t core_end() const { return -offset_ + static_cast<std::int64_t>(data_->core.size()); }
  std::size_t left_period() const { return data_->left.size(); }
  std::size_t right_period() const { return data_->right.size(); }
  const Word& left_word() const { return data_->left; }
  const Word& core_word() const { return data_->core; }
  const Word& right_word() const { return data_->right; }

  /// Primitive periods, core trimmed as far as possible.
  SymbolSequence normalized() const;
  /// Normalized, with the core widened to contain coordinate 0.
  std::string to_string() const;
  static SymbolSequence parse(std::string_view text);

  /// Exact equality of the bi-infinite sequences.
  bool operator==(const SymbolSequence& other) const;

  /// Window [lo, hi] outside of which both sequences are periodic with
  /// agreement decided by one common period.
  static std::pair<std::int64_t, std::int64_t> comparison_window(const SymbolSequence& x, const SymbolSequence& y);
  /// Smallest a with x_i = y_i for all i >= a (kMinusInf if equal, kPlusInf if the right tails differ).
  static std::int64_t agree_from(const SymbolSequence& x, const SymbolSequence& y);
  /// Largest b with x_i = y_i for all i <= b (kPlusInf if equal, kMinusInf if the left tails differ).
  static std::int64_t agree_until(const SymbolSequence& x, const SymbolSequence& y);
  /// Largest m with x_i = y_i for |i| < m (kPlusInf if equal).
  static std::int64_t central_agreement(const SymbolSequence& x, const SymbolSequence& y);

 private:
  struct Storage {
    int k = 2;
    Word left, core, right;
  };
  std::shared_ptr<const Storage> data_;
  std::int64_t offset_ = 0;
};

using BasePoint = std::variant<TorusPoint, SymbolSequence>;

enum class BaseKind { CatMap, FullShift };

std::string to_string(BaseKind k);

struct BaseSystem {
  BaseKind kind = BaseKind::CatMap;
  int symbols = 2;
  std::vector<double> weights;  // Bernoulli weights (FullShift)
  double tau = 0.0;             // contraction exponent
  double k_hyp = 1.0;           // distortion constant
  double box_radius = 0.2;      // CatMap product-box radius
  int sample_width = 64;        // FullShift random core width
  int tail_period = 8;          // FullShift random tail period

  static BaseSystem cat_map();
  static BaseSystem full_shift(int k, std::vector<double> weights = {});
};

// Cat map f(x, y) = (2x + y, x + y) mod 1.
namespace catmap {
double expanding_eigenvalue();  // (3 + sqrt 5) / 2
/// Unit eigenvectors: unstable slope (sqrt5 - 1)/2, stable slope -(1 + sqrt5)/2.
std::pair<double, double> unstable_direction();
std::pair<double, double> stable_direction();
/// Minimal lift of q - p to [-1/2, 1/2)^2.
std::pair<double, double> displacement(const TorusPoint& p, const TorusPoint& q);
/// Coordinates (a, b) of a displacement in the (unstable, stable) basis.
std::pair<double, double> eigen_coordinates(double dx, double dy);
TorusPoint translate(const TorusPoint& p, double dx, double dy);
}  // namespace catmap

BasePoint step(const BaseSystem& sys, const BasePoint& p, std::int64_t n);

/// Torus: Euclidean distance of the minimal lift. Shift: 2^{-m}, m the
/// central agreement length.
double distance(const BaseSystem& sys, const BasePoint& p, const BasePoint& q);

/// [y, z] = W^u_loc(y) cap W^s_loc(z). Throws DomainError outside a
/// common product box.
BasePoint bracket(const BaseSystem& sys, const BasePoint& y, const BasePoint& z);

/// Local stable/unstable membership. On the shift W^s_loc(x) = {y_i = x_i,
/// i >= 0} and W^u_loc(x) = {y_i = x_i, i < 0}; on the torus the residual
/// off the eigenline must be below 1e-10 and the offset within the box.
bool on_local_stable(const BaseSystem& sys, const BasePoint& x, const BasePoint& y);
bool on_local_unstable(const BaseSystem& sys, const BasePoint& x, const BasePoint& y);

struct PeriodicPoint {
  BasePoint point;
  std::int64_t period = 1;
  bool corrected = false;  // the requested period was not minimal
};

/// Rational torus point or purely periodic sequence; the minimal period is
/// computed exactly.
PeriodicPoint periodic_point(const BaseSystem& sys, const BasePoint& candidate,
                             std::int64_t claimed_period = 0);
PeriodicPoint periodic_word(const BaseSystem& sys, const SymbolSequence::Word& word);

struct HomoclinicPoint {
  BasePoint z;
  std::int64_t q = 1;
};

/// z in W^u_loc(p) with f^q(z) in W^s_loc(p), z off the orbit of p.
HomoclinicPoint homoclinic_point(const BaseSystem& sys, const PeriodicPoint& p, int depth);

/// i.i.d. draws from the invariant measure. FullShift draws use a random
/// core of `width` symbols (sys.sample_width when 0) centered at 0, with
/// random periodic tails.
std::vector<BasePoint> sample(const BaseSystem& sys, Rng& rng, int n, int width = 0);
BasePoint sample_one(const BaseSystem& sys, Rng& rng, int width = 0);

/// Text encodings "torus:x,y" (decimal or p/q) and "seq:k:left|core@origin|right".
BasePoint parse_point(std::string_view text);
std::string point_to_string(const BasePoint& p);
bool same_point(const BasePoint& p, const BasePoint& q);

}  // namespace cocyclelab
