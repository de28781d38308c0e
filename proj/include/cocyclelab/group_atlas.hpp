#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cocyclelab/linalg.hpp"
#include "cocyclelab/rng.hpp"

namespace cocyclelab {

enum class Family { SL, Sp, SO_pq, SU_pq };
enum class Field { Real, Complex };

std::string to_string(Family f);
std::string to_string(Field f);
Family parse_family(std::string_view s);
Field parse_field(std::string_view s);

/// A noncompact classical group G inside SL(d, K), described by the form it
/// preserves: M^H J M = J, where ^H is the conjugate transpose for SU(p,q)
/// and the plain transpose otherwise.
struct GroupDescriptor {
  Family family = Family::SL;
  Field field = Field::Real;
  int d = 2;
  std::optional<Mat> form;
  std::optional<std::pair<int, int>> signature;
  double membership_tol = 1e-9;

  /// Real dimension of the Lie algebra.
  int lie_dim() const;
  bool conjugate_form() const { return family == Family::SU_pq; }
  bool complex_entries() const { return field == Field::Complex; }

  /// M^H for this group's form convention.
  Mat adjoint(const Mat& m) const { return conjugate_form() ? Mat(m.adjoint()) : Mat(m.transpose()); }
  std::string describe() const;
};

/// Throws ConfigError naming the violated constraint.
GroupDescriptor make_group(Family family, Field field, int d,
                           std::optional<std::pair<int, int>> signature = std::nullopt);

struct Membership {
  bool member = false;
  double det_residual = 0.0;
  double form_residual = 0.0;
};

/// Operator-norm residuals |det M - 1| and ||M^H J M - J||. Singular or
/// non-finite input yields member=false with infinite residuals.
Membership contains(const GroupDescriptor& g, const Mat& m, std::optional<double> tol = std::nullopt);

/// Ordered real basis of the Lie algebra (length lie_dim()).
std::vector<Mat> lie_basis(const GroupDescriptor& g);

/// Coordinates of Lie algebra elements in lie_basis(g), by least squares on
/// the real vectorization. Built once and reused.
class LieChart {
 public:
  explicit LieChart(const GroupDescriptor& g);

  const std::vector<Mat>& basis() const { return basis_; }
  int dim() const { return static_cast<int>(basis_.size()); }
  RealVec coordinates(const Mat& x) const;
  Mat element(const RealVec& coords) const;
  /// Residual of the tangent-space constraints (trace and form).
  double algebra_residual(const Mat& x) const;

 private:
  GroupDescriptor group_;
  std::vector<Mat> basis_;
  RealMat vectorized_;
  Eigen::ColPivHouseholderQR<RealMat> qr_;
};

/// exp(tX); throws RangeError when ||tX||_F > 10.
Mat exp_retract(const GroupDescriptor& g, const Mat& x, double t);

/// exp of a random basis combination with i.i.d. U[-scale, scale] weights.
Mat random_element(const GroupDescriptor& g, Rng& rng, double scale);

/// Random element of the Lie algebra, coefficients U[-1, 1].
Mat random_lie_vector(const GroupDescriptor& g, Rng& rng);

/// Hermitian part (X + X^*)/2, the noncompact complement of the maximal
/// compact subalgebra for the canonical forms used here.
Mat noncompact_part(const Mat& x);

/// Inverse using the preserved form when available (J^{-1} M^H J).
Mat group_inverse(const GroupDescriptor& g, const Mat& m);

struct Projection {
  Mat matrix;
  int steps = 0;
  double residual_before = 0.0;
  double residual_after = 0.0;
};

/// Renormalization onto G: generalized polar Newton iteration
/// M <- (M + J^{-1} M^{-H} J) / 2 (at most `max_steps`), then determinant
/// rescaling.
Projection project_to_group(const GroupDescriptor& g, const Mat& m, int max_steps = 5);

/// Serialization as a structured text block (family/field/d/signature).
std::string group_to_text(const GroupDescriptor& g);

}  // namespace cocyclelab
