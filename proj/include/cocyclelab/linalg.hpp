#pragma once

#include <complex>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace cocyclelab {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RealMat = Eigen::MatrixXd;
using RealVec = Eigen::VectorXd;

/// Operator 2-norm (largest singular value). Closed form for 2x2.
double op_norm(const Mat& m);

/// Smallest singular value.
double min_singular_value(const Mat& m);

double frob_norm(const Mat& m);

double max_abs_entry(const Mat& m);

/// Matrix exponential, scaling-and-squaring Pade for general matrices and
/// the closed form cosh/sinh expansion for traceless 2x2 input.
Mat expm(const Mat& x);

/// Inverse via partial-pivot LU; throws NumericalError when singular.
Mat inverse(const Mat& m);

bool is_real(const Mat& m, double tol = 0.0);

/// Shortest round-trip decimal rendering (at most 17 significant digits).
std::string format_double(double v);

/// Row-major text: entries separated by spaces, rows by ';'. Complex
/// entries print as "re:im" unless `force_real` or every entry is real.
std::string format_matrix(const Mat& m, bool force_real = false);

/// Inverse of format_matrix. Rows must have equal length.
Mat parse_matrix(std::string_view text);

double parse_double(std::string_view text);

}  // namespace cocyclelab
