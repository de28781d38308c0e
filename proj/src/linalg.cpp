#include "cocyclelab/linalg.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "cocyclelab/errors.hpp"

namespace cocyclelab {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

double op_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 2 && m.cols() == 2) {
    // sigma_max^2 = (F^2 + sqrt(F^4 - 4|det|^2)) / 2
    const double f2 = m.squaredNorm();
    const double det = std::abs(m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0));
    const double disc = std::max(0.0, f2 * f2 - 4.0 * det * det);
    return std::sqrt(0.5 * (f2 + std::sqrt(disc)));
  }
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

double min_singular_value(const Mat& m) {
  if (m.rows() == 2 && m.cols() == 2) {
    const double det = std::abs(m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0));
    const double smax = op_norm(m);
    return smax > 0.0 ? det / smax : 0.0;
  }
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

double frob_norm(const Mat& m) { return m.norm(); }

double max_abs_entry(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Mat expm(const Mat& x) {
  if (x.rows() == 2 && x.cols() == 2 && std::abs(x.trace()) == 0.0) {
    // X^2 = s^2 I with s^2 = -det X, so exp X = cosh(s) I + sinh(s)/s X.
    const cplx s2 = -(x(0, 0) * x(1, 1) - x(0, 1) * x(1, 0));
    const cplx s = std::sqrt(s2);
    cplx c0, c1;
    if (std::abs(s) < 1e-4) {
      // Taylor tails; truncation below 1e-20 at |s| < 1e-4.
      c0 = 1.0 + s2 / 2.0 + s2 * s2 / 24.0;
      c1 = 1.0 + s2 / 6.0 + s2 * s2 / 120.0;
    } else {
      c0 = std::cosh(s);
      c1 = std::sinh(s) / s;
    }
    Mat r = c1 * x;
    r(0, 0) += c0;
    r(1, 1) += c0;
    return r;
  }
  return x.exp();
}

Mat inverse(const Mat& m) {
  if (m.rows() == 2 && m.cols() == 2) {
    const cplx det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    if (det == cplx(0.0) || !std::isfinite(std::abs(det))) {
      throw NumericalError("singular matrix in inverse");
    }
    Mat r(2, 2);
    r << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
    return r / det;
  }
  Eigen::PartialPivLU<Mat> lu(m);
  if (std::abs(lu.determinant()) == 0.0) throw NumericalError("singular matrix in inverse");
  return lu.inverse();
}

bool is_real(const Mat& m, double tol) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (std::abs(m.data()[i].imag()) > tol) return false;
  }
  return true;
}

std::string format_double(double v) {
  if (v == 0.0) return std::signbit(v) ? "-0" : "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_matrix(const Mat& m, bool force_real) {
  const bool real = force_real || is_real(m);
  std::string out;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r) out += "; ";
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ' ';
      out += format_double(m(r, c).real());
      if (!real) {
        out += ':';
        out += format_double(m(r, c).imag());
      }
    }
  }
  return out;
}

double parse_double(std::string_view text) {
  text = trim(text);
  double v = 0.0;
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

Mat parse_matrix(std::string_view text) {
  std::vector<std::vector<cplx>> rows;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(';', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view row = trim(text.substr(start, end - start));
    if (!row.empty()) {
      std::vector<cplx> entries;
      std::istringstream is{std::string(row)};
      std::string tok;
      while (is >> tok) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos) {
          entries.emplace_back(parse_double(tok), 0.0);
        } else {
          entries.emplace_back(parse_double(std::string_view(tok).substr(0, colon)),
                               parse_double(std::string_view(tok).substr(colon + 1)));
        }
      }
      rows.push_back(std::move(entries));
    }
    start = end + 1;
  }
  if (rows.empty()) throw ConfigError("empty matrix text");
  const std::size_t cols = rows.front().size();
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw ConfigError("ragged matrix rows in '" + std::string(text) + "'");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

}  // namespace cocyclelab
