#include "cocyclelab/group_atlas.hpp"

#include <cmath>
#include <limits>

#include "cocyclelab/errors.hpp"

namespace cocyclelab {

namespace {

Mat unit(int d, int i, int j) {
  Mat m = Mat::Zero(d, d);
  m(i, j) = 1.0;
  return m;
}

RealVec vectorize(const Mat& x) {
  const Eigen::Index n = x.size();
  RealVec v(2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    v(k) = x.data()[k].real();
    v(n + k) = x.data()[k].imag();
  }
  return v;
}

std::vector<Mat> with_imaginary_copies(std::vector<Mat> basis) {
  const std::size_t n = basis.size();
  for (std::size_t k = 0; k < n; ++k) basis.push_back(cplx(0.0, 1.0) * basis[k]);
  return basis;
}

double sign_of(const GroupDescriptor& g, int i) { return i < g.signature->first ? 1.0 : -1.0; }

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::SL: return "SL";
    case Family::Sp: return "Sp";
    case Family::SO_pq: return "SO";
    case Family::SU_pq: return "SU";
  }
  return "?";
}

std::string to_string(Field f) { return f == Field::Real ? "real" : "complex"; }

Family parse_family(std::string_view s) {
  if (s == "SL") return Family::SL;
  if (s == "Sp") return Family::Sp;
  if (s == "SO" || s == "SO_pq") return Family::SO_pq;
  if (s == "SU" || s == "SU_pq") return Family::SU_pq;
  throw ConfigError("unknown group family '" + std::string(s) + "' (expected SL, Sp, SO, SU)");
}

Field parse_field(std::string_view s) {
  if (s == "real" || s == "R") return Field::Real;
  if (s == "complex" || s == "C") return Field::Complex;
  throw ConfigError("unknown field '" + std::string(s) + "' (expected real or complex)");
}

int GroupDescriptor::lie_dim() const {
  switch (family) {
    case Family::SL: return (field == Field::Real ? 1 : 2) * (d * d - 1);
    case Family::Sp: return (field == Field::Real ? 1 : 2) * (d * (d + 1) / 2);
    case Family::SO_pq: return d * (d - 1) / 2;
    case Family::SU_pq: return d * d - 1;
  }
  return 0;
}

std::string GroupDescriptor::describe() const {
  std::string s = to_string(family);
  if (signature) {
    s += "(" + std::to_string(signature->first) + "," + std::to_string(signature->second) + ")";
  } else {
    s += "(" + std::to_string(d) + "," + (field == Field::Real ? "R" : "C") + ")";
  }
  return s;
}

GroupDescriptor make_group(Family family, Field field, int d, std::optional<std::pair<int, int>> signature) {
  if (d < 2) throw ConfigError("group dimension d must be >= 2 (got " + std::to_string(d) + ")");
  GroupDescriptor g;
  g.family = family;
  g.field = field;
  g.d = d;
  switch (family) {
    case Family::SL:
      if (signature) throw ConfigError("SL takes no signature");
      break;
    case Family::Sp: {
      if (d % 2 != 0) throw ConfigError("Sp requires even d (got d=" + std::to_string(d) + ")");
      if (signature) throw ConfigError("Sp takes no signature");
      const int n = d / 2;
      Mat j = Mat::Zero(d, d);
      j.topRightCorner(n, n).setIdentity();
      j.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
      g.form = j;
      break;
    }
    case Family::SO_pq:
    case Family::SU_pq: {
      const char* name = family == Family::SO_pq ? "SO(p,q)" : "SU(p,q)";
      if (!signature) throw ConfigError(std::string(name) + " requires a signature (p,q)");
      const auto [p, q] = *signature;
      if (p < 1 || q < 1) throw ConfigError(std::string(name) + " requires p >= 1 and q >= 1");
      if (p + q != d) throw ConfigError(std::string(name) + " requires p + q = d");
      if (family == Family::SO_pq && field != Field::Real) throw ConfigError("SO(p,q) is defined over the real field");
      if (family == Family::SU_pq && field != Field::Complex) throw ConfigError("SU(p,q) is defined over the complex field");
      // SO(1,1) is abelian, hence not semisimple.
      if (family == Family::SO_pq && d < 3) throw ConfigError("SO(p,q) requires p + q >= 3 (semisimplicity)");
      Mat j = Mat::Identity(d, d);
      for (int i = p; i < d; ++i) j(i, i) = -1.0;
      g.form = j;
      g.signature = signature;
      break;
    }
  }
  return g;
}

Membership contains(const GroupDescriptor& g, const Mat& m, std::optional<double> tol) {
  const double t = tol.value_or(g.membership_tol);
  Membership res;
  if (m.rows() != g.d || m.cols() != g.d || !m.allFinite()) {
    res.det_residual = res.form_residual = std::numeric_limits<double>::infinity();
    return res;
  }
  const cplx det = m.determinant();
  if (det == cplx(0.0)) {
    res.det_residual = res.form_residual = std::numeric_limits<double>::infinity();
    return res;
  }
  res.det_residual = std::abs(det - 1.0);
  if (g.form) res.form_residual = op_norm(g.adjoint(m) * (*g.form) * m - *g.form);
  if (g.field == Field::Real && !is_real(m)) res.form_residual = std::max(res.form_residual, m.imag().norm());
  res.member = res.det_residual <= t && res.form_residual <= t;
  return res;
}

std::vector<Mat> lie_basis(const GroupDescriptor& g) {
  const int d = g.d;
  std::vector<Mat> basis;
  switch (g.family) {
    case Family::SL: {
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          if (i != j) basis.push_back(unit(d, i, j));
      for (int i = 0; i + 1 < d; ++i) basis.push_back(unit(d, i, i) - unit(d, i + 1, i + 1));
      if (g.field == Field::Complex) basis = with_imaginary_copies(std::move(basis));
      break;
    }
    case Family::Sp: {
      // X = [[A, B], [C, -A^T]] with B, C symmetric.
      const int n = d / 2;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) basis.push_back(unit(d, i, j) - unit(d, n + j, n + i));
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          Mat b = unit(d, i, n + j);
          if (i != j) b += unit(d, j, n + i);
          basis.push_back(b);
        }
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          Mat c = unit(d, n + i, j);
          if (i != j) c += unit(d, n + j, i);
          basis.push_back(c);
        }
      if (g.field == Field::Complex) basis = with_imaginary_copies(std::move(basis));
      break;
    }
    case Family::SO_pq: {
      // JX antisymmetric: X = E_ij - s_i s_j E_ji.
      for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) basis.push_back(unit(d, i, j) - sign_of(g, i) * sign_of(g, j) * unit(d, j, i));
      break;
    }
    case Family::SU_pq: {
      // JX anti-Hermitian.
      const cplx I(0.0, 1.0);
      for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
          const double s = sign_of(g, i) * sign_of(g, j);
          basis.push_back(unit(d, i, j) - s * unit(d, j, i));
          basis.push_back(I * unit(d, i, j) + I * s * unit(d, j, i));
        }
      for (int i = 0; i + 1 < d; ++i) basis.push_back(I * (unit(d, i, i) - unit(d, i + 1, i + 1)));
      break;
    }
  }
  return basis;
}

LieChart::LieChart(const GroupDescriptor& g) : group_(g), basis_(lie_basis(g)) {
  vectorized_.resize(2 * g.d * g.d, static_cast<Eigen::Index>(basis_.size()));
  for (std::size_t k = 0; k < basis_.size(); ++k) vectorized_.col(static_cast<Eigen::Index>(k)) = vectorize(basis_[k]);
  qr_.compute(vectorized_);
}

RealVec LieChart::coordinates(const Mat& x) const { return qr_.solve(vectorize(x)); }

Mat LieChart::element(const RealVec& coords) const {
  Mat x = Mat::Zero(group_.d, group_.d);
  for (std::size_t k = 0; k < basis_.size(); ++k) x += coords(static_cast<Eigen::Index>(k)) * basis_[k];
  return x;
}

double LieChart::algebra_residual(const Mat& x) const {
  double r = std::abs(x.trace());
  if (group_.form) r += op_norm(group_.adjoint(x) * (*group_.form) + (*group_.form) * x);
  return r;
}

Mat exp_retract(const GroupDescriptor& g, const Mat& x, double t) {
  if (x.rows() != g.d || x.cols() != g.d) throw DomainError("Lie vector has wrong size for " + g.describe());
  const Mat tx = t * x;
  const double norm = frob_norm(tx);
  if (!(norm <= 10.0)) {
    throw RangeError("exp_retract: ||tX|| = " + format_double(norm) + " exceeds 10");
  }
  return expm(tx);
}

Mat random_lie_vector(const GroupDescriptor& g, Rng& rng) {
  const auto basis = lie_basis(g);
  Mat x = Mat::Zero(g.d, g.d);
  for (const auto& b : basis) x += rng.uniform(-1.0, 1.0) * b;
  return x;
}

Mat random_element(const GroupDescriptor& g, Rng& rng, double scale) {
  if (scale < 0.0) throw DomainError("random_element: scale must be nonnegative");
  return exp_retract(g, random_lie_vector(g, rng), scale);
}

Mat noncompact_part(const Mat& x) { return 0.5 * (x + x.adjoint()); }

Mat group_inverse(const GroupDescriptor& g, const Mat& m) {
  if (!g.form) return inverse(m);
  const Mat& j = *g.form;
  return j.transpose() * g.adjoint(m) * j;
}

namespace {

double projection_residual(const GroupDescriptor& g, const Mat& m) {
  const auto mem = contains(g, m, 0.0);
  return mem.det_residual + mem.form_residual;
}

}  // namespace

Projection project_to_group(const GroupDescriptor& g, const Mat& m, int max_steps) {
  Projection p;
  p.matrix = m;
  p.residual_before = projection_residual(g, m);
  if (g.form) {
    const Mat& j = *g.form;
    const Mat jinv = j.transpose();
    for (int k = 0; k < max_steps; ++k) {
      const Mat inv_adj = g.adjoint(inverse(p.matrix));
      p.matrix = 0.5 * (p.matrix + jinv * inv_adj * j);
      ++p.steps;
      if (op_norm(g.adjoint(p.matrix) * j * p.matrix - j) < 1e-15) break;
    }
  }
  const cplx det = p.matrix.determinant();
  cplx c(1.0);
  if (g.field == Field::Real) {
    const double dr = det.real();
    if (dr > 0.0) {
      c = std::pow(dr, -1.0 / g.d);
    } else if (dr < 0.0 && g.d % 2 == 1) {
      c = -std::pow(-dr, -1.0 / g.d);
    }
  } else {
    c = std::exp(-std::log(det) / static_cast<double>(g.d));
  }
  p.matrix *= c;
  if (g.field == Field::Real) p.matrix = p.matrix.real().cast<cplx>();
  p.residual_after = projection_residual(g, p.matrix);
  return p;
}

std::string group_to_text(const GroupDescriptor& g) {
  std::string s = "family = " + to_string(g.family) + "\nfield = " + to_string(g.field) + "\nd = " + std::to_string(g.d) + "\n";
  if (g.signature) s += "signature = " + std::to_string(g.signature->first) + "," + std::to_string(g.signature->second) + "\n";
  return s;
}

}  // namespace cocyclelab
