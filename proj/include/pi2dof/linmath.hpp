#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "errors.hpp"
#include "random.hpp"

namespace pi2dof {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Margin used by every Hurwitz / Schur membership test.
inline constexpr double kStabilityMargin = 1e-9;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite())
    throw DomainError(std::string(what) + ": non-finite entries");
}

inline void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols())
    throw DimensionError(std::string(what) + ": matrix is " +
                         std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected square");
}

inline void require_shape(const Matrix& m, Eigen::Index r, Eigen::Index c,
                          const char* what) {
  if (m.rows() != r || m.cols() != c)
    throw DimensionError(std::string(what) + ": expected " +
                         std::to_string(r) + "x" + std::to_string(c) +
                         ", got " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
}

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline double spectral_abscissa(const Matrix& f) {
  if (f.size() == 0) return -std::numeric_limits<double>::infinity();
  return f.eigenvalues().real().maxCoeff();
}

inline double spectral_radius(const Matrix& f) {
  if (f.size() == 0) return 0.0;
  return f.eigenvalues().cwiseAbs().maxCoeff();
}

inline bool is_hurwitz(const Matrix& f) {
  return f.allFinite() && spectral_abscissa(f) < -kStabilityMargin;
}

inline bool is_schur_stable(const Matrix& f) {
  return f.allFinite() && spectral_radius(f) < 1.0 - kStabilityMargin;
}

inline double norm2(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

/// Smallest of the min(rows, cols) singular values.
inline double min_singular_value(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  auto sv = Eigen::JacobiSVD<Matrix>(m).singularValues();
  return sv(sv.size() - 1);
}

/// Matrix exponential (Pade-13 scaling and squaring).
inline Matrix expm(const Matrix& a) {
  require_square(a, "expm");
  require_finite(a, "expm");
  if (a.size() == 0) return a;
  return a.exp();
}

struct VanLoanResult {
  Matrix Ad;
  Matrix Bd;
  Matrix Wd;
};

/// Joint exact discretization of dx = (Ax + Bu) dt + dw with a held input
/// and white noise of intensity Wint over a step of length h.
inline VanLoanResult van_loan(const Matrix& a, const Matrix& b,
                              const Matrix& wint, double h) {
  require_square(a, "van_loan A");
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  if (b.rows() != n) throw DimensionError("van_loan: B row count");
  require_shape(wint, n, n, "van_loan W");
  if (!(h > 0.0) || !std::isfinite(h))
    throw DomainError("van_loan: step must be positive");
  require_finite(a, "van_loan A");
  require_finite(b, "van_loan B");
  require_finite(wint, "van_loan W");

  // exp(-A^T t) appears inside the augmented exponential, so a fast stable A
  // over a long step overflows. Take a short substep and double up instead.
  const double scale = a.cwiseAbs().colwise().sum().maxCoeff() * h;
  int doublings = 0;
  if (scale > 1.0) doublings = static_cast<int>(std::ceil(std::log2(scale)));
  const double delta = std::ldexp(h, -doublings);

  Matrix mm = Matrix::Zero(2 * n + m, 2 * n + m);
  mm.block(0, 0, n, n) = a;
  mm.block(0, n, n, n) = wint;
  mm.block(0, 2 * n, n, m) = b;
  mm.block(n, n, n, n) = -a.transpose();
  Matrix e = (mm * delta).exp();

  VanLoanResult r;
  r.Ad = e.block(0, 0, n, n);
  r.Bd = e.block(0, 2 * n, n, m);
  r.Wd = symmetrize(e.block(0, n, n, n) * r.Ad.transpose());
  for (int s = 0; s < doublings; ++s) {
    r.Wd = symmetrize(r.Ad * r.Wd * r.Ad.transpose() + r.Wd);
    r.Bd = r.Ad * r.Bd + r.Bd;
    r.Ad = r.Ad * r.Ad;
  }
  return r;
}

/// Bartels-Stewart Lyapunov solver on a complex Schur form F = U T U^H.
/// The factorization is kept so the primal and adjoint equations of one
/// closed loop share it.
class SchurLyapunov {
 public:
  using CMatrix = Eigen::MatrixXcd;
  using CVector = Eigen::VectorXcd;

  explicit SchurLyapunov(const Matrix& f) : f_(f) {
    require_square(f, "lyapunov");
    if (!f.allFinite()) {
      finite_ = false;
      return;
    }
    if (f.size() == 0) return;
    Eigen::ComplexSchur<CMatrix> schur(f.cast<std::complex<double>>());
    t_ = schur.matrixT();
    u_ = schur.matrixU();
  }

  Eigen::Index size() const { return f_.rows(); }

  double abscissa() const {
    if (!finite_) return std::numeric_limits<double>::infinity();
    double v = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < t_.rows(); ++i) v = std::max(v, t_(i, i).real());
    return v;
  }

  double radius() const {
    if (!finite_) return std::numeric_limits<double>::infinity();
    double v = 0.0;
    for (Eigen::Index i = 0; i < t_.rows(); ++i) v = std::max(v, std::abs(t_(i, i)));
    return v;
  }

  bool hurwitz() const { return abscissa() < -kStabilityMargin; }
  bool schur_stable() const { return radius() < 1.0 - kStabilityMargin; }

  /// F X + X F^T + Q = 0
  Matrix continuous(const Matrix& q) const {
    check_rhs(q);
    if (!hurwitz())
      throw StabilityError("continuous Lyapunov: matrix is not Hurwitz (abscissa " +
                           std::to_string(abscissa()) + ")");
    const Eigen::Index k = size();
    CMatrix c = u_.adjoint() * q.cast<std::complex<double>>() * u_;
    CMatrix y(k, k);
    for (Eigen::Index j = k - 1; j >= 0; --j) {
      CVector rhs = -c.col(j);
      for (Eigen::Index l = j + 1; l < k; ++l) rhs -= y.col(l) * std::conj(t_(j, l));
      CMatrix lhs = t_;
      lhs.diagonal().array() += std::conj(t_(j, j));
      y.col(j) = lhs.triangularView<Eigen::Upper>().solve(rhs);
    }
    return back(y);
  }

  /// F^T Y + Y F + Q = 0
  Matrix continuous_adjoint(const Matrix& q) const {
    check_rhs(q);
    if (!hurwitz())
      throw StabilityError("continuous Lyapunov: matrix is not Hurwitz (abscissa " +
                           std::to_string(abscissa()) + ")");
    const Eigen::Index k = size();
    CMatrix c = u_.adjoint() * q.cast<std::complex<double>>() * u_;
    CMatrix th = t_.adjoint();
    CMatrix y(k, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      CVector rhs = -c.col(j);
      for (Eigen::Index l = 0; l < j; ++l) rhs -= y.col(l) * t_(l, j);
      CMatrix lhs = th;
      lhs.diagonal().array() += t_(j, j);
      y.col(j) = lhs.triangularView<Eigen::Lower>().solve(rhs);
    }
    return back(y);
  }

  /// F X F^T - X + Q = 0
  Matrix discrete(const Matrix& q) const {
    check_rhs(q);
    if (!schur_stable())
      throw StabilityError("discrete Lyapunov: spectral radius " +
                           std::to_string(radius()) + " is not below 1");
    const Eigen::Index k = size();
    CMatrix c = u_.adjoint() * q.cast<std::complex<double>>() * u_;
    CMatrix y(k, k);
    for (Eigen::Index j = k - 1; j >= 0; --j) {
      CVector acc = CVector::Zero(k);
      for (Eigen::Index l = j + 1; l < k; ++l) acc += std::conj(t_(j, l)) * y.col(l);
      CVector rhs = -c.col(j) - t_.triangularView<Eigen::Upper>() * acc;
      CMatrix lhs = std::conj(t_(j, j)) * t_;
      lhs.diagonal().array() -= 1.0;
      y.col(j) = lhs.triangularView<Eigen::Upper>().solve(rhs);
    }
    return back(y);
  }

  /// F^T Y F - Y + Q = 0
  Matrix discrete_adjoint(const Matrix& q) const {
    check_rhs(q);
    if (!schur_stable())
      throw StabilityError("discrete Lyapunov: spectral radius " +
                           std::to_string(radius()) + " is not below 1");
    const Eigen::Index k = size();
    CMatrix c = u_.adjoint() * q.cast<std::complex<double>>() * u_;
    CMatrix th = t_.adjoint();
    CMatrix y(k, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      CVector acc = CVector::Zero(k);
      for (Eigen::Index l = 0; l < j; ++l) acc += t_(l, j) * y.col(l);
      CVector rhs = -c.col(j) - th.triangularView<Eigen::Lower>() * acc;
      CMatrix lhs = t_(j, j) * th;
      lhs.diagonal().array() -= 1.0;
      y.col(j) = lhs.triangularView<Eigen::Lower>().solve(rhs);
    }
    return back(y);
  }

 private:
  void check_rhs(const Matrix& q) const {
    require_shape(q, size(), size(), "lyapunov rhs");
    require_finite(q, "lyapunov rhs");
  }

  Matrix back(const CMatrix& y) const {
    return symmetrize((u_ * y * u_.adjoint()).real());
  }

  Matrix f_;
  CMatrix t_;
  CMatrix u_;
  bool finite_ = true;
};

inline Matrix solve_lyapunov_continuous(const Matrix& f, const Matrix& q) {
  return SchurLyapunov(f).continuous(q);
}

inline Matrix solve_lyapunov_discrete(const Matrix& f, const Matrix& q) {
  return SchurLyapunov(f).discrete(q);
}

/// M^+ = M^T (M M^T)^{-1} for a full-row-rank M, computed through the SVD.
inline Matrix right_pinv(const Matrix& m) {
  if (m.rows() > m.cols())
    throw DimensionError("right_pinv: more rows than columns");
  require_finite(m, "right_pinv");
  if (m.size() == 0) return Matrix::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  if (!(s(s.size() - 1) > 1e-10 * s(0)))
    throw RankError("right_pinv: matrix is not of full row rank (sigma_min " +
                    std::to_string(s(s.size() - 1)) + ", sigma_max " +
                    std::to_string(s(0)) + ")");
  return svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
}

/// Uniform draw on {U : ||U||_F = radius}.
inline Matrix sample_frobenius_sphere(Eigen::Index rows, Eigen::Index cols,
                                      double radius, Rng& rng) {
  if (!(radius > 0.0)) throw DomainError("sphere radius must be positive");
  if (rows <= 0 || cols <= 0) throw DimensionError("sphere: empty shape");
  for (;;) {
    Matrix u = standard_normal_matrix(rows, cols, rng);
    const double nrm = u.norm();
    if (nrm > 0.0) return u * (radius / nrm);
  }
}

}  // namespace pi2dof
