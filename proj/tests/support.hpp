#pragma once

#include <functional>

#include "pi2dof/linmath.hpp"
#include "pi2dof/plant.hpp"

namespace pi2dof::test {

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

inline Matrix unvec(const Vector& v, Eigen::Index r) {
  return Eigen::Map<const Matrix>(v.data(), r, v.size() / r);
}

/// F X + X F^T + Q = 0 through (I (x) F + F (x) I) vec X = -vec Q.
inline Matrix kron_lyap_continuous(const Matrix& f, const Matrix& q) {
  const auto n = f.rows();
  const Matrix I = Matrix::Identity(n, n);
  const Matrix big = kron(I, f) + kron(f, I);
  return unvec(big.fullPivLu().solve(-vec(q)), n);
}

/// F X F^T - X + Q = 0 through (I - F (x) F) vec X = vec Q.
inline Matrix kron_lyap_discrete(const Matrix& f, const Matrix& q) {
  const auto n = f.rows();
  const Matrix big = Matrix::Identity(n * n, n * n) - kron(f, f);
  return unvec(big.fullPivLu().solve(vec(q)), n);
}

inline Matrix random_spd(Eigen::Index n, Rng& rng) {
  const Matrix g = standard_normal_matrix(n, n, rng);
  return g * g.transpose() + 0.5 * Matrix::Identity(n, n);
}

/// Random matrix shifted so its spectral abscissa is -shift.
inline Matrix random_hurwitz(Eigen::Index n, Rng& rng, double shift = 0.5) {
  Matrix a = standard_normal_matrix(n, n, rng);
  a -= (spectral_abscissa(a) + shift) * Matrix::Identity(n, n);
  return a;
}

inline Matrix random_schur(Eigen::Index n, Rng& rng, double radius = 0.9) {
  const Matrix a = standard_normal_matrix(n, n, rng);
  return a * (radius / spectral_radius(a));
}

/// Small noisy plant with a Hurwitz A, a Gaussian initial state and p = m.
inline LtiPlant small_plant(Eigen::Index n, Eigen::Index m, Rng& rng, double w = 0.1,
                            double v = 0.05) {
  LtiPlant pl;
  pl.A = random_hurwitz(n, rng, 0.3);
  pl.B = standard_normal_matrix(n, m, rng);
  pl.C = standard_normal_matrix(m, n, rng);
  pl.W = w * Matrix::Identity(n, n);
  pl.V = v * Matrix::Identity(m, m);
  pl.init = InitialStateDistribution::gaussian(standard_normal_vector(n, rng),
                                               0.3 * Matrix::Identity(n, n));
  return pl;
}

/// Passive plant (A + A^T < 0, C = B^T), whose DC gain B^T (-A)^{-1} B is
/// positive definite and well conditioned for integral action.
inline LtiPlant passive_plant(Eigen::Index n, Eigen::Index m, Rng& rng, double w = 0.1,
                              double v = 0.05) {
  LtiPlant pl = small_plant(n, m, rng, w, v);
  const Matrix j = standard_normal_matrix(n, n, rng), r = standard_normal_matrix(n, n, rng);
  pl.A = 0.5 * (j - j.transpose()) - r * r.transpose() / static_cast<double>(n) -
         0.3 * Matrix::Identity(n, n);
  pl.C = pl.B.transpose();
  return pl;
}

/// Central differences of f over the entries of K = [K_P, K_I].
inline Matrix fd_gradient(const std::function<double(const PiGain&)>& f, const PiGain& K,
                          double step = 1e-6) {
  const Matrix k = K.k();
  Matrix g(k.rows(), k.cols());
  for (Eigen::Index i = 0; i < k.rows(); ++i)
    for (Eigen::Index j = 0; j < k.cols(); ++j) {
      Matrix kp = k, km = k;
      kp(i, j) += step;
      km(i, j) -= step;
      g(i, j) = (f(PiGain::from_k(kp)) - f(PiGain::from_k(km))) / (2.0 * step);
    }
  return g;
}

/// Random gain around K_I = scale G0^{-1}, G0 = -C A^{-1} B the DC gain
/// (m = p), which places the slow integrator poles near -scale. The scale
/// halves every 100 rejected draws; a gain is accepted once the loop's
/// spectral abscissa is below -margin (default 0.15 scale).
inline PiGain stabilizing_gain(const LtiPlant& pl, Rng& rng, double scale = 0.3,
                               double margin = 0.0) {
  const Matrix I = Matrix::Identity(pl.p(), pl.p());
  const Matrix g0 = -pl.C * pl.A.inverse() * pl.B;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    if (attempt > 0 && attempt % 100 == 0) scale *= 0.5;
    const Matrix ki0 = scale * g0.inverse();
    PiGain K(scale * 0.5 * standard_normal_matrix(pl.m(), pl.p(), rng),
             ki0 + 0.2 * ki0.norm() * standard_normal_matrix(pl.m(), pl.p(), rng));
    const double need = margin > 0.0 ? margin : 0.15 * scale;
    if (spectral_abscissa(build_closed_loop(pl, K, I, I).AbarK) < -need) return K;
  }
  throw StabilityError("no stabilizing gain found");
}

}  // namespace pi2dof::test
