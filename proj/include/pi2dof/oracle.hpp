#pragma once

#include <cmath>
#include <utility>

#include "constraint.hpp"
#include "errors.hpp"
#include "linmath.hpp"
#include "plant.hpp"

namespace pi2dof {

struct CostGradient {
  double value = 0.0;
  Matrix grad;
  Matrix X;
  Matrix Y;
};

/// f(K) = tr(Q' X) + tr(Q1 V) with A_K X + X A_K^T + W_K = 0. Throws
/// StabilityError when K is not stabilizing.
inline double analytic_cost(const AugmentedClosedLoop& cl) {
  Matrix X = SchurLyapunov(cl.AbarK).continuous(cl.WtildeK);
  return (cl.Qprime * X).trace() + (cl.Q1 * cl.V).trace();
}

inline CostGradient analytic_gradient(const AugmentedClosedLoop& cl) {
  SchurLyapunov lyap(cl.AbarK);
  CostGradient out;
  out.X = lyap.continuous(cl.WtildeK);
  out.Y = lyap.continuous_adjoint(cl.Qprime);
  out.value = (cl.Qprime * out.X).trace() + (cl.Q1 * cl.V).trace();
  const Matrix BtY = cl.Bbar.transpose() * out.Y;
  out.grad = -2.0 * BtY * out.X * cl.Cbar.transpose();
  // The measurement noise enters through K_P only, so the correction lands
  // on the K_P columns.
  out.grad.leftCols(cl.p()) += 2.0 * BtY * cl.G * cl.V;
  return out;
}

struct Moments {
  Vector mean;
  Matrix cov;
};

/// Mean and covariance of (e_x, z) at time tau. `init_mean` / `init_cov` may
/// describe e_x(0) only (z(0) = 0 is then appended) or the full augmented state.
inline Moments finite_horizon_moments(const AugmentedClosedLoop& cl, const Vector& u0,
                                      const Vector& u_star, const Vector& init_mean,
                                      const Matrix& init_cov, double tau) {
  const auto q = cl.q(), n = cl.n();
  if (!(tau >= 0.0)) throw DomainError("tau must be nonnegative");
  Vector mu0 = Vector::Zero(q);
  Matrix s0 = Matrix::Zero(q, q);
  if (init_mean.size() == n && init_cov.rows() == n && init_cov.cols() == n) {
    mu0.head(n) = init_mean;
    s0.topLeftCorner(n, n) = init_cov;
  } else if (init_mean.size() == q && init_cov.rows() == q && init_cov.cols() == q) {
    mu0 = init_mean;
    s0 = init_cov;
  } else {
    throw DimensionError("initial moments must have size n or n+p");
  }
  const Vector du = u0 - u_star;
  if (tau == 0.0) return {mu0, symmetrize(s0)};

  Vector offset = Vector::Zero(q);
  if (du.norm() > 0.0) {
    Eigen::FullPivLU<Matrix> lu(cl.AbarK);
    if (!lu.isInvertible() ||
        min_singular_value(cl.AbarK) <= 1e-12 * std::max(1.0, norm2(cl.AbarK)))
      throw SingularityError("closed-loop matrix is singular with a nonzero feedforward offset");
    offset = lu.solve(cl.Bbar * du);
  }
  VanLoanResult vl = van_loan(cl.AbarK, cl.Bbar, cl.WtildeK, tau);
  Moments out;
  out.mean = vl.Ad * (mu0 + offset) - offset;
  out.cov = symmetrize(vl.Ad * s0 * vl.Ad.transpose() + vl.Wd);
  return out;
}

/// ||(proj(K - eta grad) - K) / eta||_F
inline double stationarity_measure(const PiGain& K, const Matrix& grad,
                                   const ConstraintBox& omega, double eta) {
  if (!(eta > 0.0)) throw DomainError("eta must be positive");
  if (grad.rows() != K.m() || grad.cols() != 2 * K.p())
    throw DimensionError("gradient shape must match K");
  const Matrix k = K.k();
  const PiGain next = project_onto_omega(PiGain::from_k(k - eta * grad), omega);
  return ((next.k() - k) / eta).norm();
}

/// Scalar plant used by the non-convexity example: A = 0.1, B = C = 1,
/// W = 0.5, V = 1, Q1 = Q2 = 1.
inline LtiPlant scalar_witness_plant() {
  LtiPlant p;
  p.A = Matrix::Constant(1, 1, 0.1);
  p.B = Matrix::Constant(1, 1, 1.0);
  p.C = Matrix::Constant(1, 1, 1.0);
  p.W = Matrix::Constant(1, 1, 0.5);
  p.V = Matrix::Constant(1, 1, 1.0);
  return p;
}

inline double scalar_witness_cost(double kp, double ki) {
  const LtiPlant p = scalar_witness_plant();
  const Matrix one = Matrix::Identity(1, 1);
  return analytic_cost(build_closed_loop(
      p, PiGain(Matrix::Constant(1, 1, kp), Matrix::Constant(1, 1, ki)), one, one));
}

/// The rational closed form printed alongside the scalar example.
inline double printed_witness_formula(double kp, double ki) {
  return (ki + 1.0) * (0.5 * ki + kp * kp * ki + 1.0) / (ki * (kp - 0.1)) +
         (kp - 0.1) / (2.0 * ki) + kp;
}

struct WitnessValues {
  double f1 = 0.0;
  double f2 = 0.0;
  double fmid = 0.0;
};

inline WitnessValues nonconvexity_witness(double kp1 = 1.0, double ki1 = 4.0,
                                          double kp2 = 4.0, double ki2 = 1.6) {
  return {scalar_witness_cost(kp1, ki1), scalar_witness_cost(kp2, ki2),
          scalar_witness_cost(0.5 * (kp1 + kp2), 0.5 * (ki1 + ki2))};
}

}  // namespace pi2dof
