#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "linmath.hpp"
#include "plant.hpp"
#include "random.hpp"

namespace pi2dof {

/// P-control experiment u = K_P' e + u0 on a known plant (the simulated
/// environment). Error coordinates are used internally; the law of e(t) does
/// not depend on which equilibrium pair is used.
class PControlExperiment {
 public:
  PControlExperiment(const LtiPlant& plant, const Matrix& kp_probe, const Vector& y_star,
                     double h_sim)
      : plant_(plant), kp_(kp_probe), eq_(compute_equilibrium(plant, y_star)), h_sim_(h_sim) {
    require_shape(kp_probe, plant.m(), plant.p(), "K_P'");
    ak_ = plant.A - plant.B * kp_probe * plant.C;
    if (!is_hurwitz(ak_))
      throw StabilityError("probe gain does not stabilize the plant (abscissa " +
                           std::to_string(spectral_abscissa(ak_)) + ")");
    const Matrix bk = plant.B * kp_probe;
    wn_ = symmetrize(plant.W + bk * plant.V * bk.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(plant.V));
    v_sqrt_ = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }

  const Matrix& closed_loop_matrix() const { return ak_; }
  const Equilibrium& equilibrium() const { return eq_; }

  /// Runs to `horizon` and returns e(horizon). `visit(t, e)` sees the measured
  /// error on every grid point when given.
  template <class Visit>
  Vector run(const Vector& u0, double horizon, Rng& rng, Visit&& visit) const {
    const long steps = grid_steps(horizon, h_sim_);
    const double h = steps > 0 ? horizon / static_cast<double>(steps) : h_sim_;
    ExactStepper stepper(ak_, plant_.B, wn_, h);
    Vector ex = plant_.init.sample(plant_.n(), rng) - eq_.x_star;
    const Vector drift = stepper.gamma() * (u0 - eq_.u_star);
    visit(0.0, measure(ex, rng));
    for (long k = 1; k <= steps; ++k) {
      stepper.step(ex, drift, rng);
      const double t = static_cast<double>(k) * h;
      require_finite_state(ex, t);
      if (k < steps) visit(t, measure(ex, rng));
    }
    Vector e = measure(ex, rng);
    visit(horizon, e);
    return e;
  }

  Vector run(const Vector& u0, double horizon, Rng& rng) const {
    const long steps = grid_steps(horizon, h_sim_);
    const double h = steps > 0 ? horizon / static_cast<double>(steps) : h_sim_;
    ExactStepper stepper(ak_, plant_.B, wn_, h);
    Vector ex = plant_.init.sample(plant_.n(), rng) - eq_.x_star;
    const Vector drift = stepper.gamma() * (u0 - eq_.u_star);
    for (long k = 1; k <= steps; ++k) {
      stepper.step(ex, drift, rng);
      require_finite_state(ex, static_cast<double>(k) * h);
    }
    return measure(ex, rng);
  }

 private:
  Vector measure(const Vector& ex, Rng& rng) const {
    return -plant_.C * ex + v_sqrt_ * standard_normal_vector(plant_.p(), rng);
  }

  const LtiPlant& plant_;
  Matrix kp_;
  Equilibrium eq_;
  double h_sim_;
  Matrix ak_, wn_, v_sqrt_;
};

struct FeedforwardEstimate {
  Vector u_hat;
  Matrix E;
  Vector e0_tau;
  Matrix e_probe;  // columns e^i(tau_u), i = 1..m
  double tau_u = 0.0;
  Matrix Kp_probe;
  double min_sv_E = 0.0;
};

/// m + 1 experiments: u = K_P' e, then u = K_P' e + e_i for each basis vector.
/// Experiment i draws from child_seed(seed, {i}).
inline FeedforwardEstimate estimate_feedforward(const LtiPlant& plant, const Matrix& kp_probe,
                                                const Vector& y_star, double tau_u,
                                                double h_sim, std::uint64_t seed) {
  if (!(tau_u > 0.0)) throw DomainError("tau_u must be positive");
  plant.validate();
  PControlExperiment ex(plant, kp_probe, y_star, h_sim);
  const auto m = plant.m(), p = plant.p();

  FeedforwardEstimate out;
  out.tau_u = tau_u;
  out.Kp_probe = kp_probe;
  Rng rng0 = make_rng(child_seed(seed, {0}));
  out.e0_tau = ex.run(Vector::Zero(m), tau_u, rng0);
  out.e_probe.resize(p, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    Rng rng = make_rng(child_seed(seed, {static_cast<std::uint64_t>(i + 1)}));
    out.e_probe.col(i) = ex.run(Vector::Unit(m, i), tau_u, rng);
  }
  out.E = out.e_probe.colwise() - out.e0_tau;
  out.min_sv_E = min_singular_value(out.E);
  out.u_hat = -right_pinv(out.E) * out.e0_tau;
  return out;
}

struct FeedforwardBounds {
  Matrix Z;
  Matrix Sigma;
  double normZ = 0.0;
  double lambda_min_Z = 0.0;
  double tau_lower = 0.0;
  double M1 = 0.0, M2 = 0.0, M3 = 0.0, M4 = 0.0;
  double Sbar = 0.0;
  double S_val = 0.0;   // S(delta_u / 2), as it enters Sbar
  double Sm_val = 0.0;  // S_m(delta_u / 2)
  double sigma_p_Estar = 0.0;
  double trace_CSC = 0.0;
  double eps_u = 0.0, delta_u = 0.0, subgauss_norm = 1.0, abs_const_c = 1.0;
  bool noise_free = false;
  bool precondition_holds = false;
  bool applicable = true;  // false when a log argument in the horizon bound is <= 1
};

/// Right side of the horizon bound for a given ||Z||_2 and the M constants.
inline double horizon_bound(double normZ, double M1, double M2, double M3, double eps_u) {
  const double a = std::max(M1 / eps_u, M3);
  double t = 2.0 * normZ * std::log(a);
  if (M2 > 0.0) t = std::max(t, normZ * std::log(M2));
  return t;
}

inline FeedforwardBounds feedforward_bounds(const LtiPlant& plant, const Matrix& kp_probe,
                                      const Vector& y_star, const Vector& u_star,
                                      const Matrix& Sigma0, double Dx, double eps_u,
                                      double delta_u, double subgauss_norm = 1.0,
                                      double abs_const_c = 1.0) {
  if (!(eps_u > 0.0)) throw DomainError("eps_u must be positive");
  if (!(delta_u > 0.0 && delta_u < 1.0)) throw DomainError("delta_u must lie in (0, 1)");
  if (!(subgauss_norm > 0.0) || !(abs_const_c > 0.0))
    throw DomainError("sub-Gaussian norm and c must be positive");
  const auto m = static_cast<double>(plant.m()), p = static_cast<double>(plant.p());
  const Matrix ak = plant.A - plant.B * kp_probe * plant.C;
  SchurLyapunov lyap(ak);
  FeedforwardBounds b;
  b.eps_u = eps_u;
  b.delta_u = delta_u;
  b.subgauss_norm = subgauss_norm;
  b.abs_const_c = abs_const_c;
  b.Z = lyap.continuous_adjoint(Matrix::Identity(ak.rows(), ak.cols()));
  const Matrix bk = plant.B * kp_probe;
  b.Sigma = lyap.continuous(symmetrize(plant.W + bk * plant.V * bk.transpose()));

  Eigen::SelfAdjointEigenSolver<Matrix> ez(b.Z);
  b.normZ = ez.eigenvalues().maxCoeff();
  b.lambda_min_Z = ez.eigenvalues().minCoeff();
  const double kz = b.normZ / b.lambda_min_Z;

  const Matrix ak_inv = ak.inverse();
  const double nAinv = norm2(ak_inv), nB = norm2(plant.B), nC = norm2(plant.C);
  const Matrix estar = plant.C * ak_inv * plant.B;
  b.sigma_p_Estar = min_singular_value(estar);
  const double sp = b.sigma_p_Estar;
  const double us = u_star.norm(), ys = y_star.norm();
  const Matrix csc = plant.C * b.Sigma * plant.C.transpose();
  b.trace_CSC = csc.trace();
  const double fro_csc = csc.norm();
  const double s0_tr = Sigma0.trace(), s0_fro = Sigma0.norm();
  const double tiny = 1e-300;
  b.noise_free = fro_csc <= tiny;

  b.M1 = kz * std::max(2.0 * nC * (Dx + nAinv * nB * us) / sp,
                       8.0 * std::sqrt(2.0 * m * p) * nC * nC * nAinv * nAinv * nB * nB * us / sp);
  if (b.noise_free) {
    // Without noise the M2 term drops out when the initial state is also
    // deterministic; otherwise its ratios are unbounded.
    b.M2 = (s0_fro <= tiny) ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    b.M2 = kz * kz * nC * nC * std::max(s0_tr / b.trace_CSC, s0_fro / fro_csc);
  }
  b.M3 = kz * nC *
         std::max(2.0 * std::sqrt(2.0 * m * p) * nC * nAinv * nAinv * nB * nB,
                  ys > 0.0 ? (Dx + nAinv * nB * us) / ys
                           : std::numeric_limits<double>::infinity());
  b.tau_lower = horizon_bound(b.normZ, b.M1, b.M2, b.M3, eps_u);
  b.applicable = std::isfinite(b.tau_lower) && b.tau_lower > 0.0 &&
                 std::max(b.M1 / eps_u, b.M3) > 1.0;

  const double g2 = subgauss_norm * subgauss_norm, c = abs_const_c;
  const double lg = std::log(2.0 / (delta_u / 2.0));
  b.S_val = std::sqrt(2.0 * b.trace_CSC +
                      9.0 * (std::sqrt(2.0 * c) + 2.0) * g2 * fro_csc / (c * c) * lg);
  b.Sm_val = std::sqrt(2.0 * m * b.trace_CSC +
                       9.0 * (std::sqrt(2.0 * m * c) + 2.0) * g2 * fro_csc / (c * c) * lg);
  const double gain = nC * nAinv * nB;
  b.Sbar = (4.0 * std::sqrt(2.0) * gain * ys * b.Sm_val +
            2.0 * (1.0 + std::sqrt(2.0) * gain * b.Sm_val) * b.S_val) /
           sp;
  if (b.noise_free) {
    b.M4 = 0.0;
  } else {
    const double den = 9.0 * (std::sqrt(2.0 * m * c) + 2.0) * g2 * fro_csc;
    b.M4 = 2.0 * std::exp(-c * c * (sp * sp / 16.0 - 2.0 * m * b.trace_CSC) / den);
    b.M4 = std::clamp(b.M4, 0.0, 2.0);
  }
  b.precondition_holds = sp >= 4.0 * std::sqrt(2.0 * m * b.trace_CSC);
  return b;
}

/// Estimates ||Z||_2 from one baseline experiment: fits
/// log ||y(t) - y(tau_large)|| ~ a - t / (2 ||Z||_2) over [tau/4, 3 tau/4],
/// using only points above the noise floor seen in the last quarter.
inline double estimate_decay_constant(const LtiPlant& plant, const Matrix& kp_probe,
                                      const Vector& y_star, double tau_large, double h_sim,
                                      std::uint64_t seed) {
  if (!(tau_large > 0.0)) throw DomainError("tau_large must be positive");
  PControlExperiment ex(plant, kp_probe, y_star, h_sim);
  std::vector<double> ts;
  std::vector<Vector> es;
  Rng rng = make_rng(seed);
  const Vector e_end = ex.run(Vector::Zero(plant.m()), tau_large, rng,
                              [&](double t, const Vector& e) {
                                ts.push_back(t);
                                es.push_back(e);
                              });
  // y(t) - y(tau) = e(tau) - e(t)
  std::vector<double> d(ts.size());
  for (std::size_t k = 0; k < ts.size(); ++k) d[k] = (es[k] - e_end).norm();

  Vector tail_mean = Vector::Zero(plant.p());
  std::size_t tail_n = 0;
  for (std::size_t k = 0; k < ts.size(); ++k)
    if (ts[k] >= 0.75 * tau_large) {
      tail_mean += es[k];
      ++tail_n;
    }
  double floor = 0.0;
  if (tail_n > 1) {
    tail_mean /= static_cast<double>(tail_n);
    double ss = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k)
      if (ts[k] >= 0.75 * tau_large) ss += (es[k] - tail_mean).squaredNorm();
    floor = 3.0 * std::sqrt(ss / static_cast<double>(tail_n - 1));
  }
  const double dmax = *std::max_element(d.begin(), d.end());
  floor = std::max(floor, 1e-12 * dmax);

  double st = 0, sy = 0, stt = 0, sty = 0;
  int cnt = 0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (ts[k] < 0.25 * tau_large || ts[k] > 0.75 * tau_large) continue;
    if (!(d[k] > floor)) continue;
    const double y = std::log(d[k]);
    st += ts[k];
    sy += y;
    stt += ts[k] * ts[k];
    sty += ts[k] * y;
    ++cnt;
  }
  if (cnt < 8)
    throw EstimationError("decay signal is below the noise floor over the fit window");
  const double nn = cnt;
  const double slope = (nn * sty - st * sy) / (nn * stt - st * st);
  if (!(slope < 0.0)) throw EstimationError("fitted decay slope is not negative");
  return -1.0 / (2.0 * slope);
}

}  // namespace pi2dof
