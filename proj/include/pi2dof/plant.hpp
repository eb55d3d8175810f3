#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "errors.hpp"
#include "linmath.hpp"
#include "random.hpp"

namespace pi2dof {

/// Distribution of x(0). The box form draws each coordinate independently
/// from U(lo, hi).
struct InitialStateDistribution {
  enum class Kind { UniformBox, Gaussian, Point };

  Kind kind = Kind::UniformBox;
  double lo = -3.0;
  double hi = 3.0;
  Vector mean_vec;  // Gaussian mean or point location
  Matrix cov_mat;   // Gaussian covariance

  static InitialStateDistribution uniform_box(double lo, double hi) {
    if (!(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi))
      throw DomainError("uniform box needs finite lo <= hi");
    InitialStateDistribution d;
    d.kind = Kind::UniformBox;
    d.lo = lo;
    d.hi = hi;
    return d;
  }

  static InitialStateDistribution gaussian(Vector mean, Matrix cov) {
    InitialStateDistribution d;
    d.kind = Kind::Gaussian;
    d.mean_vec = std::move(mean);
    d.cov_mat = symmetrize(cov);
    return d;
  }

  static InitialStateDistribution point(Vector x0) {
    InitialStateDistribution d;
    d.kind = Kind::Point;
    d.mean_vec = std::move(x0);
    return d;
  }

  Vector mean(Eigen::Index n) const {
    if (kind == Kind::UniformBox) return Vector::Constant(n, 0.5 * (lo + hi));
    return mean_vec;
  }

  Matrix cov(Eigen::Index n) const {
    switch (kind) {
      case Kind::UniformBox:
        return Matrix::Identity(n, n) * ((hi - lo) * (hi - lo) / 12.0);
      case Kind::Gaussian:
        return cov_mat;
      case Kind::Point:
        return Matrix::Zero(n, n);
    }
    return Matrix::Zero(n, n);
  }

  void validate(Eigen::Index n) const {
    if (kind == Kind::Gaussian) {
      if (mean_vec.size() != n) throw DimensionError("init mean length");
      require_shape(cov_mat, n, n, "init covariance");
      require_finite(cov_mat, "init covariance");
      Eigen::SelfAdjointEigenSolver<Matrix> es(cov_mat);
      if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, cov_mat.norm()))
        throw DomainError("init covariance is not PSD");
    } else if (kind == Kind::Point) {
      if (mean_vec.size() != n) throw DimensionError("init point length");
    }
    if (kind != Kind::UniformBox && !mean_vec.allFinite())
      throw DomainError("init mean is not finite");
  }

  Vector sample(Eigen::Index n, Rng& rng) const {
    switch (kind) {
      case Kind::UniformBox: {
        std::uniform_real_distribution<double> u(lo, hi);
        Vector x(n);
        for (Eigen::Index i = 0; i < n; ++i) x[i] = (lo == hi) ? lo : u(rng);
        return x;
      }
      case Kind::Gaussian: {
        Eigen::SelfAdjointEigenSolver<Matrix> es(cov_mat);
        Matrix l = es.eigenvectors() *
                   es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
        return mean_vec + l * standard_normal_vector(n, rng);
      }
      case Kind::Point:
        return mean_vec;
    }
    return Vector::Zero(n);
  }
};

struct LtiPlant {
  Matrix A, B, C, W, V;
  InitialStateDistribution init;
  std::optional<std::uint64_t> seed;

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
  Eigen::Index p() const { return C.rows(); }

  /// Checks dimensions, noise matrices and the full-row-rank condition on
  /// [[A, B], [C, 0]]. V is only required to be PSD so that noise-free
  /// plants can be expressed.
  void validate() const {
    require_square(A, "A");
    const auto nn = n();
    if (B.rows() != nn) throw DimensionError("B must have n rows");
    if (C.cols() != nn) throw DimensionError("C must have n columns");
    if (p() > m()) throw DimensionError("need p <= m");
    if (p() < 1 || m() < 1 || nn < 1) throw DimensionError("empty dimension");
    require_shape(W, nn, nn, "W");
    require_shape(V, p(), p(), "V");
    for (const Matrix* mat : {&A, &B, &C, &W, &V}) require_finite(*mat, "plant");
    check_psd(W, "W");
    check_psd(V, "V");
    init.validate(nn);
    if (!assumption_rank_ok())
      throw RankError("[[A, B], [C, 0]] is not of full row rank");
  }

  Matrix equilibrium_matrix() const {
    Matrix M = Matrix::Zero(n() + p(), n() + m());
    M.topLeftCorner(n(), n()) = A;
    M.topRightCorner(n(), m()) = B;
    M.bottomLeftCorner(p(), n()) = C;
    return M;
  }

  bool assumption_rank_ok() const {
    Eigen::JacobiSVD<Matrix> svd(equilibrium_matrix());
    const Vector& s = svd.singularValues();
    return s(s.size() - 1) > 1e-10 * s(0);
  }

 private:
  static void check_psd(const Matrix& m, const char* what) {
    if ((m - m.transpose()).norm() > 1e-12 * std::max(1.0, m.norm()))
      throw DomainError(std::string(what) + " is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
    if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, m.norm()))
      throw DomainError(std::string(what) + " is not PSD");
  }
};

struct PiGain {
  Matrix kp;
  Matrix ki;

  PiGain() = default;
  PiGain(Matrix p, Matrix i) : kp(std::move(p)), ki(std::move(i)) {
    if (kp.rows() != ki.rows() || kp.cols() != ki.cols())
      throw DimensionError("K_P and K_I shapes differ");
  }

  static PiGain from_k(const Matrix& k) {
    if (k.cols() % 2 != 0) throw DimensionError("K must have 2p columns");
    const auto p = k.cols() / 2;
    return PiGain(k.leftCols(p), k.rightCols(p));
  }

  static PiGain zero(Eigen::Index m, Eigen::Index p) {
    return PiGain(Matrix::Zero(m, p), Matrix::Zero(m, p));
  }

  Matrix k() const {
    Matrix out(kp.rows(), 2 * kp.cols());
    out << kp, ki;
    return out;
  }

  Eigen::Index m() const { return kp.rows(); }
  Eigen::Index p() const { return kp.cols(); }
};

struct Equilibrium {
  Vector x_star;
  Vector u_star;
  Vector y_star;
};

/// Minimum-norm (x*, u*) with A x* + B u* = 0 and C x* = y*.
inline Equilibrium compute_equilibrium(const LtiPlant& plant, const Vector& y_star) {
  if (y_star.size() != plant.p()) throw DimensionError("y* length must equal p");
  Vector rhs = Vector::Zero(plant.n() + plant.p());
  rhs.tail(plant.p()) = y_star;
  Vector sol = right_pinv(plant.equilibrium_matrix()) * rhs;
  return {sol.head(plant.n()), sol.tail(plant.m()), y_star};
}

struct AugmentedClosedLoop {
  Matrix Abar, Bbar, Cbar;
  Matrix AbarK;
  Matrix WtildeK;
  Matrix Qprime;
  Matrix Q1, Q2;
  Matrix V;
  Matrix G;  // noise gain (B K_P; I) applied to v
  PiGain K;

  Eigen::Index n() const { return Abar.rows() - Q1.rows(); }
  Eigen::Index p() const { return Q1.rows(); }
  Eigen::Index q() const { return Abar.rows(); }
};

inline AugmentedClosedLoop build_closed_loop(const LtiPlant& plant, const PiGain& K,
                                             const Matrix& Q1, const Matrix& Q2) {
  const auto n = plant.n(), m = plant.m(), p = plant.p();
  require_shape(K.kp, m, p, "K_P");
  require_shape(K.ki, m, p, "K_I");
  require_shape(Q1, p, p, "Q1");
  require_shape(Q2, p, p, "Q2");
  require_finite(K.kp, "K_P");
  require_finite(K.ki, "K_I");

  AugmentedClosedLoop cl;
  cl.Abar = Matrix::Zero(n + p, n + p);
  cl.Abar.topLeftCorner(n, n) = plant.A;
  cl.Abar.bottomLeftCorner(p, n) = -plant.C;
  cl.Bbar = Matrix::Zero(n + p, m);
  cl.Bbar.topRows(n) = plant.B;
  cl.Cbar = Matrix::Zero(2 * p, n + p);
  cl.Cbar.topLeftCorner(p, n) = plant.C;
  cl.Cbar.bottomRightCorner(p, p) = -Matrix::Identity(p, p);
  cl.AbarK = cl.Abar - cl.Bbar * K.k() * cl.Cbar;

  cl.G = Matrix::Zero(n + p, p);
  cl.G.topRows(n) = plant.B * K.kp;
  cl.G.bottomRows(p) = Matrix::Identity(p, p);
  cl.WtildeK = Matrix::Zero(n + p, n + p);
  cl.WtildeK.topLeftCorner(n, n) = plant.W;
  cl.WtildeK = symmetrize(cl.WtildeK + cl.G * plant.V * cl.G.transpose());

  cl.Qprime = Matrix::Zero(n + p, n + p);
  cl.Qprime.topLeftCorner(n, n) = plant.C.transpose() * Q1 * plant.C;
  cl.Qprime.bottomRightCorner(p, p) = Q2;
  cl.Qprime = symmetrize(cl.Qprime);
  cl.Q1 = Q1;
  cl.Q2 = Q2;
  cl.V = plant.V;
  cl.K = K;
  return cl;
}

inline bool is_stabilizing(const AugmentedClosedLoop& cl) { return is_hurwitz(cl.AbarK); }

/// Exact one-step propagation x <- Phi x + Gamma du + xi, xi ~ N(0, Xi), for
/// dx = (F x + G du) dt + dw with dw of intensity Wint.
class ExactStepper {
 public:
  ExactStepper(const Matrix& f, const Matrix& g, const Matrix& wint, double h) : h_(h) {
    VanLoanResult vl = van_loan(f, g, wint, h);
    phi_ = std::move(vl.Ad);
    gamma_ = std::move(vl.Bd);
    Eigen::SelfAdjointEigenSolver<Matrix> es(vl.Wd);
    Vector ev = es.eigenvalues().cwiseMax(0.0);
    noisy_ = ev.maxCoeff() > 0.0;
    sqrt_ = es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
  }

  double h() const { return h_; }
  const Matrix& phi() const { return phi_; }
  const Matrix& gamma() const { return gamma_; }

  /// Input contribution Gamma du is passed precomputed, since it is constant
  /// within a run.
  void step(Vector& x, const Vector& drift, Rng& rng) const {
    thread_local Vector next, xi;
    next.noalias() = phi_ * x;
    next += drift;
    if (noisy_) {
      fill_standard_normal(xi, x.size(), rng);
      next.noalias() += sqrt_ * xi;
    }
    x.swap(next);
  }

 private:
  double h_;
  Matrix phi_, gamma_, sqrt_;
  bool noisy_ = false;
};

/// Number of grid steps used to cover [0, horizon] with steps close to h.
inline long grid_steps(double horizon, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("step must be positive");
  if (!(horizon >= 0.0) || !std::isfinite(horizon))
    throw DomainError("horizon must be nonnegative");
  if (horizon == 0.0) return 0;
  const double r = horizon / h;
  long k = static_cast<long>(std::llround(r));
  if (std::abs(r - static_cast<double>(k)) > 1e-9 * std::max(1.0, r))
    k = static_cast<long>(std::ceil(r));
  return std::max(1L, k);
}

struct RolloutSample {
  Vector e_tau;
  Vector z_tau;
  double cost_sample = 0.0;
  Vector state;  // (e_x(tau), z(tau)) before the measurement draw
};

inline void require_finite_state(const Vector& s, double t) {
  if (!s.allFinite())
    throw DivergenceError("simulated state is not finite at t = " + std::to_string(t), t);
}

/// Exact sampled simulator of the augmented PI loop in error coordinates.
class AugmentedSimulator {
 public:
  AugmentedSimulator(const AugmentedClosedLoop& cl, double h)
      : cl_(cl), stepper_(cl.AbarK, cl.Bbar, cl.WtildeK, h) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(cl.V));
    v_sqrt_ = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    v_noisy_ = es.eigenvalues().maxCoeff() > 0.0;
  }

  const AugmentedClosedLoop& closed_loop() const { return cl_; }
  const ExactStepper& stepper() const { return stepper_; }

  Vector initial_state(const InitialStateDistribution& init, const Vector& x_star,
                       Rng& rng) const {
    Vector s = Vector::Zero(cl_.q());
    s.head(cl_.n()) = init.sample(cl_.n(), rng) - x_star;
    return s;
  }

  Vector measure_error(const Vector& s, Rng& rng) const {
    const auto n = cl_.n(), p = cl_.p();
    Vector e = -cl_.Cbar.topLeftCorner(p, n) * s.head(n);
    if (v_noisy_) e += v_sqrt_ * standard_normal_vector(p, rng);
    return e;
  }

  double stage_cost(const Vector& e, const Vector& z) const {
    return e.dot(cl_.Q1 * e) + z.dot(cl_.Q2 * z);
  }

  /// Runs [0, horizon]; `visit(k, t, state)` sees every grid point if given.
  RolloutSample run(const InitialStateDistribution& init, const Vector& x_star,
                    const Vector& du, double horizon, Rng& rng,
                    const std::function<void(long, double, const Vector&)>& visit = {}) const {
    const long steps = grid_steps(horizon, stepper_.h());
    const double h = steps > 0 ? horizon / static_cast<double>(steps) : 0.0;
    if (steps > 0 && std::abs(h - stepper_.h()) > 1e-12 * stepper_.h())
      return AugmentedSimulator(cl_, h).run(init, x_star, du, horizon, rng, visit);
    Vector s = initial_state(init, x_star, rng);
    const Vector drift = stepper_.gamma() * du;
    if (visit) visit(0, 0.0, s);
    for (long k = 1; k <= steps; ++k) {
      stepper_.step(s, drift, rng);
      const double t = static_cast<double>(k) * h;
      require_finite_state(s, t);
      if (visit) visit(k, t, s);
    }
    RolloutSample out;
    out.state = s;
    out.z_tau = s.tail(cl_.p());
    out.e_tau = measure_error(s, rng);
    out.cost_sample = stage_cost(out.e_tau, out.z_tau);
    return out;
  }

 private:
  AugmentedClosedLoop cl_;
  ExactStepper stepper_;
  Matrix v_sqrt_;
  bool v_noisy_ = false;
};

/// One rollout of the PI loop: e_x(0) = x(0) - x*, z(0) = 0, constant input
/// offset u0 - u*, cost sample at the horizon.
inline RolloutSample simulate_closed_loop(const AugmentedClosedLoop& cl,
                                          const LtiPlant& plant,
                                          const Equilibrium& eq, const Vector& u0,
                                          double horizon, double h_sim, Rng& rng) {
  if (u0.size() != plant.m()) throw DimensionError("u0 length must equal m");
  const long steps = grid_steps(horizon, h_sim);
  AugmentedSimulator sim(cl, steps > 0 ? horizon / static_cast<double>(steps) : h_sim);
  return sim.run(plant.init, eq.x_star, u0 - eq.u_star, horizon, rng);
}

/// Random plant of the experiment family: A = J - R with J skew and R = Rb Rb^T,
/// B = 3 randn, C = B^T (first p rows), W = 1e-2 I, V = 5e-4 I.
inline LtiPlant generate_random_plant(Eigen::Index n, Eigen::Index m, Eigen::Index p,
                                      Rng& rng) {
  if (!(p >= 1 && p <= m && m <= n))
    throw DimensionError("need 1 <= p <= m <= n");
  for (int attempt = 0; attempt < 100; ++attempt) {
    Matrix jb = standard_normal_matrix(n, n, rng);
    Matrix rb = 2.0 * standard_normal_matrix(n, n, rng);
    Matrix b = 3.0 * standard_normal_matrix(n, m, rng);
    LtiPlant plant;
    plant.A = 0.5 * (jb - jb.transpose()) - rb * rb.transpose();
    plant.B = b;
    plant.C = b.transpose().topRows(p);
    plant.W = 1e-2 * Matrix::Identity(n, n);
    plant.V = 5e-4 * Matrix::Identity(p, p);
    plant.init = InitialStateDistribution::uniform_box(-3.0, 3.0);
    if (plant.assumption_rank_ok()) return plant;
  }
  throw RankError("random plant generation failed the rank check 100 times");
}

}  // namespace pi2dof
