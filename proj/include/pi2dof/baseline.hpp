#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "constraint.hpp"
#include "errors.hpp"
#include "linmath.hpp"
#include "oracle.hpp"
#include "plant.hpp"
#include "tuner.hpp"

namespace pi2dof {

struct DiscretePlant {
  Matrix Ad, Bd, C, Wd, V;
  double h = 0.01;

  Eigen::Index n() const { return Ad.rows(); }
  Eigen::Index m() const { return Bd.cols(); }
  Eigen::Index p() const { return C.rows(); }
};

inline DiscretePlant discretize_zoh(const LtiPlant& plant, double h) {
  const VanLoanResult vl = van_loan(plant.A, plant.B, plant.W, h);
  return {vl.Ad, vl.Bd, plant.C, vl.Wd, plant.V, h};
}

struct IdentifiedModel {
  Matrix A, B, C, W, V;
  double h = 0.01;
  std::vector<double> hankel_sv;
  std::vector<Matrix> markov;  // estimated C A^k B, k = 0..L-1
  bool stable = true;          // spectral radius of A below 1

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
  Eigen::Index p() const { return C.rows(); }

  DiscretePlant as_discrete() const { return {A, B, C, W, V, h}; }
};

/// A sampled-data plant seen only through its inputs and outputs: y_k is
/// read, then u_k is held over [kh, (k+1)h). reset() restarts the same
/// realization (same initial state and noise) so data can be replayed.
class SampledSystem {
 public:
  virtual ~SampledSystem() = default;
  virtual Eigen::Index input_dim() const = 0;
  virtual Eigen::Index output_dim() const = 0;
  virtual double step_length() const = 0;
  virtual void reset() = 0;
  virtual Vector output() = 0;
  virtual void apply(const Vector& u) = 0;
};

/// ZOH sampling of a continuous plant with exact noise increments.
class SampledPlant : public SampledSystem {
 public:
  SampledPlant(const LtiPlant& plant, double h, std::uint64_t seed)
      : plant_(plant), stepper_(plant.A, plant.B, plant.W, h), seed_(seed) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(plant.V));
    v_sqrt_ = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    reset();
  }

  Eigen::Index input_dim() const override { return plant_.m(); }
  Eigen::Index output_dim() const override { return plant_.p(); }
  double step_length() const override { return stepper_.h(); }

  void reset() override {
    rng_ = make_rng(seed_);
    x_ = plant_.init.sample(plant_.n(), rng_);
    k_ = 0;
  }

  Vector output() override {
    fill_standard_normal(noise_, plant_.p(), rng_);
    Vector y = plant_.C * x_;
    y.noalias() += v_sqrt_ * noise_;
    return y;
  }

  void apply(const Vector& u) override {
    drift_.noalias() = stepper_.gamma() * u;
    stepper_.step(x_, drift_, rng_);
    ++k_;
    require_finite_state(x_, static_cast<double>(k_) * stepper_.h());
  }

 private:
  LtiPlant plant_;
  ExactStepper stepper_;
  std::uint64_t seed_;
  Matrix v_sqrt_;
  Rng rng_;
  Vector x_, noise_, drift_;
  long k_ = 0;
};

struct HoKalmanConfig {
  long N_id = 10000;
  double input_std = 1.0;
  int order = 0;  // 0 selects the order from the largest singular-value gap
  int lags = 50;  // FIR length L; the Hankel matrix is (L/2) x (L/2) blocks
  long residual_samples = 200000;
  std::uint64_t seed = 0;
};

namespace detail {

/// Exact least-squares FIR fit y_k ~ sum_{a=1}^{L} G_a u_{k-a}, k = L..N-1,
/// accumulated in one pass. The regressor Gram matrix is assembled from lag
/// sums plus edge corrections instead of N outer products of size mL. Samples
/// are buffered in blocks so the sums are matrix products over overlapping
/// windows of one chronological input buffer.
struct FirAccumulator {
  static constexpr Eigen::Index kBlock = 512;
  using Window = Eigen::Map<const Matrix, 0, Eigen::OuterStride<>>;

  Eigen::Index m, p;
  int L;
  long N = 0;
  Matrix ubuf;     // columns u_{k0-L}, ..., u_{k0+kBlock-1}; zeros before t = 0
  Matrix ybuf;     // columns y_{k0}, ...
  Eigen::Index filled = 0;
  Matrix lag_acc;  // block b: sum_t u_t u_{t-(L-1-b)}^T
  Matrix cross;    // block b: sum_{k>=L} y_k u_{k-(L-b)}^T
  std::vector<Vector> head;

  FirAccumulator(Eigen::Index m_, Eigen::Index p_, int L_)
      : m(m_), p(p_), L(L_), ubuf(Matrix::Zero(m_, L_ + kBlock)), ybuf(p_, kBlock),
        lag_acc(Matrix::Zero(m_, m_ * L_)), cross(Matrix::Zero(p_, m_ * L_)) {}

  /// Call with y_k first, then the input u_k applied after it.
  void add(const Vector& y, const Vector& u) {
    ubuf.col(L + filled) = u;
    ybuf.col(filled) = y;
    if (N < L) head.push_back(u);
    ++N;
    if (++filled == kBlock) flush();
  }

  void flush() {
    if (filled == 0) return;
    const long k0 = N - filled;
    // Column j of `past` is (u_{k-L}, ..., u_{k-1}) for k = k0 + j; column j
    // of `upto` is (u_{k-L+1}, ..., u_k).
    Window past(ubuf.data(), m * L, filled, Eigen::OuterStride<>(m));
    Window upto(ubuf.data() + m, m * L, filled, Eigen::OuterStride<>(m));
    lag_acc.noalias() += ubuf.middleCols(L, filled) * upto.transpose();
    const long js = std::max<long>(0, L - k0);
    if (js < filled) {
      const Eigen::Index cnt = filled - js;
      cross.noalias() += ybuf.middleCols(js, cnt) * past.middleCols(js, cnt).transpose();
    }
    const Matrix keep = ubuf.middleCols(filled, L);
    ubuf.leftCols(L) = keep;
    filled = 0;
  }

  std::vector<Matrix> solve() {
    flush();
    const long N_ = N;
    // After flush the first L buffer columns hold u_{N-L}, ..., u_{N-1}.
    auto u_at = [&](long t) -> Vector {
      if (t < L) return head[static_cast<std::size_t>(t)];
      return ubuf.col(t - (N_ - L));
    };
    auto lag = [&](int d) { return lag_acc.block(0, (L - 1 - d) * m, m, m); };
    const Eigen::Index dim = m * L;
    Matrix R = Matrix::Zero(dim, dim);
    for (int a = 1; a <= L; ++a)
      for (int b = a; b <= L; ++b) {
        const int d = b - a;
        Matrix blk = lag(d);
        // Drop t in [d, L-a-1] (before the regression window) and
        // t in [N-a, N-1] (after it).
        for (long t = d; t <= L - a - 1; ++t) blk -= u_at(t) * u_at(t - d).transpose();
        for (long t = N_ - a; t <= N_ - 1; ++t) blk -= u_at(t) * u_at(t - d).transpose();
        R.block((a - 1) * m, (b - 1) * m, m, m) = blk;
        if (b != a) R.block((b - 1) * m, (a - 1) * m, m, m) = blk.transpose();
      }
    Eigen::LDLT<Matrix> ldlt(R);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0))
      throw IdentificationError("FIR normal equations are singular");
    Matrix rhs(p, dim);  // reorder cross to lag a = 1..L
    for (int a = 1; a <= L; ++a) rhs.block(0, (a - 1) * m, p, m) = cross.block(0, (L - a) * m, p, m);
    const Matrix G = ldlt.solve(rhs.transpose()).transpose();
    std::vector<Matrix> out;
    for (int a = 1; a <= L; ++a) out.push_back(G.block(0, (a - 1) * m, p, m));
    return out;
  }
};

}  // namespace detail

/// Balanced Ho-Kalman realization from Markov parameters h_0..h_{L-1}.
inline IdentifiedModel realize_ho_kalman(const std::vector<Matrix>& markov, int order, double h) {
  const int L = static_cast<int>(markov.size());
  if (L < 4) throw IdentificationError("need at least four Markov parameters");
  const Eigen::Index p = markov[0].rows(), m = markov[0].cols();
  const int r = L / 2;
  Matrix H(p * r, m * r), Hs(p * r, m * r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      H.block(i * p, j * m, p, m) = markov[static_cast<std::size_t>(i + j)];
      const int k = i + j + 1;
      Hs.block(i * p, j * m, p, m) =
          k < L ? markov[static_cast<std::size_t>(k)] : Matrix::Zero(p, m);
    }
  Eigen::JacobiSVD<Matrix> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector s = svd.singularValues();
  IdentifiedModel mdl;
  mdl.h = h;
  mdl.markov = markov;
  mdl.hankel_sv.assign(s.data(), s.data() + s.size());
  if (!(s(0) > 1e-12)) throw IdentificationError("Hankel matrix has collapsed to rank zero");

  int k = order;
  if (k <= 0) {
    // Largest ratio gap among orders k >= p whose singular value stands above
    // the noise floor (three times the median singular value) and is not
    // numerically zero.
    std::vector<double> sorted(s.data(), s.data() + s.size());
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double floor = std::max(3.0 * sorted[sorted.size() / 2], 1e-12 * s(0));
    int best = static_cast<int>(p);
    double best_ratio = -1.0;
    for (int c = static_cast<int>(std::max<Eigen::Index>(p, 1)); c < s.size(); ++c) {
      if (!(s(c - 1) > floor)) break;
      const double ratio = s(c) > 0.0 ? s(c - 1) / s(c) : std::numeric_limits<double>::infinity();
      if (ratio > best_ratio) {
        best_ratio = ratio;
        best = c;
      }
    }
    k = best;
  }
  if (k > s.size()) throw IdentificationError("requested order exceeds the Hankel rank bound");
  if (!(s(k - 1) > 1e-12 * s(0)))
    throw IdentificationError("requested order exceeds the numerical Hankel rank");

  const Vector sq = s.head(k).cwiseSqrt();
  const Vector isq = sq.cwiseInverse();
  const Matrix Uk = svd.matrixU().leftCols(k);
  const Matrix Vk = svd.matrixV().leftCols(k);
  const Matrix O = Uk * sq.asDiagonal();
  const Matrix Rc = sq.asDiagonal() * Vk.transpose();
  mdl.C = O.topRows(p);
  mdl.B = Rc.leftCols(m);
  mdl.A = isq.asDiagonal() * Uk.transpose() * Hs * Vk * isq.asDiagonal();
  mdl.stable = spectral_radius(mdl.A) < 1.0;
  mdl.W = Matrix::Zero(k, k);
  mdl.V = Matrix::Zero(p, p);
  return mdl;
}

namespace detail {

inline Matrix psd_clip(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
  return symmetrize(es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
                    es.eigenvectors().transpose());
}

/// Fits the noise covariances of the realized model to the autocovariances
/// of the FIR residual: Lam_l = C A^l P C^T for l >= 1 and
/// Lam_0 = C P C^T + V, with P = A P A^T + W the stationary state covariance.
inline void match_noise_covariances(IdentifiedModel& mdl, const std::vector<Matrix>& lam) {
  const Eigen::Index k = mdl.n(), p = mdl.p();
  const int lags = static_cast<int>(lam.size()) - 1;
  if (lags < 1 || k == 0) return;
  const Eigen::Index unknowns = k * (k + 1) / 2;
  Matrix Aeq(lags * p * p, unknowns);
  Vector beq(lags * p * p);
  std::vector<Matrix> CAl(static_cast<std::size_t>(lags));
  Matrix Apow = mdl.A;
  for (int l = 1; l <= lags; ++l) {
    CAl[static_cast<std::size_t>(l - 1)] = mdl.C * Apow;
    Apow = Apow * mdl.A;
  }
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i; j < k; ++j, ++col) {
      for (int l = 1; l <= lags; ++l) {
        const Matrix& ca = CAl[static_cast<std::size_t>(l - 1)];
        // C A^l E_ij C^T with E_ij symmetric unit
        Matrix blk = ca.col(i) * mdl.C.col(j).transpose();
        if (i != j) blk += ca.col(j) * mdl.C.col(i).transpose();
        Aeq.block((l - 1) * p * p, col, p * p, 1) =
            Eigen::Map<const Vector>(blk.data(), p * p);
      }
    }
  for (int l = 1; l <= lags; ++l)
    beq.segment((l - 1) * p * p, p * p) =
        Eigen::Map<const Vector>(lam[static_cast<std::size_t>(l)].data(), p * p);
  const Vector x = Aeq.completeOrthogonalDecomposition().solve(beq);
  Matrix P = Matrix::Zero(k, k);
  col = 0;
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i; j < k; ++j, ++col) {
      P(i, j) = x(col);
      P(j, i) = x(col);
    }
  P = psd_clip(P);
  mdl.W = psd_clip(P - mdl.A * P * mdl.A.transpose());
  // Clipping W changes the implied state covariance; take V against the
  // covariance W actually produces so the lag-0 output covariance is kept.
  if (spectral_radius(mdl.A) < 1.0) P = solve_lyapunov_discrete(mdl.A, mdl.W);
  mdl.V = psd_clip(lam[0] - mdl.C * P * mdl.C.transpose());
}

}  // namespace detail

/// Ho-Kalman identification from one white-noise excitation experiment.
inline IdentifiedModel identify_ho_kalman(SampledSystem& sys, const HoKalmanConfig& cfg) {
  const int L = cfg.lags;
  if (L < 4 || L % 2 != 0) throw ConfigError("FIR length must be even and at least 4");
  if (cfg.N_id < 20L * L)
    throw DomainError("N_id must be at least 20 times the FIR length");
  if (!(cfg.input_std > 0.0)) throw DomainError("input_std must be positive");
  const Eigen::Index m = sys.input_dim(), p = sys.output_dim();

  detail::FirAccumulator acc(m, p, L);
  sys.reset();
  Rng urng = make_rng(cfg.seed);
  for (long k = 0; k < cfg.N_id; ++k) {
    const Vector y = sys.output();
    const Vector u = cfg.input_std * standard_normal_vector(m, urng);
    acc.add(y, u);
    sys.apply(u);
  }
  std::vector<Matrix> G = acc.solve();
  IdentifiedModel mdl = realize_ho_kalman(G, cfg.order, sys.step_length());

  // Replay a prefix of the same data and collect residual autocovariances,
  // skipping the initial-state transient as the identified model sees it.
  const double rho = spectral_radius(mdl.A);
  const long burn =
      rho < 1.0 && rho > 0.0
          ? std::min(cfg.N_id / 2, static_cast<long>(std::ceil(std::log(1e-8) / (2.0 * std::log(rho)))))
          : 0L;
  const long nres = std::min(cfg.N_id, burn + std::max<long>(cfg.residual_samples, 20L * L));
  Matrix Gflat(p, m * L);
  for (int a = 1; a <= L; ++a) Gflat.block(0, (a - 1) * m, p, m) = G[static_cast<std::size_t>(a - 1)];
  sys.reset();
  urng = make_rng(cfg.seed);
  Vector uwin = Vector::Zero(m * L);        // u_{k-1}, ..., u_{k-L}
  Vector rwin = Vector::Zero(p * (L + 1));  // r_k, ..., r_{k-L}
  Matrix lam_acc = Matrix::Zero(p, p * (L + 1));
  long filled = 0, cnt = 0;
  for (long k = 0; k < nres; ++k) {
    const Vector y = sys.output();
    const Vector u = cfg.input_std * standard_normal_vector(m, urng);
    if (k >= L) {
      const Eigen::Index keep = p * L;
      std::copy_backward(rwin.data(), rwin.data() + keep, rwin.data() + keep + p);
      rwin.head(p) = y - Gflat * uwin;
      if (++filled >= L + 1 && k >= burn) {
        lam_acc.noalias() += rwin.head(p) * rwin.transpose();
        ++cnt;
      }
    }
    const Eigen::Index keep = m * (L - 1);
    std::copy_backward(uwin.data(), uwin.data() + keep, uwin.data() + keep + m);
    uwin.head(m) = u;
    sys.apply(u);
  }
  if (cnt > 0) {
    std::vector<Matrix> lam;
    for (int l = 0; l <= L; ++l) lam.push_back(lam_acc.block(0, l * p, p, p) / static_cast<double>(cnt));
    lam[0] = symmetrize(lam[0]);
    detail::match_noise_covariances(mdl, lam);
  }
  return mdl;
}

struct DiscreteEquilibrium {
  Vector x_star_d;
  Vector u_star_d;
};

/// Minimum-norm (x, u) with x = A x + B u and C x = y*.
inline DiscreteEquilibrium discrete_equilibrium(const DiscretePlant& d, const Vector& y_star) {
  const auto n = d.n(), m = d.m(), p = d.p();
  if (y_star.size() != p) throw DimensionError("y* length must equal p");
  Matrix M = Matrix::Zero(n + p, n + m);
  M.topLeftCorner(n, n) = d.Ad - Matrix::Identity(n, n);
  M.topRightCorner(n, m) = d.Bd;
  M.bottomLeftCorner(p, n) = d.C;
  Vector rhs = Vector::Zero(n + p);
  rhs.tail(p) = y_star;
  const Vector sol = right_pinv(M) * rhs;
  return {sol.head(n), sol.tail(m)};
}

/// Closed loop of the sampled PI controller z_{k+1} = z_k + e_k,
/// e_k = -C e_x,k + v_k:  A_K = [[A - B K_P C, B K_I], [-C, I]].
struct DiscreteClosedLoop {
  Matrix Abar, Bbar, Cbar, AbarK, WtildeK, Qprime, G, Q1, V;
  Eigen::Index p = 0;
};

inline DiscreteClosedLoop build_discrete_closed_loop(const DiscretePlant& d, const PiGain& K,
                                                     const Matrix& Q1, const Matrix& Q2) {
  const auto n = d.n(), m = d.m(), p = d.p();
  require_shape(K.kp, m, p, "K_P");
  require_shape(K.ki, m, p, "K_I");
  require_shape(Q1, p, p, "Q1");
  require_shape(Q2, p, p, "Q2");
  DiscreteClosedLoop cl;
  cl.p = p;
  cl.Abar = Matrix::Zero(n + p, n + p);
  cl.Abar.topLeftCorner(n, n) = d.Ad;
  cl.Abar.bottomLeftCorner(p, n) = -d.C;
  cl.Abar.bottomRightCorner(p, p) = Matrix::Identity(p, p);
  cl.Bbar = Matrix::Zero(n + p, m);
  cl.Bbar.topRows(n) = d.Bd;
  cl.Cbar = Matrix::Zero(2 * p, n + p);
  cl.Cbar.topLeftCorner(p, n) = d.C;
  cl.Cbar.bottomRightCorner(p, p) = -Matrix::Identity(p, p);
  cl.AbarK = cl.Abar - cl.Bbar * K.k() * cl.Cbar;
  cl.G = Matrix::Zero(n + p, p);
  cl.G.topRows(n) = d.Bd * K.kp;
  cl.G.bottomRows(p) = Matrix::Identity(p, p);
  cl.WtildeK = Matrix::Zero(n + p, n + p);
  cl.WtildeK.topLeftCorner(n, n) = d.Wd;
  cl.WtildeK = symmetrize(cl.WtildeK + cl.G * d.V * cl.G.transpose());
  cl.Qprime = Matrix::Zero(n + p, n + p);
  cl.Qprime.topLeftCorner(n, n) = d.C.transpose() * Q1 * d.C;
  cl.Qprime.bottomRightCorner(p, p) = Q2;
  cl.Qprime = symmetrize(cl.Qprime);
  cl.Q1 = Q1;
  cl.V = d.V;
  return cl;
}

/// f_d(K) = tr(X Q') + tr(V Q1) and its gradient
/// -2 B^T Y A_K X C^T + 2 B^T Y G V (K_P columns).
inline CostGradient discrete_cost_gradient(const DiscretePlant& d, const PiGain& K,
                                           const Matrix& Q1, const Matrix& Q2) {
  const DiscreteClosedLoop cl = build_discrete_closed_loop(d, K, Q1, Q2);
  SchurLyapunov lyap(cl.AbarK);
  CostGradient out;
  out.X = lyap.discrete(cl.WtildeK);
  out.Y = lyap.discrete_adjoint(cl.Qprime);
  out.value = (cl.Qprime * out.X).trace() + (Q1 * d.V).trace();
  const Matrix BtY = cl.Bbar.transpose() * out.Y;
  out.grad = -2.0 * BtY * cl.AbarK * out.X * cl.Cbar.transpose();
  out.grad.leftCols(cl.p) += 2.0 * BtY * cl.G * d.V;
  return out;
}

inline double discrete_cost(const DiscretePlant& d, const PiGain& K, const Matrix& Q1,
                            const Matrix& Q2) {
  const DiscreteClosedLoop cl = build_discrete_closed_loop(d, K, Q1, Q2);
  return (cl.Qprime * solve_lyapunov_discrete(cl.AbarK, cl.WtildeK)).trace() +
         (Q1 * d.V).trace();
}

/// Projected gradient on the model cost with exact gradients. Leaving the
/// discrete stabilizing set aborts with the iterate index in the message.
inline TuneTrace tune_gains_modelbased(const DiscretePlant& model, const PiGain& K0,
                                       const ConstraintBox& omega, double eta, long iters,
                                       const Matrix& Q1, const Matrix& Q2,
                                       bool record_costs = false) {
  if (iters < 1) throw ConfigError("iteration count must be at least 1");
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  omega.validate();
  TuneTrace tr;
  PiGain k = K0;
  tr.iterates.push_back(k);
  for (long i = 0; i < iters; ++i) {
    CostGradient cg;
    try {
      cg = discrete_cost_gradient(model, k, Q1, Q2);
    } catch (const StabilityError& e) {
      throw StabilityError("model-based iterate " + std::to_string(i) +
                           " left the stabilizing set: " + e.what());
    }
    if (record_costs) tr.analytic_costs.push_back(cg.value);
    k = project_onto_omega(PiGain::from_k(k.k() - eta * cg.grad), omega);
    if (record_costs) {
      tr.iterates.push_back(k);
      tr.est_gradients.push_back(cg.grad);
    }
  }
  if (!record_costs) tr.iterates.push_back(k);
  try {
    const double f = discrete_cost(model, k, Q1, Q2);
    if (record_costs) tr.analytic_costs.push_back(f);
  } catch (const StabilityError& e) {
    throw StabilityError("model-based iterate " + std::to_string(iters) +
                         " left the stabilizing set: " + e.what());
  }
  return tr;
}

struct ZohStep {
  long k;
  double t;
  const Vector& ex;  // e_x at t = k h
  const Vector& z;   // z_k
  const Vector& e;   // e_k (with the measurement noise draw)
};

/// Continuous plant under u = K_P e_k + K_I z_k + u0 held over each sample
/// interval, z_{k+1} = z_k + e_k. Returns e, z at the last grid point.
inline RolloutSample simulate_zoh_closed_loop(
    const LtiPlant& plant, const PiGain& K, const Vector& u0, const Vector& y_star,
    double horizon, double h, Rng& rng, const std::function<void(const ZohStep&)>& visit = {},
    const Matrix* Q1 = nullptr, const Matrix* Q2 = nullptr) {
  const auto n = plant.n(), p = plant.p();
  require_shape(K.kp, plant.m(), p, "K_P");
  const Equilibrium eq = compute_equilibrium(plant, y_star);
  const long steps = grid_steps(horizon, h);
  ExactStepper stepper(plant.A, plant.B, plant.W, steps > 0 ? horizon / steps : h);
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(plant.V));
  const Matrix v_sqrt = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  Vector ex = plant.init.sample(n, rng) - eq.x_star;
  Vector z = Vector::Zero(p);
  Vector e(p), noise(p), du(plant.m()), drift(n);
  const Vector du0 = u0 - eq.u_star;
  for (long k = 0;; ++k) {
    fill_standard_normal(noise, p, rng);
    e.noalias() = -plant.C * ex;
    e.noalias() += v_sqrt * noise;
    if (visit) visit(ZohStep{k, static_cast<double>(k) * stepper.h(), ex, z, e});
    if (k == steps) break;
    du.noalias() = K.kp * e;
    du.noalias() += K.ki * z;
    du += du0;
    drift.noalias() = stepper.gamma() * du;
    stepper.step(ex, drift, rng);
    require_finite_state(ex, static_cast<double>(k + 1) * stepper.h());
    z += e;
  }
  RolloutSample out;
  out.e_tau = e;
  out.z_tau = z;
  out.state.resize(n + p);
  out.state << ex, z;
  if (Q1 && Q2) out.cost_sample = e.dot(*Q1 * e) + z.dot(*Q2 * z);
  return out;
}

}  // namespace pi2dof
