#include <gtest/gtest.h>

#include <cmath>

#include "pi2dof/baseline.hpp"
#include "support.hpp"

using namespace pi2dof;

namespace {

std::vector<Matrix> true_markov(const DiscretePlant& d, int L) {
  std::vector<Matrix> out;
  Matrix ak = Matrix::Identity(d.n(), d.n());
  for (int k = 0; k < L; ++k) {
    out.push_back(d.C * ak * d.Bd);
    ak = ak * d.Ad;
  }
  return out;
}

LtiPlant noiseless(LtiPlant pl) {
  pl.W.setZero();
  pl.V.setZero();
  return pl;
}

}  // namespace

TEST(Zoh, DiscretizationPreservesDcGain) {
  Rng rng = make_rng(51);
  const LtiPlant pl = generate_random_plant(6, 2, 2, rng);
  const DiscretePlant d = discretize_zoh(pl, 0.05);
  const Matrix dc_c = -pl.C * pl.A.inverse() * pl.B;
  const Matrix dc_d = pl.C * (Matrix::Identity(6, 6) - d.Ad).inverse() * d.Bd;
  EXPECT_LT((dc_c - dc_d).norm(), 1e-9 * dc_c.norm());
  const Vector ys = Vector::Constant(2, 5.0);
  const Vector uc = compute_equilibrium(pl, ys).u_star;
  const Vector ud = discrete_equilibrium(d, ys).u_star_d;
  EXPECT_LT((uc - ud).norm(), 1e-8 * uc.norm());
}

TEST(Fir, AccumulatorMatchesBruteForceLeastSquares) {
  const Eigen::Index m = 2, p = 2;
  const int L = 6;
  const long N = 1500;  // spans several internal blocks
  Rng rng = make_rng(52);
  std::vector<Vector> ys, us;
  detail::FirAccumulator acc(m, p, L);
  for (long k = 0; k < N; ++k) {
    ys.push_back(standard_normal_vector(p, rng));
    us.push_back(standard_normal_vector(m, rng));
    acc.add(ys.back(), us.back());
  }
  const std::vector<Matrix> G = acc.solve();
  Matrix Phi(N - L, m * L), Y(N - L, p);
  for (long k = L; k < N; ++k) {
    for (int a = 1; a <= L; ++a) Phi.block(k - L, (a - 1) * m, 1, m) = us[k - a].transpose();
    Y.row(k - L) = ys[k].transpose();
  }
  const Matrix theta = Phi.colPivHouseholderQr().solve(Y);  // (mL) x p
  ASSERT_EQ(G.size(), static_cast<std::size_t>(L));
  for (int a = 1; a <= L; ++a)
    EXPECT_LT((G[a - 1] - theta.block((a - 1) * m, 0, m, p).transpose()).norm(), 1e-10);
}

TEST(HoKalman, ExactMarkovParametersAreReproduced) {
  Rng rng = make_rng(53);
  const LtiPlant pl = generate_random_plant(4, 2, 2, rng);
  const DiscretePlant d = discretize_zoh(pl, 0.02);
  const auto markov = true_markov(d, 40);
  const IdentifiedModel mdl = realize_ho_kalman(markov, 0, 0.02);
  EXPECT_EQ(mdl.n(), 4);
  EXPECT_TRUE(mdl.stable);
  DiscretePlant dm = mdl.as_discrete();
  const auto back = true_markov(dm, 40);
  for (int k = 0; k < 40; ++k) EXPECT_LT((back[k] - markov[k]).norm(), 1e-8 * markov[0].norm());
  EXPECT_THROW(realize_ho_kalman(std::vector<Matrix>(2, Matrix::Ones(1, 1)), 0, 0.1),
               IdentificationError);
}

TEST(HoKalman, NoiselessExperimentRecoversSystem) {
  // A fast plant whose impulse response has died out within the FIR window.
  Rng rng = make_rng(54);
  LtiPlant pl = noiseless(test::small_plant(3, 2, rng));
  pl.A = -Matrix(Vector::LinSpaced(3, 3.0, 6.0).asDiagonal());
  pl.init = InitialStateDistribution::point(Vector::Zero(3));
  const double h = 0.05;
  SampledPlant sp(pl, h, 1);
  HoKalmanConfig cfg;
  cfg.N_id = 4000;
  cfg.lags = 100;  // tail below 1e-6
  cfg.seed = 2;
  const IdentifiedModel mdl = identify_ho_kalman(sp, cfg);
  const DiscretePlant d = discretize_zoh(pl, h);
  const auto truth = true_markov(d, 20);
  for (int k = 0; k < 20; ++k) EXPECT_LT((mdl.markov[k] - truth[k]).norm(), 1e-8);
  EXPECT_EQ(mdl.n(), 3);
  const Vector ys = Vector::Constant(2, 5.0);
  const Vector us = compute_equilibrium(pl, ys).u_star;
  EXPECT_LT((discrete_equilibrium(mdl.as_discrete(), ys).u_star_d - us).norm(), 1e-6 * us.norm());
}

TEST(HoKalman, NoiseFitReproducesOutputCovariance) {
  // Fast enough that 50 lags cover the impulse response, so the residuals
  // carry only the noise.
  Rng rng = make_rng(55);
  LtiPlant pl = test::small_plant(4, 2, rng, 0.05, 0.01);
  pl.A = -Matrix(Vector::LinSpaced(4, 2.0, 5.0).asDiagonal());
  const double h = 0.05;
  SampledPlant sp(pl, h, 3);
  HoKalmanConfig cfg;
  cfg.N_id = 100000;
  cfg.seed = 4;
  const IdentifiedModel mdl = identify_ho_kalman(sp, cfg);
  Eigen::SelfAdjointEigenSolver<Matrix> ew(mdl.W), ev(mdl.V);
  EXPECT_GE(ew.eigenvalues().minCoeff(), -1e-12);
  EXPECT_GE(ev.eigenvalues().minCoeff(), -1e-12);
  // State coordinates are arbitrary, so compare the stationary output noise
  // covariance C X C^T + V.
  const DiscretePlant d = discretize_zoh(pl, h);
  const Matrix truth = d.C * solve_lyapunov_discrete(d.Ad, d.Wd) * d.C.transpose() + d.V;
  const Matrix fit = mdl.C * solve_lyapunov_discrete(mdl.A, mdl.W) * mdl.C.transpose() + mdl.V;
  EXPECT_LT((fit - truth).norm(), 0.25 * truth.norm()) << fit << "\n\n" << truth;
  HoKalmanConfig bad = cfg;
  bad.lags = 5;
  EXPECT_THROW(identify_ho_kalman(sp, bad), ConfigError);
}

TEST(HoKalman, AutoOrderStaysAboveTheNoiseFloor) {
  Rng rng = make_rng(55);
  const LtiPlant pl = generate_random_plant(6, 2, 2, rng);
  SampledPlant sp(pl, 0.01, 3);
  HoKalmanConfig cfg;
  cfg.N_id = 20000;
  cfg.seed = 4;
  const IdentifiedModel mdl = identify_ho_kalman(sp, cfg);
  EXPECT_TRUE(mdl.stable);
  EXPECT_GE(mdl.n(), 2);
  EXPECT_LE(mdl.n(), 6);
}

TEST(HoKalman, MarkovErrorShrinksLikeInverseRootN) {
  Rng rng = make_rng(62);
  const LtiPlant pl = generate_random_plant(20, 2, 2, rng);
  const DiscretePlant d = discretize_zoh(pl, 0.01);
  const auto truth = true_markov(d, 50);
  std::vector<double> lx, ly;
  for (long N : {10000L, 40000L, 160000L}) {
    double err = 0.0;
    for (std::uint64_t rep = 0; rep < 4; ++rep) {
      SampledPlant sp(pl, 0.01, 100 + rep);
      detail::FirAccumulator acc(2, 2, 50);
      Rng u = make_rng(200 + rep);
      for (long k = 0; k < N; ++k) {
        const Vector y = sp.output();
        const Vector in = standard_normal_vector(2, u);
        acc.add(y, in);
        sp.apply(in);
      }
      const auto G = acc.solve();
      for (int k = 0; k < 50; ++k) err += (G[k] - truth[k]).squaredNorm();
    }
    lx.push_back(std::log(static_cast<double>(N)));
    ly.push_back(0.5 * std::log(err));
  }
  const double slope = (ly[2] - ly[0]) / (lx[2] - lx[0]);
  EXPECT_NEAR(slope, -0.5, 0.2);
}

TEST(SampledPlant, ResetReplaysTheRealization) {
  Rng rng = make_rng(56);
  const LtiPlant pl = test::small_plant(3, 2, rng);
  SampledPlant sp(pl, 0.1, 9);
  std::vector<Vector> first;
  for (int k = 0; k < 10; ++k) {
    first.push_back(sp.output());
    sp.apply(Vector::Ones(2));
  }
  sp.reset();
  for (int k = 0; k < 10; ++k) {
    EXPECT_EQ(sp.output(), first[k]);
    sp.apply(Vector::Ones(2));
  }
}

TEST(DiscreteGradient, MatchesFiniteDifferences) {
  Rng rng = make_rng(57);
  for (int trial = 0; trial < 4; ++trial) {
    const LtiPlant pl = test::small_plant(2 + trial, 2, rng);
    const DiscretePlant d = discretize_zoh(pl, 0.1);
    const Matrix q1 = test::random_spd(2, rng), q2 = test::random_spd(2, rng);
    const Matrix gd = d.C * (Matrix::Identity(d.n(), d.n()) - d.Ad).inverse() * d.Bd;
    PiGain K;
    double scale = 0.1;
    do {
      scale *= 0.5;
      K = PiGain(0.2 * scale * standard_normal_matrix(2, 2, rng),
                 scale * (gd.inverse() + 0.2 * standard_normal_matrix(2, 2, rng)));
    } while (!is_schur_stable(build_discrete_closed_loop(d, K, q1, q2).AbarK));
    const CostGradient cg = discrete_cost_gradient(d, K, q1, q2);
    const Matrix fd =
        test::fd_gradient([&](const PiGain& k) { return discrete_cost(d, k, q1, q2); }, K, 1e-7);
    EXPECT_LT((cg.grad - fd).norm() / fd.norm(), 1e-5) << "trial " << trial;
    EXPECT_NEAR(cg.value, discrete_cost(d, K, q1, q2), 1e-10 * cg.value);
  }
}

TEST(DiscreteClosedLoop, MatchesKroneckerOracle) {
  Rng rng = make_rng(58);
  const LtiPlant pl = test::small_plant(3, 2, rng);
  const DiscretePlant d = discretize_zoh(pl, 0.1);
  const Matrix I = Matrix::Identity(2, 2);
  const PiGain K(Matrix::Zero(2, 2),
                 0.05 * (d.C * (Matrix::Identity(3, 3) - d.Ad).inverse() * d.Bd).inverse());
  const DiscreteClosedLoop cl = build_discrete_closed_loop(d, K, I, I);
  const Matrix X = test::kron_lyap_discrete(cl.AbarK, cl.WtildeK);
  EXPECT_NEAR(discrete_cost(d, K, I, I), (cl.Qprime * X).trace() + d.V.trace(), 1e-9);
}

TEST(ModelBased, PgdDecreasesTheModelCost) {
  Rng rng = make_rng(59);
  const LtiPlant pl = generate_random_plant(6, 2, 2, rng);
  const DiscretePlant d = discretize_zoh(pl, 0.01);
  const Matrix q1 = 0.1 * Matrix::Identity(2, 2), q2 = 0.01 * Matrix::Identity(2, 2);
  const PiGain K0(0.01 * Matrix::Identity(2, 2), 0.01 * Matrix::Identity(2, 2));
  const TuneTrace tr = tune_gains_modelbased(d, K0, ConstraintBox{}, 1e-5, 2000, q1, q2, true);
  ASSERT_EQ(tr.analytic_costs.size(), 2001u);
  for (std::size_t i = 1; i < tr.analytic_costs.size(); ++i)
    EXPECT_LE(tr.analytic_costs[i], tr.analytic_costs[i - 1] * (1 + 1e-12));
  EXPECT_LT(tr.analytic_costs.back(), tr.analytic_costs.front());
  EXPECT_THROW(tune_gains_modelbased(d, K0, ConstraintBox{}, 1e-5, 0, q1, q2), ConfigError);
}

TEST(ZohLoop, RestsAtEquilibriumWithoutNoise) {
  Rng rng = make_rng(60);
  LtiPlant pl = noiseless(generate_random_plant(5, 2, 2, rng));
  const Vector ys = Vector::Constant(2, 5.0);
  const Equilibrium eq = compute_equilibrium(pl, ys);
  pl.init = InitialStateDistribution::point(eq.x_star);
  const PiGain K(0.01 * Matrix::Identity(2, 2), 0.01 * Matrix::Identity(2, 2));
  Rng r = make_rng(1);
  double worst = 0.0;
  const RolloutSample s = simulate_zoh_closed_loop(
      pl, K, eq.u_star, ys, 5.0, 0.01, r,
      [&](const ZohStep& st) { worst = std::max(worst, st.e.norm() + st.z.norm()); });
  EXPECT_LT(worst, 1e-9);
  EXPECT_LT(s.e_tau.norm(), 1e-9);
}

TEST(ZohLoop, IntegratorSumsTheSampledErrors) {
  Rng rng = make_rng(61);
  const LtiPlant pl = test::small_plant(3, 2, rng);
  const PiGain K(0.1 * Matrix::Identity(2, 2), 0.05 * Matrix::Identity(2, 2));
  Rng r = make_rng(2);
  Vector sum = Vector::Zero(2);
  simulate_zoh_closed_loop(pl, K, Vector::Zero(2), Vector::Ones(2), 1.0, 0.1, r,
                           [&](const ZohStep& st) {
                             EXPECT_LT((st.z - sum).norm(), 1e-12);
                             sum += st.e;
                           });
}
