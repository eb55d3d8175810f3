#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "constraint.hpp"
#include "errors.hpp"
#include "linmath.hpp"
#include "oracle.hpp"
#include "rollout.hpp"

namespace pi2dof {

/// How the two rollouts of a +/- pair are seeded. `Independent` gives every
/// rollout its own stream; `Common` reuses the stream of sample j for both
/// signs, which cancels most of the noise in f^{i,1} - f^{i,2}.
enum class PairSeeding { Independent, Common };

struct ZoConfig {
  int N = 15;
  int N_sub = 20;
  double tau = 10.0;
  double r = 0.09;
  double h_sim = 0.01;
  std::uint64_t master_seed = 0;
  PairSeeding pair_seeding = PairSeeding::Independent;

  void validate() const {
    if (N < 1 || N_sub < 1) throw ConfigError("N and N_sub must be at least 1");
    if (!(tau > 0.0)) throw ConfigError("tau must be positive");
    if (!(r > 0.0)) throw ConfigError("r must be positive");
    if (!(h_sim > 0.0)) throw ConfigError("h_sim must be positive");
  }
};

struct PgdConfig {
  int T = 20;
  double eta = 1e-3;
  double eps_stop = 1e-3;
  bool stop_test = true;

  void validate() const {
    if (T < 1) throw ConfigError("T must be at least 1");
    if (!(eta > 0.0)) throw ConfigError("eta must be positive");
    if (!(eps_stop > 0.0)) throw ConfigError("eps_stop must be positive");
  }
};

struct TuneTrace {
  std::vector<PiGain> iterates;       // K^0, K^1, ..., returned gain last
  std::vector<Matrix> est_gradients;  // one per completed iteration
  std::vector<double> analytic_costs; // f(K^i), +inf outside the stabilizing set
  std::optional<int> stopped_at;      // 1-based iteration that met the stop test

  const PiGain& final_gain() const { return iterates.back(); }
};

namespace detail {
inline constexpr std::uint64_t kDirectionTag = 0xd1ec7105ULL;
inline constexpr std::uint64_t kProbeTag = 0x9a0be5ULL;
}  // namespace detail

/// Seed of rollout (iter, i, j, k); k in {1, 2} is the sign of the pair.
inline std::uint64_t rollout_seed(const ZoConfig& cfg, std::uint64_t iter, std::uint64_t i,
                                  std::uint64_t j, std::uint64_t k) {
  if (cfg.pair_seeding == PairSeeding::Common) k = 0;
  return child_seed(cfg.master_seed, {iter, i, j, k});
}

using SeedFn = std::function<std::uint64_t(int i, int j, int k)>;

/// Two-point estimate (1 / (2 r N)) sum_i (f^{i,1} - f^{i,2}) U^i for given
/// directions; f^{i,k} averages N_sub rollouts at K + r U^i (k = 1) or
/// K - r U^i (k = 2). Perturbed gains are not projected.
inline Matrix two_point_estimate(const RolloutOracle& oracle, const PiGain& K,
                                 const Vector& u_hat, const Vector& y_star,
                                 const ZoConfig& cfg, const std::vector<Matrix>& dirs,
                                 const SeedFn& seed_of) {
  const Matrix k0 = K.k();
  Matrix acc = Matrix::Zero(k0.rows(), k0.cols());
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(cfg.N_sub));
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    double f[2] = {0.0, 0.0};
    for (int k = 1; k <= 2; ++k) {
      const double sign = (k == 1) ? 1.0 : -1.0;
      const PiGain kk = PiGain::from_k(k0 + sign * cfg.r * dirs[i]);
      for (int j = 0; j < cfg.N_sub; ++j)
        seeds[static_cast<std::size_t>(j)] = seed_of(static_cast<int>(i), j, k);
      std::vector<RolloutSample> out;
      try {
        out = oracle.rollouts(kk, u_hat, y_star, cfg.tau, seeds);
      } catch (DivergenceError& e) {
        e.direction = static_cast<long>(i);
        e.pair = k;
        throw;
      }
      double s = 0.0;
      for (const auto& r : out) s += r.cost_sample;
      f[k - 1] = s / static_cast<double>(cfg.N_sub);
    }
    acc += (f[0] - f[1]) * dirs[i];
  }
  return acc / (2.0 * cfg.r * static_cast<double>(dirs.size()));
}

/// Directions U^1..U^N of iteration `iter`, uniform on the Frobenius sphere
/// of radius sqrt(2 m p).
inline std::vector<Matrix> draw_directions(const ZoConfig& cfg, Eigen::Index m, Eigen::Index p,
                                           std::uint64_t iter) {
  std::vector<Matrix> dirs;
  dirs.reserve(static_cast<std::size_t>(cfg.N));
  const double radius = std::sqrt(2.0 * static_cast<double>(m * p));
  for (int i = 0; i < cfg.N; ++i) {
    Rng rng = make_rng(
        child_seed(cfg.master_seed, {detail::kDirectionTag, iter, static_cast<std::uint64_t>(i)}));
    dirs.push_back(sample_frobenius_sphere(m, 2 * p, radius, rng));
  }
  return dirs;
}

inline Matrix estimate_gradient(const RolloutOracle& oracle, const PiGain& K,
                                const Vector& u_hat, const Vector& y_star,
                                const ZoConfig& cfg, std::uint64_t iter = 0) {
  cfg.validate();
  if (K.m() != oracle.input_dim() || K.p() != oracle.output_dim())
    throw DimensionError("gain shape does not match the rollout interface");
  const auto dirs = draw_directions(cfg, K.m(), K.p(), iter);
  try {
    return two_point_estimate(oracle, K, u_hat, y_star, cfg, dirs, [&](int i, int j, int k) {
      return rollout_seed(cfg, iter, static_cast<std::uint64_t>(i),
                          static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(k));
    });
  } catch (DivergenceError& e) {
    e.iteration = static_cast<long>(iter);
    throw;
  }
}

using GradientFn = std::function<Matrix(int iter, const PiGain& K)>;
using CostFn = std::function<double(const PiGain& K)>;

/// K^{i+1} = proj(K^i - eta g(K^i)) for i = 0..T-1. With the stop test on,
/// returns K^i as soon as ||K^{i+1} - K^i||_F <= eps eta.
inline TuneTrace projected_gradient(const PiGain& K0, const ConstraintBox& omega,
                                    const PgdConfig& pgd, const GradientFn& grad,
                                    const CostFn& cost = {}) {
  pgd.validate();
  omega.validate();
  TuneTrace tr;
  tr.iterates.push_back(K0);
  if (cost) tr.analytic_costs.push_back(cost(K0));
  PiGain k = K0;
  for (int i = 0; i < pgd.T; ++i) {
    Matrix g = grad(i, k);
    const PiGain next = project_onto_omega(PiGain::from_k(k.k() - pgd.eta * g), omega);
    tr.est_gradients.push_back(std::move(g));
    if (pgd.stop_test && (next.k() - k.k()).norm() <= pgd.eps_stop * pgd.eta) {
      tr.stopped_at = i + 1;
      return tr;
    }
    k = next;
    tr.iterates.push_back(k);
    if (cost) tr.analytic_costs.push_back(cost(k));
  }
  return tr;
}

/// Analytic cost that maps leaving the stabilizing set to +inf, for traces.
inline double cost_or_inf(const LtiPlant& plant, const PiGain& K, const Matrix& q1,
                          const Matrix& q2) {
  try {
    return analytic_cost(build_closed_loop(plant, K, q1, q2));
  } catch (const StabilityError&) {
    return std::numeric_limits<double>::infinity();
  }
}

struct CostOracle {
  const LtiPlant* plant = nullptr;
  Matrix Q1, Q2;
};

/// Model-free tuning: projected gradient driven by two-point estimates. `oracle`
/// (optional) is used only to check K0 and to record analytic costs.
inline TuneTrace tune_gains(const RolloutOracle& rollouts, const PiGain& K0,
                            const Vector& u_hat, const Vector& y_star,
                            const ConstraintBox& omega, const ZoConfig& zo,
                            const PgdConfig& pgd,
                            const std::optional<CostOracle>& oracle = std::nullopt) {
  zo.validate();
  pgd.validate();
  omega.validate();
  if (!omega.contains(K0)) throw DomainError("K0 is outside the constraint set");
  if (oracle && oracle->plant &&
      !is_stabilizing(build_closed_loop(*oracle->plant, K0, oracle->Q1, oracle->Q2)))
    throw StabilityError("K0 does not stabilize the plant");
  {
    const std::uint64_t probe[] = {child_seed(zo.master_seed, {detail::kProbeTag})};
    try {
      rollouts.rollouts(K0, u_hat, y_star, zo.tau, probe);
    } catch (const DivergenceError& e) {
      throw StabilityError(std::string("probe rollout at K0 diverged: ") + e.what());
    }
  }
  CostFn cost;
  if (oracle && oracle->plant)
    cost = [&](const PiGain& k) { return cost_or_inf(*oracle->plant, k, oracle->Q1, oracle->Q2); };
  return projected_gradient(
      K0, omega, pgd,
      [&](int iter, const PiGain& k) {
        return estimate_gradient(rollouts, k, u_hat, y_star, zo, static_cast<std::uint64_t>(iter));
      },
      cost);
}

}  // namespace pi2dof
