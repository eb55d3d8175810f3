#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "oracle.hpp"
#include "plant.hpp"

namespace pi2dof {

/// The only channel between the tuner and a plant. A call runs one closed-loop
/// experiment per seed under u = K_P e + K_I z + u0 with z(0) = 0 and reports
/// what an experimenter could measure at the horizon.
class RolloutOracle {
 public:
  virtual ~RolloutOracle() = default;

  virtual Eigen::Index input_dim() const = 0;
  virtual Eigen::Index output_dim() const = 0;

  virtual std::vector<RolloutSample> rollouts(const PiGain& K, const Vector& u0,
                                              const Vector& y_star, double tau,
                                              std::span<const std::uint64_t> seeds) const = 0;
};

/// Rollouts drawn from the exact sampled simulator of a known plant.
class SimulatedRollouts : public RolloutOracle {
 public:
  SimulatedRollouts(LtiPlant plant, Matrix q1, Matrix q2, double h_sim = 0.01)
      : plant_(std::move(plant)), q1_(std::move(q1)), q2_(std::move(q2)), h_sim_(h_sim) {
    plant_.validate();
    require_shape(q1_, plant_.p(), plant_.p(), "Q1");
    require_shape(q2_, plant_.p(), plant_.p(), "Q2");
    if (!(h_sim_ > 0.0)) throw DomainError("h_sim must be positive");
  }

  Eigen::Index input_dim() const override { return plant_.m(); }
  Eigen::Index output_dim() const override { return plant_.p(); }

  std::vector<RolloutSample> rollouts(const PiGain& K, const Vector& u0,
                                      const Vector& y_star, double tau,
                                      std::span<const std::uint64_t> seeds) const override {
    if (u0.size() != plant_.m()) throw DimensionError("u0 length must equal m");
    const Equilibrium eq = compute_equilibrium(plant_, y_star);
    const AugmentedClosedLoop cl = build_closed_loop(plant_, K, q1_, q2_);
    const long steps = grid_steps(tau, h_sim_);
    AugmentedSimulator sim(cl, steps > 0 ? tau / static_cast<double>(steps) : h_sim_);
    const Vector du = u0 - eq.u_star;
    std::vector<RolloutSample> out;
    out.reserve(seeds.size());
    for (std::uint64_t s : seeds) {
      Rng rng = make_rng(s);
      out.push_back(sim.run(plant_.init, eq.x_star, du, tau, rng));
    }
    return out;
  }

  const LtiPlant& plant() const { return plant_; }

 private:
  LtiPlant plant_;
  Matrix q1_, q2_;
  double h_sim_;
};

/// Returns E[e^T Q1 e + z^T Q2 z] at the horizon for every seed, i.e. a
/// rollout with the sampling noise averaged out. Used to isolate the
/// estimator's own error from Monte-Carlo noise in tests.
class ExpectedCostRollouts : public RolloutOracle {
 public:
  ExpectedCostRollouts(LtiPlant plant, Matrix q1, Matrix q2)
      : plant_(std::move(plant)), q1_(std::move(q1)), q2_(std::move(q2)) {
    plant_.validate();
  }

  Eigen::Index input_dim() const override { return plant_.m(); }
  Eigen::Index output_dim() const override { return plant_.p(); }

  std::vector<RolloutSample> rollouts(const PiGain& K, const Vector& u0,
                                      const Vector& y_star, double tau,
                                      std::span<const std::uint64_t> seeds) const override {
    const Equilibrium eq = compute_equilibrium(plant_, y_star);
    const AugmentedClosedLoop cl = build_closed_loop(plant_, K, q1_, q2_);
    const auto n = plant_.n();
    const Moments mo = finite_horizon_moments(cl, u0, eq.u_star,
                                              plant_.init.mean(n) - eq.x_star,
                                              plant_.init.cov(n), tau);
    if (!mo.mean.allFinite() || !mo.cov.allFinite())
      throw DivergenceError("closed-form moments are not finite", tau);
    RolloutSample r;
    r.state = mo.mean;
    r.z_tau = mo.mean.tail(plant_.p());
    r.e_tau = -plant_.C * mo.mean.head(n);
    r.cost_sample = (cl.Qprime * (mo.cov + mo.mean * mo.mean.transpose())).trace() +
                    (q1_ * plant_.V).trace();
    return std::vector<RolloutSample>(seeds.size(), r);
  }

 private:
  LtiPlant plant_;
  Matrix q1_, q2_;
};

}  // namespace pi2dof
