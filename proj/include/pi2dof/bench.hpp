#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "baseline.hpp"
#include "feedforward.hpp"
#include "oracle.hpp"
#include "plant.hpp"
#include "rollout.hpp"
#include "tuner.hpp"

namespace pi2dof {

enum class EvalMode { Continuous, Zoh };

/// The two parts of fbar: time-averaged e^T Q1 e and z^T Q2 z.
struct FbarTerms {
  double error_term = 0.0;
  double integral_term = 0.0;
  double h = 0.0;  // grid step actually used

  double total() const { return error_term + integral_term; }
};

/// (1/N_eval) sum_i (1/tau) int_0^tau e^T Q1 e + z^T Q2 z dt, trapezoid rule on
/// the sampling grid. In ZOH mode z(t) is the controller's own integrator
/// z_k = sum_{j<k} e_j held over each sample interval.
inline FbarTerms eval_fbar_terms(const LtiPlant& plant, const PiGain& K, const Vector& u0,
                                 const Vector& y_star, const Matrix& Q1, const Matrix& Q2,
                                 int N_eval, double tau_eval, double h_sim, EvalMode mode,
                                 std::uint64_t seed) {
  if (N_eval < 1) throw ConfigError("N_eval must be at least 1");
  if (!(tau_eval > 0.0)) throw ConfigError("tau_eval must be positive");
  const long steps = grid_steps(tau_eval, h_sim);
  const double h = tau_eval / static_cast<double>(steps);
  const auto p = plant.p();
  auto weight = [&](long k) { return (k == 0 || k == steps) ? 0.5 : 1.0; };
  FbarTerms out;
  out.h = h;
  double se = 0.0, sz = 0.0;
  if (mode == EvalMode::Continuous) {
    const Equilibrium eq = compute_equilibrium(plant, y_star);
    const AugmentedClosedLoop cl = build_closed_loop(plant, K, Q1, Q2);
    const AugmentedSimulator sim(cl, h);
    for (int i = 0; i < N_eval; ++i) {
      Rng rng = make_rng(child_seed(seed, {static_cast<std::uint64_t>(i)}));
      sim.run(plant.init, eq.x_star, u0 - eq.u_star, tau_eval, rng,
              [&](long k, double, const Vector& s) {
                const Vector e = sim.measure_error(s, rng);
                const auto z = s.tail(p);
                se += weight(k) * e.dot(Q1 * e);
                sz += weight(k) * z.dot(Q2 * z);
              });
    }
  } else {
    for (int i = 0; i < N_eval; ++i) {
      Rng rng = make_rng(child_seed(seed, {static_cast<std::uint64_t>(i)}));
      simulate_zoh_closed_loop(plant, K, u0, y_star, tau_eval, h, rng, [&](const ZohStep& st) {
        se += weight(st.k) * st.e.dot(Q1 * st.e);
        sz += weight(st.k) * st.z.dot(Q2 * st.z);
      });
    }
  }
  const double scale = h / tau_eval / static_cast<double>(N_eval);
  out.error_term = se * scale;
  out.integral_term = sz * scale;
  return out;
}

inline double eval_fbar(const LtiPlant& plant, const PiGain& K, const Vector& u0,
                        const Vector& y_star, const Matrix& Q1, const Matrix& Q2, int N_eval,
                        double tau_eval, double h_sim, EvalMode mode, std::uint64_t seed) {
  return eval_fbar_terms(plant, K, u0, y_star, Q1, Q2, N_eval, tau_eval, h_sim, mode, seed)
      .total();
}

/// ||y* + C A^{-1} B u0|| / ||y*||: relative offset of the open-loop steady
/// state reached under the constant input u0.
inline double steady_state_rel_err(const LtiPlant& plant, const Vector& u0, const Vector& y_star) {
  if (u0.size() != plant.m()) throw DimensionError("u0 length must equal m");
  if (y_star.size() != plant.p()) throw DimensionError("y* length must equal p");
  const double ys = y_star.norm();
  if (!(ys > 0.0)) throw DomainError("y* must be nonzero");
  Eigen::FullPivLU<Matrix> lu(plant.A);
  if (!lu.isInvertible()) throw SingularityError("A is singular");
  const Vector y_inf = -plant.C * lu.solve(plant.B * u0);
  return (y_star - y_inf).norm() / ys;
}

struct ExperimentConfig {
  Eigen::Index n = 20, m = 2, p = 2;
  int systems = 10;
  std::vector<std::uint64_t> system_seeds;  // overrides `systems` when non-empty
  int trials = 10;
  std::uint64_t master_seed = 0;
  Vector y_star = Vector::Constant(2, 5.0);
  double init_lo = -3.0, init_hi = 3.0;

  // Feedforward. Without tau_u the horizon comes from the bound calculator
  // evaluated on the true plant with eps_u.
  std::optional<double> tau_u;
  double kp_probe_scale = 1e-3;
  double eps_u = 1e-3, delta_u = 0.05;
  double subgauss_norm = 1.0, abs_const_c = 1.0;
  double ff_h_sim = 0.01;

  // Model-free tuning.
  bool run_tuning = true;
  ZoConfig zo;
  PgdConfig pgd{20, 1e-3, 1e-3, false};
  double q1 = 200.0, q2 = 20.0;
  double k0_scale = 1.0;
  ConstraintBox omega;

  // Model-based baseline.
  double h = 0.01;
  double eta_b = 1e-5;
  long iters_b = 100000;
  double q1_b = 0.1, q2_b = 0.01;
  double k0_b_scale = 1e-2;
  int hk_order = 0;
  int hk_lags = 50;
  long hk_residual_samples = 200000;
  double hk_input_std = 1.0;
  std::optional<long> N_id;  // fixed length for the tuning identification

  // Evaluation.
  int N_eval = 200;
  double tau_eval = 300.0;
  double h_eval = 0.01;

  int threads = 1;
  bool record_wallclock = false;
  bool dump_trajectories = true;
  double traj_dt = 0.1;

  int system_count() const {
    return system_seeds.empty() ? systems : static_cast<int>(system_seeds.size());
  }

  void validate() const {
    if (!(p >= 1 && p <= m && m <= n)) throw ConfigError("need 1 <= p <= m <= n");
    if (system_count() < 1 || trials < 1) throw ConfigError("systems and trials must be at least 1");
    if (y_star.size() != p) throw ConfigError("y_star length must equal p");
    if (!(init_lo < init_hi)) throw ConfigError("init box needs lo < hi");
    if (tau_u && !(*tau_u > 0.0)) throw ConfigError("tau_u must be positive");
    if (!(eps_u > 0.0) || !(delta_u > 0.0 && delta_u < 1.0))
      throw ConfigError("eps_u must be positive and delta_u in (0, 1)");
    if (!(ff_h_sim > 0.0) || !(h > 0.0) || !(h_eval > 0.0) || !(traj_dt > 0.0))
      throw ConfigError("step sizes must be positive");
    if (!(eta_b > 0.0) || iters_b < 1) throw ConfigError("baseline eta and iters must be positive");
    if (!(q1 > 0.0 && q2 > 0.0 && q1_b > 0.0 && q2_b > 0.0))
      throw ConfigError("cost weights must be positive");
    if (hk_lags < 4 || hk_lags % 2 != 0) throw ConfigError("hk_lags must be even and at least 4");
    if (hk_order < 0) throw ConfigError("hk_order must be nonnegative");
    if (N_id && *N_id < 1) throw ConfigError("N_id must be at least 1");
    if (N_eval < 1 || !(tau_eval > 0.0)) throw ConfigError("N_eval and tau_eval must be positive");
    if (threads < 1) throw ConfigError("threads must be at least 1");
    zo.validate();
    pgd.validate();
    omega.validate();
  }
};

struct MetricRow {
  int system_id = 0;
  int trial_id = 0;
  std::string method;  // "proposed" or "model-based"
  double steady_state_rel_err = std::numeric_limits<double>::quiet_NaN();
  double fbar = std::numeric_limits<double>::quiet_NaN();
  double u0_err = std::numeric_limits<double>::quiet_NaN();
  double wallclock_s = 0.0;
  std::string status = "ok";
};

struct TrajectorySample {
  int system_id;
  std::string method;
  double t;
  Vector y;
};

struct SystemInfo {
  int system_id = 0;
  std::uint64_t seed = 0;
  LtiPlant plant;
  Vector u_star;
  double tau_u = std::numeric_limits<double>::quiet_NaN();
  long N_id_ff = 0;    // identification length matched to the feedforward runs
  long N_id_full = 0;  // matched to feedforward plus tuning
  std::string status = "ok";
};

struct TrialTrace {
  int system_id = 0, trial_id = 0;
  std::vector<double> proposed_costs;  // analytic f(K^i) along the proposed iterates
  std::optional<PiGain> proposed_gain, baseline_gain;
  std::optional<int> identified_order;
  double baseline_fbar_h_scaled = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentResult {
  std::vector<SystemInfo> systems;
  std::vector<MetricRow> rows;  // (system, trial, proposed / model-based) order
  std::vector<TrialTrace> traces;
  std::vector<TrajectorySample> trajectories;
};

/// Short tag for the status column.
inline std::string error_tag(const std::exception& e) {
  if (dynamic_cast<const DivergenceError*>(&e)) return "divergence";
  if (dynamic_cast<const StabilityError*>(&e)) return "unstable";
  if (dynamic_cast<const IdentificationError*>(&e)) return "identification";
  if (dynamic_cast<const RankError*>(&e)) return "rank";
  if (dynamic_cast<const SingularityError*>(&e)) return "singular";
  if (dynamic_cast<const EstimationError*>(&e)) return "estimation";
  if (dynamic_cast<const NumericalError*>(&e)) return "numerical";
  if (dynamic_cast<const InputError*>(&e)) return "input";
  return "error";
}

/// Identification length whose simulated time equals the proposed method's:
/// (2 N N_sub T tau + (m + 1) tau_u) / h, or (m + 1) tau_u / h without tuning.
inline long matched_budget(const ExperimentConfig& cfg, double tau_u, bool with_tuning) {
  double t = static_cast<double>(cfg.m + 1) * tau_u;
  if (with_tuning)
    t += 2.0 * cfg.zo.N * cfg.zo.N_sub * cfg.pgd.T * cfg.zo.tau;
  return static_cast<long>(std::llround(t / cfg.h));
}

namespace detail {

inline constexpr std::uint64_t kSystemTag = 0x5e57e3ULL;
inline constexpr std::uint64_t kTrialTag = 0x7121a1ULL;

inline Matrix scaled_identity(Eigen::Index r, Eigen::Index c, double s) {
  return s * Matrix::Identity(r, c);
}

inline double feedforward_horizon(const ExperimentConfig& cfg, const LtiPlant& plant,
                                  const Equilibrium& eq) {
  if (cfg.tau_u) return *cfg.tau_u;
  const auto n = plant.n();
  const Matrix kp = scaled_identity(plant.m(), plant.p(), cfg.kp_probe_scale);
  const double Dx = (plant.init.mean(n) - eq.x_star).norm();
  const FeedforwardBounds b =
      feedforward_bounds(plant, kp, cfg.y_star, eq.u_star, plant.init.cov(n), Dx, cfg.eps_u,
                      cfg.delta_u, cfg.subgauss_norm, cfg.abs_const_c);
  if (!b.applicable) throw EstimationError("horizon bound is not applicable to this plant");
  return b.tau_lower;
}

struct TrialOutput {
  MetricRow proposed, baseline;
  TrialTrace trace;
  std::vector<TrajectorySample> traj;
};

inline void record_failure(MetricRow& row, const std::string& stage, const std::exception& e) {
  if (row.status == "ok") row.status = error_tag(e) + ":" + stage;
}

inline TrialOutput run_trial(const ExperimentConfig& cfg, const SystemInfo& sys, int t) {
  using clock = std::chrono::steady_clock;
  const LtiPlant& plant = sys.plant;
  const auto m = plant.m(), p = plant.p();
  const std::uint64_t ts = child_seed(cfg.master_seed, {kTrialTag, static_cast<std::uint64_t>(sys.system_id),
                                                        static_cast<std::uint64_t>(t)});
  const Matrix Q1 = scaled_identity(p, p, cfg.q1), Q2 = scaled_identity(p, p, cfg.q2);
  const bool traj = cfg.dump_trajectories && cfg.run_tuning && t == 0;
  const long traj_stride =
      std::max<long>(1, std::llround(cfg.traj_dt / cfg.h_eval));
  const long traj_stride_zoh = std::max<long>(1, std::llround(cfg.traj_dt / cfg.h));

  TrialOutput out;
  out.trace.system_id = sys.system_id;
  out.trace.trial_id = t;
  for (MetricRow* r : {&out.proposed, &out.baseline}) {
    r->system_id = sys.system_id;
    r->trial_id = t;
  }
  out.proposed.method = "proposed";
  out.baseline.method = "model-based";
  if (sys.status != "ok") {
    out.proposed.status = out.baseline.status = sys.status;
    return out;
  }

  // Proposed: feedforward estimation, then zeroth-order tuning.
  auto t0 = clock::now();
  std::optional<FeedforwardEstimate> ff;
  try {
    ff = estimate_feedforward(plant, scaled_identity(m, p, cfg.kp_probe_scale), cfg.y_star,
                              sys.tau_u, cfg.ff_h_sim, child_seed(ts, {1}));
    out.proposed.steady_state_rel_err = steady_state_rel_err(plant, ff->u_hat, cfg.y_star);
    out.proposed.u0_err = (ff->u_hat - sys.u_star).norm();
  } catch (const Error& e) {
    record_failure(out.proposed, "feedforward", e);
  }
  if (cfg.run_tuning && ff) {
    try {
      SimulatedRollouts ro(plant, Q1, Q2, cfg.zo.h_sim);
      ZoConfig zo = cfg.zo;
      zo.master_seed = child_seed(ts, {2});
      const PiGain K0(scaled_identity(m, p, cfg.k0_scale), scaled_identity(m, p, cfg.k0_scale));
      const TuneTrace tr = tune_gains(ro, K0, ff->u_hat, cfg.y_star, cfg.omega, zo, cfg.pgd,
                                      CostOracle{&plant, Q1, Q2});
      out.trace.proposed_costs = tr.analytic_costs;
      const PiGain K = tr.final_gain();
      out.trace.proposed_gain = K;
      out.proposed.fbar = eval_fbar(plant, K, sys.u_star, cfg.y_star, Q1, Q2, cfg.N_eval,
                                    cfg.tau_eval, cfg.h_eval, EvalMode::Continuous,
                                    child_seed(ts, {3}));
      if (traj) {
        const AugmentedClosedLoop cl = build_closed_loop(plant, K, Q1, Q2);
        const Equilibrium eq = compute_equilibrium(plant, cfg.y_star);
        const long steps = grid_steps(cfg.tau_eval, cfg.h_eval);
        const AugmentedSimulator sim(cl, cfg.tau_eval / static_cast<double>(steps));
        Rng rng = make_rng(child_seed(ts, {9}));
        sim.run(plant.init, eq.x_star, ff->u_hat - eq.u_star, cfg.tau_eval, rng,
                [&](long k, double tt, const Vector& s) {
                  const Vector e = sim.measure_error(s, rng);
                  if (k % traj_stride == 0)
                    out.traj.push_back({sys.system_id, "proposed", tt, cfg.y_star - e});
                });
      }
    } catch (const Error& e) {
      record_failure(out.proposed, "tune", e);
    }
  }
  if (cfg.record_wallclock)
    out.proposed.wallclock_s = std::chrono::duration<double>(clock::now() - t0).count();

  // Model-based: identification at the feedforward budget, then a second
  // identification at the full budget for the gain problem.
  t0 = clock::now();
  auto identify = [&](long N_id, std::uint64_t plant_seed, std::uint64_t input_seed) {
    SampledPlant sp(plant, cfg.h, plant_seed);
    HoKalmanConfig hk;
    hk.N_id = N_id;
    hk.input_std = cfg.hk_input_std;
    hk.order = cfg.hk_order;
    hk.lags = cfg.hk_lags;
    hk.residual_samples = cfg.hk_residual_samples;
    hk.seed = input_seed;
    return identify_ho_kalman(sp, hk);
  };
  try {
    const IdentifiedModel mdl = identify(sys.N_id_ff, child_seed(ts, {4}), child_seed(ts, {5}));
    const DiscreteEquilibrium deq = discrete_equilibrium(mdl.as_discrete(), cfg.y_star);
    out.baseline.steady_state_rel_err = steady_state_rel_err(plant, deq.u_star_d, cfg.y_star);
    out.baseline.u0_err = (deq.u_star_d - sys.u_star).norm();
  } catch (const Error& e) {
    record_failure(out.baseline, "feedforward", e);
  }
  if (cfg.run_tuning) {
    try {
      const IdentifiedModel mdl = identify(sys.N_id_full, child_seed(ts, {6}), child_seed(ts, {7}));
      out.trace.identified_order = static_cast<int>(mdl.n());
      const PiGain K0(scaled_identity(m, p, cfg.k0_b_scale), scaled_identity(m, p, cfg.k0_b_scale));
      const TuneTrace tr = tune_gains_modelbased(
          mdl.as_discrete(), K0, cfg.omega, cfg.eta_b, cfg.iters_b,
          scaled_identity(p, p, cfg.q1_b), scaled_identity(p, p, cfg.q2_b));
      const PiGain K = tr.final_gain();
      out.trace.baseline_gain = K;
      const FbarTerms ft = eval_fbar_terms(plant, K, sys.u_star, cfg.y_star, Q1, Q2, cfg.N_eval,
                                           cfg.tau_eval, cfg.h, EvalMode::Zoh, child_seed(ts, {8}));
      out.baseline.fbar = ft.total();
      // Same run with the integrator on the continuous scale, z(t) = h z_k.
      out.trace.baseline_fbar_h_scaled = ft.error_term + ft.h * ft.h * ft.integral_term;
      if (traj) {
        const Vector u_id = discrete_equilibrium(mdl.as_discrete(), cfg.y_star).u_star_d;
        Rng rng = make_rng(child_seed(ts, {10}));
        simulate_zoh_closed_loop(plant, K, u_id, cfg.y_star, cfg.tau_eval, cfg.h, rng,
                                 [&](const ZohStep& st) {
                                   if (st.k % traj_stride_zoh == 0)
                                     out.traj.push_back(
                                         {sys.system_id, "model-based", st.t, cfg.y_star - st.e});
                                 });
      }
    } catch (const Error& e) {
      record_failure(out.baseline, "tune", e);
    }
  }
  if (cfg.record_wallclock)
    out.baseline.wallclock_s = std::chrono::duration<double>(clock::now() - t0).count();
  return out;
}

}  // namespace detail

inline SystemInfo prepare_system(const ExperimentConfig& cfg, int s) {
  SystemInfo sys;
  sys.system_id = s;
  sys.seed = cfg.system_seeds.empty()
                 ? child_seed(cfg.master_seed, {detail::kSystemTag, static_cast<std::uint64_t>(s)})
                 : cfg.system_seeds[static_cast<std::size_t>(s)];
  Rng rng = make_rng(sys.seed);
  sys.plant = generate_random_plant(cfg.n, cfg.m, cfg.p, rng);
  sys.plant.init = InitialStateDistribution::uniform_box(cfg.init_lo, cfg.init_hi);
  sys.plant.seed = sys.seed;
  try {
    const Equilibrium eq = compute_equilibrium(sys.plant, cfg.y_star);
    sys.u_star = eq.u_star;
    sys.tau_u = detail::feedforward_horizon(cfg, sys.plant, eq);
    sys.N_id_ff = matched_budget(cfg, sys.tau_u, false);
    sys.N_id_full = cfg.N_id ? *cfg.N_id : matched_budget(cfg, sys.tau_u, true);
  } catch (const Error& e) {
    sys.status = error_tag(e) + ":setup";
  }
  return sys;
}

/// Runs every (system, trial) pair. Work items may execute on several
/// threads; results are stored by index so the output does not depend on
/// scheduling.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult res;
  const int S = cfg.system_count();
  for (int s = 0; s < S; ++s) res.systems.push_back(prepare_system(cfg, s));

  const std::size_t total = static_cast<std::size_t>(S) * static_cast<std::size_t>(cfg.trials);
  std::vector<detail::TrialOutput> outs(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      const int s = static_cast<int>(i / static_cast<std::size_t>(cfg.trials));
      const int t = static_cast<int>(i % static_cast<std::size_t>(cfg.trials));
      outs[i] = detail::run_trial(cfg, res.systems[static_cast<std::size_t>(s)], t);
    }
  };
  const int nthreads = std::min<int>(cfg.threads, static_cast<int>(total));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < nthreads; ++k) pool.emplace_back(worker);
  }
  for (auto& o : outs) {
    res.rows.push_back(std::move(o.proposed));
    res.rows.push_back(std::move(o.baseline));
    res.traces.push_back(std::move(o.trace));
    for (auto& tr : o.traj) res.trajectories.push_back(std::move(tr));
  }
  return res;
}

struct Summary {
  int n_ok = 0;
  double median = std::numeric_limits<double>::quiet_NaN();
  double q1 = std::numeric_limits<double>::quiet_NaN();
  double q3 = std::numeric_limits<double>::quiet_NaN();
  double min = std::numeric_limits<double>::quiet_NaN();
  double max = std::numeric_limits<double>::quiet_NaN();
  double mean = std::numeric_limits<double>::quiet_NaN();
};

/// Linear-interpolation quantile of sorted data (the usual "type 7").
inline double quantile_sorted(const std::vector<double>& v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Ignores NaN entries (metrics a failed stage never produced).
inline Summary summarize(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  Summary s;
  s.n_ok = static_cast<int>(v.size());
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  s.median = quantile_sorted(v, 0.5);
  s.q1 = quantile_sorted(v, 0.25);
  s.q3 = quantile_sorted(v, 0.75);
  s.min = v.front();
  s.max = v.back();
  double acc = 0.0;
  for (double x : v) acc += x;
  s.mean = acc / static_cast<double>(v.size());
  return s;
}

struct MethodAggregate {
  Summary steady_state_rel_err, fbar, u0_err;
  int failures = 0;
};

struct SystemAggregate {
  int system_id = 0;
  MethodAggregate proposed, baseline;
  double fbar_ratio_median = std::numeric_limits<double>::quiet_NaN();
  double fbar_ratio_mean = std::numeric_limits<double>::quiet_NaN();
  double overshoot_proposed = std::numeric_limits<double>::quiet_NaN();
  double overshoot_baseline = std::numeric_limits<double>::quiet_NaN();
};

/// Largest relative excursion max_t max_i (y_i(t) - y*_i) / |y*_i|.
inline double overshoot(const std::vector<TrajectorySample>& tr, int system_id,
                        const std::string& method, const Vector& y_star) {
  double best = std::numeric_limits<double>::quiet_NaN();
  for (const auto& s : tr) {
    if (s.system_id != system_id || s.method != method) continue;
    for (Eigen::Index i = 0; i < y_star.size(); ++i) {
      if (y_star(i) == 0.0) continue;
      const double v = (s.y(i) - y_star(i)) / std::abs(y_star(i));
      if (std::isnan(best) || v > best) best = v;
    }
  }
  return best;
}

/// Per-system aggregates, recomputable from the rows alone (plus the
/// trajectories for the overshoot columns).
inline std::vector<SystemAggregate> aggregate(const std::vector<MetricRow>& rows,
                                              const std::vector<TrajectorySample>& traj,
                                              const Vector& y_star) {
  int S = 0;
  for (const auto& r : rows) S = std::max(S, r.system_id + 1);
  std::vector<SystemAggregate> out;
  for (int s = 0; s < S; ++s) {
    SystemAggregate a;
    a.system_id = s;
    for (const char* method : {"proposed", "model-based"}) {
      std::vector<double> ss, fb, ue;
      int fails = 0;
      for (const auto& r : rows) {
        if (r.system_id != s || r.method != method) continue;
        ss.push_back(r.steady_state_rel_err);
        fb.push_back(r.fbar);
        ue.push_back(r.u0_err);
        if (r.status != "ok") ++fails;
      }
      MethodAggregate& m = std::string(method) == "proposed" ? a.proposed : a.baseline;
      m.steady_state_rel_err = summarize(ss);
      m.fbar = summarize(fb);
      m.u0_err = summarize(ue);
      m.failures = fails;
    }
    a.fbar_ratio_median = a.proposed.fbar.median / a.baseline.fbar.median;
    a.fbar_ratio_mean = a.proposed.fbar.mean / a.baseline.fbar.mean;
    a.overshoot_proposed = overshoot(traj, s, "proposed", y_star);
    a.overshoot_baseline = overshoot(traj, s, "model-based", y_star);
    out.push_back(a);
  }
  return out;
}

}  // namespace pi2dof
