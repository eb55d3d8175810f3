// pi2dof: model-free 2DOF PI tuning and the model-based comparison, from the
// command line. Every artifact is a pure function of its inputs and --seed.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <pi2dof/baseline.hpp>
#include <pi2dof/bench.hpp>
#include <pi2dof/feedforward.hpp>
#include <pi2dof/io.hpp>
#include <pi2dof/plant.hpp>
#include <pi2dof/tuner.hpp>

namespace fs = std::filesystem;
using namespace pi2dof;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string config;
  std::string out_dir = ".";
};

std::string resolve(const Globals& g, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(g.out_dir) / path).string();
}

void ensure_out_dir(const Globals& g) {
  std::error_code ec;
  fs::create_directories(g.out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + g.out_dir);
}

ExperimentConfig load_config(const Globals& g) {
  ExperimentConfig c = g.config.empty() ? ExperimentConfig{} : experiment_config_from(read_json_file(g.config));
  if (g.seed_given) c.master_seed = g.seed;
  return c;
}

Vector parse_list(const std::string& s, const char* what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      v.push_back(parse_real(cell));
    } catch (const std::exception&) {
      throw ConfigError(std::string("bad value in ") + what + ": '" + cell + "'");
    }
  }
  if (v.empty()) throw ConfigError(std::string(what) + " is empty");
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

bool is_number(const std::string& s) {
  try {
    parse_real(s);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

Vector y_star_for(const ExperimentConfig& c, const LtiPlant& pl, const std::string& flag) {
  if (!flag.empty()) return parse_list(flag, "--y-star");
  if (c.y_star.size() == pl.p()) return c.y_star;
  return Vector::Constant(pl.p(), 5.0);
}

/// --kp-probe: a scale s for s I, or a JSON file holding an m x p matrix.
Matrix kp_probe_for(const std::string& arg, double default_scale, const LtiPlant& pl) {
  if (arg.empty()) return default_scale * Matrix::Identity(pl.m(), pl.p());
  if (is_number(arg)) return parse_real(arg) * Matrix::Identity(pl.m(), pl.p());
  Matrix k = matrix_from(read_json_file(arg), "kp-probe");
  require_shape(k, pl.m(), pl.p(), "K_P'");
  return k;
}

FeedforwardBounds true_bounds(const LtiPlant& pl, const Matrix& kp, const Vector& ys,
                           const ExperimentConfig& c) {
  const Equilibrium eq = compute_equilibrium(pl, ys);
  const auto n = pl.n();
  return feedforward_bounds(pl, kp, ys, eq.u_star, pl.init.cov(n),
                         (pl.init.mean(n) - eq.x_star).norm(), c.eps_u, c.delta_u,
                         c.subgauss_norm, c.abs_const_c);
}

/// Gain from a tune trace ("final"), a baseline result ("K") or a bare gain.
PiGain gain_from_file(const std::string& path) {
  const json j = read_json_file(path);
  if (j.contains("final")) return gain_from(j["final"]);
  if (j.contains("K")) return gain_from(j["K"]);
  return gain_from(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-free tuning of 2DOF PI controllers for noisy MIMO LTI plants"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  Globals g;
  app.add_option_function<std::uint64_t>(
         "--seed", [&](const std::uint64_t& s) { g.seed = s, g.seed_given = true; },
         "Master seed")
      ->configurable(false);
  app.add_option("--config", g.config, "Experiment/config JSON file");
  app.add_option("--out-dir", g.out_dir, "Directory for output artifacts");

  // gen-system
  auto* gen = app.add_subcommand("gen-system", "Draw a random plant of the experiment family");
  gen->fallthrough();
  long gn = 0, gm = 0, gp = 0;
  std::string gen_out = "plant.json";
  gen->add_option("--n", gn, "State dimension");
  gen->add_option("--m", gm, "Input dimension");
  gen->add_option("--p", gp, "Output dimension");
  gen->add_option("--out", gen_out, "Output plant JSON");

  // feedforward
  auto* ffc = app.add_subcommand("feedforward", "Estimate the equilibrium input from m+1 experiments");
  ffc->fallthrough();
  std::string ff_plant, ff_tau = "bound", ff_kp, ff_out = "ff.json", ff_ystar;
  double ff_tau_large = 200.0, ff_h = -1.0;
  ffc->add_option("--plant", ff_plant, "Plant JSON")->required();
  ffc->add_option("--tau-u", ff_tau, "Horizon: a number, 'auto' (decay fit) or 'bound' (true model)");
  ffc->add_option("--tau-large", ff_tau_large, "Horizon of the decay-fit experiment for --tau-u auto");
  ffc->add_option("--kp-probe", ff_kp, "Probe gain: a scale of I or a JSON matrix file");
  ffc->add_option("--h-sim", ff_h, "Simulation grid");
  ffc->add_option("--y-star", ff_ystar, "Set-point, comma separated");
  ffc->add_option("--out", ff_out, "Output JSON");

  // tune
  auto* tun = app.add_subcommand("tune", "Zeroth-order projected gradient tuning of (K_P, K_I)");
  tun->fallthrough();
  std::string t_plant, t_ff, t_omega, t_trace = "trace.json", t_ystar, t_pairs;
  std::optional<int> t_N, t_Nsub, t_T;
  std::optional<double> t_tau, t_r, t_eta, t_h, t_k0;
  bool t_nostop = false;
  tun->add_option("--plant", t_plant, "Plant JSON (the rollout simulator)")->required();
  tun->add_option("--ff", t_ff, "Feedforward JSON from the feedforward subcommand")->required();
  tun->add_option("--omega", t_omega, "Frobenius radii kp,ki");
  tun->add_option("--N", t_N, "Directions per iteration");
  tun->add_option("--Nsub", t_Nsub, "Rollouts per evaluation");
  tun->add_option("--tau", t_tau, "Rollout horizon");
  tun->add_option("--r", t_r, "Smoothing radius");
  tun->add_option("--eta", t_eta, "Step size");
  tun->add_option("--T", t_T, "Iterations");
  tun->add_option("--h-sim", t_h, "Simulation grid");
  tun->add_option("--k0", t_k0, "Initial gain scale s for K0 = (s I, s I)");
  tun->add_option("--pair-seeding", t_pairs, "independent or common");
  tun->add_option("--y-star", t_ystar, "Set-point, comma separated");
  tun->add_flag("--no-stop-test", t_nostop, "Always run T iterations");
  tun->add_option("--trace", t_trace, "Output trace JSON");

  // baseline
  auto* bas = app.add_subcommand("baseline", "Ho-Kalman identification plus model-based gain design");
  bas->fallthrough();
  std::string b_plant, b_nid = "auto", b_order = "auto", b_out = "baseline.json", b_ystar, b_tau;
  std::optional<double> b_h, b_eta;
  std::optional<long> b_iters;
  bas->add_option("--plant", b_plant, "Plant JSON (the data source)")->required();
  bas->add_option("--h", b_h, "Sampling period");
  bas->add_option("--Nid", b_nid, "Identification length or 'auto' (matched budget)");
  bas->add_option("--order", b_order, "Model order or 'auto'");
  bas->add_option("--eta", b_eta, "Step size");
  bas->add_option("--iters", b_iters, "Gradient iterations");
  bas->add_option("--tau-u", b_tau, "Feedforward horizon used for the matched budget");
  bas->add_option("--y-star", b_ystar, "Set-point, comma separated");
  bas->add_option("--out", b_out, "Output JSON");

  // eval
  auto* evl = app.add_subcommand("eval", "Time-averaged closed-loop cost of a gain");
  evl->fallthrough();
  std::string e_plant, e_gain, e_u0 = "ustar", e_mode = "continuous", e_out = "eval.json", e_ystar;
  std::optional<int> e_N;
  std::optional<double> e_tau, e_h;
  evl->add_option("--plant", e_plant, "Plant JSON")->required();
  evl->add_option("--gain", e_gain, "Trace, baseline or gain JSON")->required();
  evl->add_option("--u0", e_u0, "'ustar', a feedforward/baseline JSON, or a comma list");
  evl->add_option("--mode", e_mode, "continuous or zoh")->check(CLI::IsMember({"continuous", "zoh"}));
  evl->add_option("--N-eval", e_N, "Number of runs");
  evl->add_option("--tau-eval", e_tau, "Horizon");
  evl->add_option("--h", e_h, "Grid (zoh: the sampling period)");
  evl->add_option("--y-star", e_ystar, "Set-point, comma separated");
  evl->add_option("--out", e_out, "Output JSON");

  // experiment
  auto* exc = app.add_subcommand("experiment", "Run the full comparison and write CSV/JSON artifacts");
  exc->fallthrough();
  std::optional<int> x_systems, x_trials, x_threads;
  bool x_notune = false, x_timing = false;
  exc->add_option("--systems", x_systems, "Number of systems");
  exc->add_option("--trials", x_trials, "Trials per system");
  exc->add_option("--threads", x_threads, "Worker threads");
  exc->add_flag("--no-tuning", x_notune, "Feedforward comparison only");
  exc->add_flag("--timing", x_timing, "Record wall-clock seconds (output no longer reproducible)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    ensure_out_dir(g);

    if (*gen) {
      ExperimentConfig c = load_config(g);
      if (gn > 0) c.n = gn;
      if (gm > 0) c.m = gm;
      if (gp > 0) c.p = gp;
      if (!(c.p >= 1 && c.p <= c.m && c.m <= c.n)) throw ConfigError("need 1 <= p <= m <= n");
      Rng rng = make_rng(g.seed);
      LtiPlant pl = generate_random_plant(c.n, c.m, c.p, rng);
      pl.init = InitialStateDistribution::uniform_box(c.init_lo, c.init_hi);
      pl.seed = g.seed;
      write_json_file(resolve(g, gen_out), to_json(pl));
      return 0;
    }

    if (*ffc) {
      const ExperimentConfig c = load_config(g);
      const LtiPlant pl = plant_from(read_json_file(ff_plant));
      const Vector ys = y_star_for(c, pl, ff_ystar);
      const Matrix kp = kp_probe_for(ff_kp, c.kp_probe_scale, pl);
      const double h = ff_h > 0.0 ? ff_h : c.ff_h_sim;
      json diag;
      double tau_u;
      if (ff_tau == "auto") {
        const double zhat = estimate_decay_constant(pl, kp, ys, ff_tau_large, h, child_seed(g.seed, {0xdeca7}));
        const FeedforwardBounds b = true_bounds(pl, kp, ys, c);
        tau_u = horizon_bound(zhat, b.M1, b.M2, b.M3, c.eps_u);
        if (!(tau_u > 0.0) || !std::isfinite(tau_u))
          throw EstimationError("horizon from the estimated decay constant is not positive");
        diag = {{"normZ_estimate", real_json(zhat)}, {"bounds", to_json(b)}};
      } else if (ff_tau == "bound") {
        const FeedforwardBounds b = true_bounds(pl, kp, ys, c);
        if (!b.applicable) throw EstimationError("horizon bound is not applicable to this plant");
        tau_u = b.tau_lower;
        diag = {{"bounds", to_json(b)}};
      } else {
        if (!is_number(ff_tau)) throw ConfigError("--tau-u must be a number, 'auto' or 'bound'");
        tau_u = parse_real(ff_tau);
      }
      const FeedforwardEstimate ff = estimate_feedforward(pl, kp, ys, tau_u, h, g.seed);
      json j = to_json(ff);
      j["y_star"] = vec_json(ys);
      j["h_sim"] = h;
      j["seed"] = g.seed;
      j["tau_u_source"] = ff_tau;
      for (auto it = diag.begin(); it != diag.end(); ++it) j["diagnostics"][it.key()] = it.value();
      write_json_file(resolve(g, ff_out), j);
      return 0;
    }

    if (*tun) {
      const ExperimentConfig c = load_config(g);
      const LtiPlant pl = plant_from(read_json_file(t_plant));
      const json ffj = read_json_file(t_ff);
      const Vector u_hat = vector_from(ffj.at("u_hat"), "u_hat");
      const Vector ys = !t_ystar.empty()       ? parse_list(t_ystar, "--y-star")
                        : ffj.contains("y_star") ? vector_from(ffj["y_star"], "y_star")
                                                 : y_star_for(c, pl, "");
      ZoConfig zo = c.zo;
      PgdConfig pgd = c.pgd;
      pgd.stop_test = true;  // Algorithm default; --no-stop-test or the config turns it off
      if (!g.config.empty()) pgd.stop_test = c.pgd.stop_test;
      if (t_nostop) pgd.stop_test = false;
      if (t_N) zo.N = *t_N;
      if (t_Nsub) zo.N_sub = *t_Nsub;
      if (t_tau) zo.tau = *t_tau;
      if (t_r) zo.r = *t_r;
      if (t_h) zo.h_sim = *t_h;
      if (t_eta) pgd.eta = *t_eta;
      if (t_T) pgd.T = *t_T;
      if (!t_pairs.empty()) {
        if (t_pairs == "independent")
          zo.pair_seeding = PairSeeding::Independent;
        else if (t_pairs == "common")
          zo.pair_seeding = PairSeeding::Common;
        else
          throw ConfigError("--pair-seeding must be independent or common");
      }
      zo.master_seed = g.seed;
      ConstraintBox omega = c.omega;
      if (!t_omega.empty()) {
        const Vector r = parse_list(t_omega, "--omega");
        if (r.size() != 2) throw ConfigError("--omega takes kp,ki");
        omega = ConstraintBox{r(0), r(1)};
      }
      const double k0 = t_k0 ? *t_k0 : c.k0_scale;
      const Matrix Q1 = c.q1 * Matrix::Identity(pl.p(), pl.p());
      const Matrix Q2 = c.q2 * Matrix::Identity(pl.p(), pl.p());
      const PiGain K0(k0 * Matrix::Identity(pl.m(), pl.p()), k0 * Matrix::Identity(pl.m(), pl.p()));
      SimulatedRollouts ro(pl, Q1, Q2, zo.h_sim);
      const TuneTrace tr = tune_gains(ro, K0, u_hat, ys, omega, zo, pgd, CostOracle{&pl, Q1, Q2});
      json j = to_json(tr);
      j["seed"] = g.seed;
      j["params"] = {{"N", zo.N},           {"N_sub", zo.N_sub},     {"tau", zo.tau},
                     {"r", zo.r},           {"h_sim", zo.h_sim},     {"eta", pgd.eta},
                     {"T", pgd.T},          {"stop_test", pgd.stop_test},
                     {"omega", {omega.kp_radius, omega.ki_radius}},
                     {"q1", c.q1},          {"q2", c.q2},            {"k0_scale", k0}};
      write_json_file(resolve(g, t_trace), j);
      return 0;
    }

    if (*bas) {
      const ExperimentConfig c = load_config(g);
      const LtiPlant pl = plant_from(read_json_file(b_plant));
      const Vector ys = y_star_for(c, pl, b_ystar);
      ExperimentConfig cc = c;
      cc.m = pl.m();
      if (b_h) cc.h = *b_h;
      long N_id;
      if (b_nid == "auto") {
        double tau_u;
        if (!b_tau.empty()) {
          tau_u = parse_real(b_tau);
        } else if (c.tau_u) {
          tau_u = *c.tau_u;
        } else {
          const FeedforwardBounds b = true_bounds(pl, c.kp_probe_scale * Matrix::Identity(pl.m(), pl.p()), ys, c);
          if (!b.applicable) throw EstimationError("horizon bound is not applicable to this plant");
          tau_u = b.tau_lower;
        }
        N_id = matched_budget(cc, tau_u, true);
      } else {
        if (!is_number(b_nid)) throw ConfigError("--Nid must be an integer or 'auto'");
        N_id = static_cast<long>(parse_real(b_nid));
      }
      HoKalmanConfig hk;
      hk.N_id = N_id;
      hk.input_std = c.hk_input_std;
      hk.lags = c.hk_lags;
      hk.residual_samples = c.hk_residual_samples;
      hk.order = c.hk_order;
      if (b_order != "auto") {
        if (!is_number(b_order)) throw ConfigError("--order must be an integer or 'auto'");
        hk.order = static_cast<int>(parse_real(b_order));
        if (hk.order < 1) throw ConfigError("--order must be positive");
      }
      hk.seed = child_seed(g.seed, {1});
      SampledPlant sp(pl, cc.h, child_seed(g.seed, {0}));
      const IdentifiedModel mdl = identify_ho_kalman(sp, hk);
      const DiscretePlant d = mdl.as_discrete();
      const DiscreteEquilibrium deq = discrete_equilibrium(d, ys);
      const double eta = b_eta ? *b_eta : c.eta_b;
      const long iters = b_iters ? *b_iters : c.iters_b;
      const Matrix I = Matrix::Identity(pl.m(), pl.p());
      const PiGain K0(c.k0_b_scale * I, c.k0_b_scale * I);
      const TuneTrace tr = tune_gains_modelbased(d, K0, c.omega, eta, iters,
                                                 c.q1_b * Matrix::Identity(pl.p(), pl.p()),
                                                 c.q2_b * Matrix::Identity(pl.p(), pl.p()));
      json j;
      j["model"] = to_json(mdl);
      j["u_star_id"] = vec_json(deq.u_star_d);
      j["K"] = gain_json(tr.final_gain());
      j["N_id"] = N_id;
      j["h"] = cc.h;
      j["eta"] = eta;
      j["iters"] = iters;
      j["y_star"] = vec_json(ys);
      j["seed"] = g.seed;
      j["steady_state_rel_err"] = real_json(steady_state_rel_err(pl, deq.u_star_d, ys));
      write_json_file(resolve(g, b_out), j);
      return 0;
    }

    if (*evl) {
      const ExperimentConfig c = load_config(g);
      const LtiPlant pl = plant_from(read_json_file(e_plant));
      const Vector ys = y_star_for(c, pl, e_ystar);
      const PiGain K = gain_from_file(e_gain);
      Vector u0;
      if (e_u0 == "ustar") {
        u0 = compute_equilibrium(pl, ys).u_star;
      } else if (fs::exists(e_u0)) {
        const json j = read_json_file(e_u0);
        if (j.contains("u_hat"))
          u0 = vector_from(j["u_hat"], "u_hat");
        else if (j.contains("u_star_id"))
          u0 = vector_from(j["u_star_id"], "u_star_id");
        else
          throw ConfigError("--u0 file has neither u_hat nor u_star_id");
      } else {
        u0 = parse_list(e_u0, "--u0");
      }
      const EvalMode mode = e_mode == "zoh" ? EvalMode::Zoh : EvalMode::Continuous;
      const int N = e_N ? *e_N : c.N_eval;
      const double tau = e_tau ? *e_tau : c.tau_eval;
      const double h = e_h ? *e_h : (mode == EvalMode::Zoh ? c.h : c.h_eval);
      const Matrix Q1 = c.q1 * Matrix::Identity(pl.p(), pl.p());
      const Matrix Q2 = c.q2 * Matrix::Identity(pl.p(), pl.p());
      const double fbar = eval_fbar(pl, K, u0, ys, Q1, Q2, N, tau, h, mode, g.seed);
      json j = {{"fbar", real_json(fbar)}, {"mode", e_mode}, {"N_eval", N},  {"tau_eval", tau},
                {"h", h},                  {"u0", vec_json(u0)}, {"gain", gain_json(K)},
                {"seed", g.seed}};
      write_json_file(resolve(g, e_out), j);
      return 0;
    }

    if (*exc) {
      ExperimentConfig c = load_config(g);
      if (x_systems) {
        c.systems = *x_systems;
        c.system_seeds.clear();
      }
      if (x_trials) c.trials = *x_trials;
      if (x_threads) c.threads = *x_threads;
      if (x_notune) c.run_tuning = false;
      if (x_timing) c.record_wallclock = true;
      const ExperimentResult res = run_experiment(c);
      {
        std::ostringstream os;
        write_metrics_csv(os, res.rows);
        write_text_file(resolve(g, "metrics.csv"), os.str());
      }
      write_json_file(resolve(g, "aggregates.json"), aggregates_json(res, c));
      if (!res.trajectories.empty()) {
        std::ostringstream os;
        write_trajectories_csv(os, res.trajectories, c.p);
        write_text_file(resolve(g, "trajectories.csv"), os.str());
      }
      write_text_file(resolve(g, "plot.gp"), gnuplot_script(c.p));
      return 0;
    }
  } catch (const InputError& e) {
    std::cerr << "pi2dof: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "pi2dof: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "pi2dof: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "pi2dof: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
