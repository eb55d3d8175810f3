#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "baseline.hpp"
#include "bench.hpp"
#include "feedforward.hpp"
#include "plant.hpp"
#include "tuner.hpp"

namespace pi2dof {

using json = nlohmann::json;

// ---------------------------------------------------------------- numbers

/// 17 significant digits; non-finite values spelled nan / inf / -inf.
inline std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// JSON has no non-finite numbers; they are written as null.
inline json real_json(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline double real_from(const json& j, const char* what) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) throw ConfigError(std::string(what) + " must be a number");
  return j.get<double>();
}

// ---------------------------------------------------------------- matrices

inline json to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(real_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json vec_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(real_json(v(i)));
  return a;
}

inline Matrix matrix_from(const json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of rows");
  const auto r = static_cast<Eigen::Index>(j.size());
  if (r == 0) return Matrix(0, 0);
  if (!j[0].is_array()) throw ConfigError(std::string(what) + " must be an array of rows");
  const auto c = static_cast<Eigen::Index>(j[0].size());
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c)
      throw DimensionError(std::string(what) + " has ragged rows");
    for (Eigen::Index k = 0; k < c; ++k) m(i, k) = real_from(row[static_cast<std::size_t>(k)], what);
  }
  return m;
}

inline Vector vector_from(const json& j, const char* what) {
  if (j.is_number()) return Vector::Constant(1, j.get<double>());
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = real_from(j[i], what);
  return v;
}

inline json gain_json(const PiGain& K) { return {{"kp", to_json(K.kp)}, {"ki", to_json(K.ki)}}; }

inline PiGain gain_from(const json& j) {
  if (!j.is_object() || !j.contains("kp") || !j.contains("ki"))
    throw ConfigError("gain needs kp and ki");
  return PiGain(matrix_from(j["kp"], "kp"), matrix_from(j["ki"], "ki"));
}

// ---------------------------------------------------------------- files

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
  if (!out) throw ConfigError("write failed for " + path);
}

inline void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

/// Rejects keys outside `allowed`, so a misspelled option is an error rather
/// than a silently ignored default.
inline void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

// ---------------------------------------------------------------- plant

inline json to_json(const InitialStateDistribution& d) {
  using K = InitialStateDistribution::Kind;
  switch (d.kind) {
    case K::UniformBox:
      return {{"kind", "uniform_box"}, {"params", {{"lo", d.lo}, {"hi", d.hi}}}};
    case K::Gaussian:
      return {{"kind", "gaussian"},
              {"params", {{"mean", vec_json(d.mean_vec)}, {"cov", to_json(d.cov_mat)}}}};
    case K::Point:
      return {{"kind", "point"}, {"params", {{"x0", vec_json(d.mean_vec)}}}};
  }
  return nullptr;
}

inline InitialStateDistribution init_from(const json& j) {
  check_keys(j, {"kind", "params"}, "init");
  const std::string kind = j.at("kind").get<std::string>();
  const json params = j.value("params", json::object());
  if (kind == "uniform_box") {
    check_keys(params, {"lo", "hi"}, "init.params");
    return InitialStateDistribution::uniform_box(params.value("lo", -3.0), params.value("hi", 3.0));
  }
  if (kind == "gaussian") {
    check_keys(params, {"mean", "cov"}, "init.params");
    return InitialStateDistribution::gaussian(vector_from(params.at("mean"), "init mean"),
                                              matrix_from(params.at("cov"), "init cov"));
  }
  if (kind == "point") {
    check_keys(params, {"x0"}, "init.params");
    return InitialStateDistribution::point(vector_from(params.at("x0"), "init x0"));
  }
  throw ConfigError("unknown init kind '" + kind + "'");
}

inline json to_json(const LtiPlant& pl) {
  json j;
  j["n"] = pl.n();
  j["m"] = pl.m();
  j["p"] = pl.p();
  j["A"] = to_json(pl.A);
  j["B"] = to_json(pl.B);
  j["C"] = to_json(pl.C);
  j["W"] = to_json(pl.W);
  j["V"] = to_json(pl.V);
  j["init"] = to_json(pl.init);
  j["seed"] = pl.seed ? json(*pl.seed) : json(nullptr);
  return j;
}

inline LtiPlant plant_from(const json& j) {
  try {
    check_keys(j, {"n", "m", "p", "A", "B", "C", "W", "V", "init", "seed"}, "plant");
    LtiPlant pl;
    pl.A = matrix_from(j.at("A"), "A");
    pl.B = matrix_from(j.at("B"), "B");
    pl.C = matrix_from(j.at("C"), "C");
    pl.W = matrix_from(j.at("W"), "W");
    pl.V = matrix_from(j.at("V"), "V");
    if (j.contains("init")) pl.init = init_from(j["init"]);
    if (j.contains("seed") && !j["seed"].is_null()) pl.seed = j["seed"].get<std::uint64_t>();
    for (const char* k : {"n", "m", "p"})
      if (!j.contains(k)) throw ConfigError(std::string("plant is missing ") + k);
    if (j["n"].get<long>() != pl.A.rows() || j["m"].get<long>() != pl.B.cols() ||
        j["p"].get<long>() != pl.C.rows())
      throw DimensionError("plant n, m, p disagree with the matrices");
    pl.validate();
    pl.init.validate(pl.n());
    return pl;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed plant: ") + e.what());
  }
}

// ---------------------------------------------------------------- results

inline json to_json(const FeedforwardEstimate& ff) {
  json j;
  j["u_hat"] = vec_json(ff.u_hat);
  j["E"] = to_json(ff.E);
  j["tau_u"] = real_json(ff.tau_u);
  j["min_sv_E"] = real_json(ff.min_sv_E);
  j["diagnostics"] = {{"e0_tau", vec_json(ff.e0_tau)},
                      {"e_probe", to_json(ff.e_probe)},
                      {"kp_probe", to_json(ff.Kp_probe)}};
  return j;
}

inline json to_json(const TuneTrace& tr) {
  json j;
  json it = json::array(), gr = json::array(), co = json::array();
  for (const auto& k : tr.iterates) it.push_back(gain_json(k));
  for (const auto& g : tr.est_gradients) gr.push_back(to_json(g));
  for (double c : tr.analytic_costs) co.push_back(real_json(c));
  j["iterates"] = std::move(it);
  j["est_gradients"] = std::move(gr);
  j["analytic_costs"] = std::move(co);
  j["stopped_at"] = tr.stopped_at ? json(*tr.stopped_at) : json(nullptr);
  j["final"] = gain_json(tr.final_gain());
  return j;
}

inline json to_json(const IdentifiedModel& mdl) {
  json sv = json::array();
  for (double s : mdl.hankel_sv) sv.push_back(real_json(s));
  return {{"order", mdl.n()},   {"h", mdl.h},          {"A", to_json(mdl.A)},
          {"B", to_json(mdl.B)}, {"C", to_json(mdl.C)}, {"W", to_json(mdl.W)},
          {"V", to_json(mdl.V)}, {"stable", mdl.stable}, {"hankel_sv", sv}};
}

inline json to_json(const FeedforwardBounds& b) {
  return {{"normZ", real_json(b.normZ)},
          {"lambda_min_Z", real_json(b.lambda_min_Z)},
          {"tau_lower", real_json(b.tau_lower)},
          {"M1", real_json(b.M1)},
          {"M2", real_json(b.M2)},
          {"M3", real_json(b.M3)},
          {"M4", real_json(b.M4)},
          {"Sbar", real_json(b.Sbar)},
          {"sigma_p_Estar", real_json(b.sigma_p_Estar)},
          {"trace_CSC", real_json(b.trace_CSC)},
          {"noise_free", b.noise_free},
          {"precondition_holds", b.precondition_holds},
          {"applicable", b.applicable}};
}

// ---------------------------------------------------------------- config

inline ExperimentConfig experiment_config_from(const json& j) {
  ExperimentConfig c;
  try {
    check_keys(j,
               {"n", "m", "p", "systems", "system_seeds", "trials", "master_seed", "y_star",
                "init", "feedforward", "tuning", "baseline", "eval", "threads",
                "record_wallclock", "dump_trajectories", "traj_dt"},
               "config");
    c.n = j.value("n", c.n);
    c.m = j.value("m", c.m);
    c.p = j.value("p", c.p);
    c.systems = j.value("systems", c.systems);
    if (j.contains("system_seeds")) c.system_seeds = j["system_seeds"].get<std::vector<std::uint64_t>>();
    c.trials = j.value("trials", c.trials);
    c.master_seed = j.value("master_seed", c.master_seed);
    c.y_star = j.contains("y_star") ? vector_from(j["y_star"], "y_star")
                                    : Vector::Constant(c.p, 5.0);
    if (j.contains("init")) {
      const json& in = j["init"];
      check_keys(in, {"lo", "hi"}, "init");
      c.init_lo = in.value("lo", c.init_lo);
      c.init_hi = in.value("hi", c.init_hi);
    }
    if (j.contains("feedforward")) {
      const json& f = j["feedforward"];
      check_keys(f, {"tau_u", "kp_probe_scale", "eps_u", "delta_u", "subgauss_norm", "abs_const_c", "h_sim"},
                 "feedforward");
      if (f.contains("tau_u") && !f["tau_u"].is_null()) {
        if (f["tau_u"].is_string()) {
          if (f["tau_u"].get<std::string>() != "bound")
            throw ConfigError("feedforward.tau_u must be a number, null or \"bound\"");
        } else {
          c.tau_u = f["tau_u"].get<double>();
        }
      }
      c.kp_probe_scale = f.value("kp_probe_scale", c.kp_probe_scale);
      c.eps_u = f.value("eps_u", c.eps_u);
      c.delta_u = f.value("delta_u", c.delta_u);
      c.subgauss_norm = f.value("subgauss_norm", c.subgauss_norm);
      c.abs_const_c = f.value("abs_const_c", c.abs_const_c);
      c.ff_h_sim = f.value("h_sim", c.ff_h_sim);
    }
    if (j.contains("tuning")) {
      const json& t = j["tuning"];
      check_keys(t,
                 {"enabled", "N", "N_sub", "tau", "r", "h_sim", "pair_seeding", "eta", "T",
                  "stop_test", "eps_stop", "q1", "q2", "k0_scale", "omega"},
                 "tuning");
      c.run_tuning = t.value("enabled", c.run_tuning);
      c.zo.N = t.value("N", c.zo.N);
      c.zo.N_sub = t.value("N_sub", c.zo.N_sub);
      c.zo.tau = t.value("tau", c.zo.tau);
      c.zo.r = t.value("r", c.zo.r);
      c.zo.h_sim = t.value("h_sim", c.zo.h_sim);
      if (t.contains("pair_seeding")) {
        const std::string ps = t["pair_seeding"].get<std::string>();
        if (ps == "independent")
          c.zo.pair_seeding = PairSeeding::Independent;
        else if (ps == "common")
          c.zo.pair_seeding = PairSeeding::Common;
        else
          throw ConfigError("pair_seeding must be independent or common");
      }
      c.pgd.eta = t.value("eta", c.pgd.eta);
      c.pgd.T = t.value("T", c.pgd.T);
      c.pgd.stop_test = t.value("stop_test", c.pgd.stop_test);
      c.pgd.eps_stop = t.value("eps_stop", c.pgd.eps_stop);
      c.q1 = t.value("q1", c.q1);
      c.q2 = t.value("q2", c.q2);
      c.k0_scale = t.value("k0_scale", c.k0_scale);
      if (t.contains("omega")) {
        check_keys(t["omega"], {"kp_radius", "ki_radius"}, "tuning.omega");
        c.omega.kp_radius = t["omega"].value("kp_radius", c.omega.kp_radius);
        c.omega.ki_radius = t["omega"].value("ki_radius", c.omega.ki_radius);
      }
    }
    if (j.contains("baseline")) {
      const json& b = j["baseline"];
      check_keys(b,
                 {"h", "eta", "iters", "q1", "q2", "k0_scale", "order", "lags",
                  "residual_samples", "input_std", "N_id"},
                 "baseline");
      c.h = b.value("h", c.h);
      c.eta_b = b.value("eta", c.eta_b);
      c.iters_b = b.value("iters", c.iters_b);
      c.q1_b = b.value("q1", c.q1_b);
      c.q2_b = b.value("q2", c.q2_b);
      c.k0_b_scale = b.value("k0_scale", c.k0_b_scale);
      c.hk_order = b.value("order", c.hk_order);
      c.hk_lags = b.value("lags", c.hk_lags);
      c.hk_residual_samples = b.value("residual_samples", c.hk_residual_samples);
      c.hk_input_std = b.value("input_std", c.hk_input_std);
      if (b.contains("N_id") && !b["N_id"].is_null()) c.N_id = b["N_id"].get<long>();
    }
    if (j.contains("eval")) {
      const json& e = j["eval"];
      check_keys(e, {"N_eval", "tau_eval", "h"}, "eval");
      c.N_eval = e.value("N_eval", c.N_eval);
      c.tau_eval = e.value("tau_eval", c.tau_eval);
      c.h_eval = e.value("h", c.h_eval);
    }
    c.threads = j.value("threads", c.threads);
    c.record_wallclock = j.value("record_wallclock", c.record_wallclock);
    c.dump_trajectories = j.value("dump_trajectories", c.dump_trajectories);
    c.traj_dt = j.value("traj_dt", c.traj_dt);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

inline json to_json(const ExperimentConfig& c) {
  json seeds = json::array();
  for (auto s : c.system_seeds) seeds.push_back(s);
  return {
      {"n", c.n},
      {"m", c.m},
      {"p", c.p},
      {"systems", c.systems},
      {"system_seeds", seeds},
      {"trials", c.trials},
      {"master_seed", c.master_seed},
      {"y_star", vec_json(c.y_star)},
      {"init", {{"lo", c.init_lo}, {"hi", c.init_hi}}},
      {"feedforward",
       {{"tau_u", c.tau_u ? json(*c.tau_u) : json("bound")},
        {"kp_probe_scale", c.kp_probe_scale},
        {"eps_u", c.eps_u},
        {"delta_u", c.delta_u},
        {"subgauss_norm", c.subgauss_norm},
        {"abs_const_c", c.abs_const_c},
        {"h_sim", c.ff_h_sim}}},
      {"tuning",
       {{"enabled", c.run_tuning},
        {"N", c.zo.N},
        {"N_sub", c.zo.N_sub},
        {"tau", c.zo.tau},
        {"r", c.zo.r},
        {"h_sim", c.zo.h_sim},
        {"pair_seeding", c.zo.pair_seeding == PairSeeding::Common ? "common" : "independent"},
        {"eta", c.pgd.eta},
        {"T", c.pgd.T},
        {"stop_test", c.pgd.stop_test},
        {"eps_stop", c.pgd.eps_stop},
        {"q1", c.q1},
        {"q2", c.q2},
        {"k0_scale", c.k0_scale},
        {"omega", {{"kp_radius", c.omega.kp_radius}, {"ki_radius", c.omega.ki_radius}}}}},
      {"baseline",
       {{"h", c.h},
        {"eta", c.eta_b},
        {"iters", c.iters_b},
        {"q1", c.q1_b},
        {"q2", c.q2_b},
        {"k0_scale", c.k0_b_scale},
        {"order", c.hk_order},
        {"lags", c.hk_lags},
        {"residual_samples", c.hk_residual_samples},
        {"input_std", c.hk_input_std},
        {"N_id", c.N_id ? json(*c.N_id) : json(nullptr)}}},
      {"eval", {{"N_eval", c.N_eval}, {"tau_eval", c.tau_eval}, {"h", c.h_eval}}},
      {"threads", c.threads},
      {"record_wallclock", c.record_wallclock},
      {"dump_trajectories", c.dump_trajectories},
      {"traj_dt", c.traj_dt},
  };
}

// ---------------------------------------------------------------- experiment artifacts

inline constexpr const char* kMetricsHeader =
    "system_id,trial_id,method,steady_state_rel_err,fbar,u0_err,wallclock_s,status";

inline void write_metrics_csv(std::ostream& os, const std::vector<MetricRow>& rows) {
  os << kMetricsHeader << '\n';
  for (const auto& r : rows)
    os << r.system_id << ',' << r.trial_id << ',' << r.method << ','
       << format_real(r.steady_state_rel_err) << ',' << format_real(r.fbar) << ','
       << format_real(r.u0_err) << ',' << format_real(r.wallclock_s) << ',' << r.status << '\n';
}

inline double parse_real(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw ConfigError("bad number '" + s + "'");
  return v;
}

inline std::vector<MetricRow> read_metrics_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kMetricsHeader) throw ConfigError("unexpected CSV header");
  std::vector<MetricRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 8) throw ConfigError("CSV row needs 8 fields");
    MetricRow r;
    r.system_id = std::stoi(f[0]);
    r.trial_id = std::stoi(f[1]);
    r.method = f[2];
    r.steady_state_rel_err = parse_real(f[3]);
    r.fbar = parse_real(f[4]);
    r.u0_err = parse_real(f[5]);
    r.wallclock_s = parse_real(f[6]);
    r.status = f[7];
    rows.push_back(std::move(r));
  }
  return rows;
}

inline void write_trajectories_csv(std::ostream& os, const std::vector<TrajectorySample>& tr,
                                   Eigen::Index p) {
  os << "system_id,method,t";
  for (Eigen::Index i = 0; i < p; ++i) os << ",y" << (i + 1);
  os << '\n';
  for (const auto& s : tr) {
    os << s.system_id << ',' << s.method << ',' << format_real(s.t);
    for (Eigen::Index i = 0; i < s.y.size(); ++i) os << ',' << format_real(s.y(i));
    os << '\n';
  }
}

inline json to_json(const Summary& s) {
  return {{"n_ok", s.n_ok},          {"median", real_json(s.median)}, {"q1", real_json(s.q1)},
          {"q3", real_json(s.q3)},   {"min", real_json(s.min)},       {"max", real_json(s.max)},
          {"mean", real_json(s.mean)}};
}

inline json to_json(const MethodAggregate& m) {
  return {{"steady_state_rel_err", to_json(m.steady_state_rel_err)},
          {"fbar", to_json(m.fbar)},
          {"u0_err", to_json(m.u0_err)},
          {"failures", m.failures}};
}

inline json aggregates_json(const ExperimentResult& res, const ExperimentConfig& cfg) {
  const auto agg = aggregate(res.rows, res.trajectories, cfg.y_star);
  json systems = json::array();
  for (const auto& a : agg) {
    const SystemInfo& info = res.systems[static_cast<std::size_t>(a.system_id)];
    json costs = json::array();
    for (const auto& tr : res.traces) {
      if (tr.system_id != a.system_id) continue;
      json c = json::array();
      for (double v : tr.proposed_costs) c.push_back(real_json(v));
      costs.push_back({{"trial_id", tr.trial_id},
                       {"analytic_costs", c},
                       {"identified_order", tr.identified_order ? json(*tr.identified_order) : json(nullptr)},
                       {"model_based_fbar_h_scaled", real_json(tr.baseline_fbar_h_scaled)}});
    }
    systems.push_back({{"system_id", a.system_id},
                       {"seed", info.seed},
                       {"status", info.status},
                       {"u_star", vec_json(info.u_star)},
                       {"tau_u", real_json(info.tau_u)},
                       {"N_id_feedforward", info.N_id_ff},
                       {"N_id_tuning", info.N_id_full},
                       {"proposed", to_json(a.proposed)},
                       {"model-based", to_json(a.baseline)},
                       {"fbar_ratio_median", real_json(a.fbar_ratio_median)},
                       {"fbar_ratio_mean", real_json(a.fbar_ratio_mean)},
                       {"overshoot_proposed", real_json(a.overshoot_proposed)},
                       {"overshoot_model_based", real_json(a.overshoot_baseline)},
                       {"trials", costs}});
  }
  return {{"config", to_json(cfg)}, {"systems", systems}};
}

/// gnuplot script drawing the steady-state error and fbar boxplots and the
/// output trajectories from the CSV files next to it.
inline std::string gnuplot_script(Eigen::Index p) {
  std::ostringstream os;
  os << "# gnuplot -p plot.gp\n"
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        "set style data boxplot\n"
        "set logscale y\n"
        "set xtics ('proposed' 1, 'model-based' 2)\n"
        "set title 'steady-state relative error'\n"
        "plot 'metrics.csv' using (1):(strcol(3) eq 'proposed' ? $4 : NaN) notitle, \\\n"
        "     '' using (2):(strcol(3) eq 'model-based' ? $4 : NaN) notitle\n"
        "pause -1\n"
        "set title 'fbar'\n"
        "plot 'metrics.csv' using (1):(strcol(3) eq 'proposed' ? $5 : NaN) notitle, \\\n"
        "     '' using (2):(strcol(3) eq 'model-based' ? $5 : NaN) notitle\n"
        "pause -1\n"
        "unset logscale y\nunset xtics\nset xtics auto\nset style data lines\n"
        "set title 'output trajectories, system 0'\nset xlabel 't'\n"
        "plot ";
  for (Eigen::Index i = 0; i < p; ++i) {
    if (i) os << ", \\\n     ";
    os << "'trajectories.csv' using (($1 == 0 && strcol(2) eq 'proposed') ? $3 : NaN):"
       << (4 + i) << " title 'proposed y" << (i + 1) << "', "
       << "'' using (($1 == 0 && strcol(2) eq 'model-based') ? $3 : NaN):" << (4 + i)
       << " title 'model-based y" << (i + 1) << "'";
  }
  os << "\npause -1\n";
  return os.str();
}

}  // namespace pi2dof
