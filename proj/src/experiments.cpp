#include "rrsim/experiments.hpp"

#include "rrsim/io.hpp"
#include "rrsim/linalg.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace rrsim {

namespace {

void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError("config: unknown field \"" + key + "\" in " + where);
  }
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j, Eigen::Index expected,
                                 const std::string& where) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != expected)
    throw ConfigError("config: " + where + " must be an array of " + std::to_string(expected));
  Eigen::VectorXd v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  reject_unknown(j, {"experiment", "system", "schedule", "integrator", "analysis", "seed",
                     "output_dir"},
                 "top level");
  ExperimentConfig cfg;
  if (!j.contains("experiment")) throw ConfigError("config: missing \"experiment\"");
  cfg.experiment = j.at("experiment").get<std::string>();

  if (j.contains("system")) {
    const auto& s = j.at("system");
    if (s.is_string()) {
      cfg.system_preset = s.get<std::string>();
    } else if (s.is_object()) {
      if (!s.contains("preset")) throw ConfigError("config: inline system needs \"preset\"");
      cfg.system_preset = s.at("preset").get<std::string>();
      cfg.system_overrides = s;
      cfg.system_overrides.erase("preset");
    } else {
      throw ConfigError("config: \"system\" must be a preset name or an object");
    }
  }

  if (j.contains("schedule")) cfg.schedule = j.at("schedule");

  if (j.contains("integrator")) {
    const auto& it = j.at("integrator");
    reject_unknown(it, {"step", "horizon", "record_stride"}, "integrator");
    if (it.contains("step")) cfg.step = it.at("step").get<double>();
    if (it.contains("horizon")) cfg.horizon = it.at("horizon").get<double>();
    if (it.contains("record_stride")) cfg.record_stride = it.at("record_stride").get<int>();
  }

  if (j.contains("analysis")) {
    const auto& an = j.at("analysis");
    reject_unknown(an, {"epsilon", "eta", "settle_fraction", "window", "taus", "radii", "ball"},
                   "analysis");
    if (an.contains("epsilon")) cfg.epsilon = an.at("epsilon").get<double>();
    if (an.contains("eta")) cfg.eta = an.at("eta").get<double>();
    if (an.contains("settle_fraction")) cfg.settle_fraction = an.at("settle_fraction").get<double>();
    if (an.contains("window")) {
      const auto w = an.at("window").get<std::vector<double>>();
      if (w.size() != 2) throw ConfigError("config: analysis.window must have two entries");
      cfg.window = std::array<double, 2>{w[0], w[1]};
    }
    if (an.contains("taus")) cfg.taus = an.at("taus").get<std::vector<double>>();
    if (an.contains("radii")) cfg.probe_radii = an.at("radii").get<std::vector<double>>();
    if (an.contains("ball")) cfg.probe_ball = an.at("ball").get<double>();
  }

  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

namespace {

CartPendulumMassSpringParams coupled_params_from(const ExperimentConfig& cfg,
                                                 Eigen::MatrixXd* Q_out, Eigen::MatrixXd* R_out) {
  CartPendulumMassSpringParams p;
  Eigen::MatrixXd Q = default_coupled_Q();
  Eigen::MatrixXd R = default_coupled_R();
  const auto& o = cfg.system_overrides;
  reject_unknown(o,
                 {"cart_mass", "pendulum_mass", "pendulum_length", "gravity", "x0", "q_weights",
                  "r_weights"},
                 "system (coupled-linear)");
  if (o.contains("cart_mass")) p.cart_mass = o.at("cart_mass").get<double>();
  if (o.contains("pendulum_mass")) p.pendulum_mass = o.at("pendulum_mass").get<double>();
  if (o.contains("pendulum_length")) p.pendulum_length = o.at("pendulum_length").get<double>();
  if (o.contains("gravity")) p.gravity = o.at("gravity").get<double>();
  if (o.contains("x0")) p.x0 = vector_from_json(o.at("x0"), 6, "x0");
  if (o.contains("q_weights"))
    Q = vector_from_json(o.at("q_weights"), 6, "q_weights").asDiagonal();
  if (o.contains("r_weights"))
    R = vector_from_json(o.at("r_weights"), 2, "r_weights").asDiagonal();
  p.validate();
  if (Q_out) *Q_out = Q;
  if (R_out) *R_out = R;
  return p;
}

SpacecraftParams spacecraft_params_from(const ExperimentConfig& cfg, double default_omega_bar) {
  SpacecraftParams p;
  p.omega_bar = default_omega_bar;
  const auto& o = cfg.system_overrides;
  reject_unknown(o, {"inertia", "k1", "k2", "q0_init", "qv_init", "omega_init", "omega_bar"},
                 "system (spacecraft)");
  if (o.contains("inertia"))
    p.inertia = Eigen::Vector3d(vector_from_json(o.at("inertia"), 3, "inertia")).asDiagonal();
  if (o.contains("k1")) p.k1 = o.at("k1").get<double>();
  if (o.contains("k2")) p.k2 = o.at("k2").get<double>();
  if (o.contains("q0_init")) p.q0_init = o.at("q0_init").get<double>();
  if (o.contains("qv_init")) p.qv_init = vector_from_json(o.at("qv_init"), 3, "qv_init");
  if (o.contains("omega_init")) p.omega_init = vector_from_json(o.at("omega_init"), 3, "omega_init");
  if (o.contains("omega_bar")) p.omega_bar = o.at("omega_bar").get<double>();
  p.validate();
  return p;
}

void require_preset(const ExperimentConfig& cfg, const char* expected) {
  if (cfg.system_preset.empty()) return;
  if (cfg.system_preset != expected)
    throw ConfigError("config: experiment \"" + cfg.experiment + "\" runs on the \"" +
                      std::string(expected) + "\" preset");
}

std::string gnuplot_header(const std::string& title) {
  std::ostringstream os;
  os << "set datafile separator ','\n"
     << "set grid\n"
     << "set key outside\n"
     << "set xlabel 't [s]'\n"
     << "set title '" << title << "'\n";
  return os.str();
}

void write_states_plot(const std::filesystem::path& dir, const std::string& name,
                       const std::string& csv, const std::vector<std::pair<int, std::string>>& cols,
                       const std::string& title, bool logscale = false) {
  std::ostringstream os;
  os << gnuplot_header(title);
  if (logscale) os << "set logscale y\n";
  os << "plot ";
  bool first = true;
  for (const auto& [col, label] : cols) {
    if (!first) os << ", \\\n     ";
    os << "'" << csv << "' using 1:" << col << " with lines title '" << label << "'";
    first = false;
  }
  os << "\n";
  write_text_file(dir / name, os.str());
}

void write_norm_plot(const std::filesystem::path& dir, const std::string& name,
                     const std::string& csv, int dim, const std::string& title,
                     int first_col = 2) {
  // plots the Euclidean norm of columns [first_col, first_col+dim) on a log axis
  std::ostringstream os;
  os << gnuplot_header(title) << "set logscale y\n" << "norm(";
  for (int i = 0; i < dim; ++i) os << (i ? "," : "") << "c" << i;
  os << ") = sqrt(";
  for (int i = 0; i < dim; ++i) os << (i ? "+" : "") << "c" << i << "**2";
  os << ")\nplot '" << csv << "' using 1:(norm(";
  for (int i = 0; i < dim; ++i) os << (i ? "," : "") << "$" << (first_col + i);
  os << ")) with lines title 'state norm'\n";
  write_text_file(dir / name, os.str());
}

double state_norm_at_end(const Trajectory& t, int offset, int len) {
  return t.states.back().segment(offset, len).norm();
}

nlohmann::json run_coupled_stability(const ExperimentConfig& cfg) {
  require_preset(cfg, "coupled-linear");
  Eigen::MatrixXd Q, R;
  CartPendulumMassSpringParams p = coupled_params_from(cfg, &Q, &R);
  const GainMatrix gain = synthesize_gain(coupled_linear_A(p), coupled_linear_B(p), Q, R);
  const ControlAffineSystem sys = build_linear_system(p, gain);

  const double step = cfg.step.value_or(p.step);
  const double horizon = cfg.horizon.value_or(p.sim_horizon);
  const double tau = cfg.schedule ? std::get<ConstantSchedule>(
                                        schedule_from_json(*cfg.schedule, sys.m, 0.0)).tau
                                  : p.tau;
  IntegratorConfig icfg{step, horizon, cfg.record_stride};
  const Schedule sched = ConstantSchedule(tau, sys.m, 0.0);

  const Trajectory nominal =
      integrate_closed_loop(sys, ClosedLoopMode::nominal(), p.x0, 0.0, icfg);
  const Trajectory switched =
      integrate_closed_loop(sys, ClosedLoopMode::sparse(sched), p.x0, 0.0, icfg);

  const double eps = cfg.epsilon.value_or(3.0 * p.x0.norm());
  const double eta = cfg.eta.value_or(1e-6);
  const StabilityVerdict verdict =
      stability_verdict(switched, eps, eta, cfg.settle_fraction);
  const std::array<double, 2> win = cfg.window.value_or(std::array<double, 2>{5.0, horizon});
  const auto [rate, r2] = decay_fit(switched, win[0], win[1]);

  write_trajectory_csv(cfg.output_dir / "trajectory_nominal.csv", nominal);
  write_trajectory_csv(cfg.output_dir / "trajectory_switched.csv", switched);
  write_states_plot(cfg.output_dir, "plot_pendulum.gp", "trajectory_switched.csv",
                    {{2, "x1"}, {3, "x2"}, {4, "x3"}, {5, "x4"}},
                    "inverted pendulum states, round-robin run");
  write_states_plot(cfg.output_dir, "plot_mass_spring.gp", "trajectory_switched.csv",
                    {{6, "x5"}, {7, "x6"}}, "mass-spring states, round-robin run");
  write_norm_plot(cfg.output_dir, "plot_norm.gp", "trajectory_switched.csv", 6,
                  "state norm, round-robin run (log scale)");

  nlohmann::json report;
  report["experiment"] = cfg.experiment;
  report["gain_hurwitz_margin"] = gain.hurwitz_margin;
  report["tau"] = tau;
  report["verdict"] = to_json(verdict);
  report["decay_fit"] = {{"rate", rate}, {"r2", r2}, {"window", win}};
  report["initial_norm"] = p.x0.norm();
  const bool ok = verdict.kind == StabilityVerdict::Kind::StaysInBall ||
                  verdict.kind == StabilityVerdict::Kind::ConvergesTo0;
  report["exit_code"] = ok ? 0 : 1;
  return report;
}

nlohmann::json run_no_amplification(const ExperimentConfig& cfg) {
  require_preset(cfg, "coupled-linear");
  Eigen::MatrixXd Q, R;
  CartPendulumMassSpringParams p = coupled_params_from(cfg, &Q, &R);
  const GainMatrix gain = synthesize_gain(coupled_linear_A(p), coupled_linear_B(p), Q, R);
  const ControlAffineSystem sys = build_linear_system(p, gain);

  const double step = cfg.step.value_or(p.step);
  const double horizon = cfg.horizon.value_or(p.sim_horizon);
  const double tau = p.tau;
  IntegratorConfig icfg{step, horizon, cfg.record_stride};
  const Schedule sched = ConstantSchedule(tau, sys.m, 0.0);

  const Trajectory run =
      integrate_closed_loop(sys, ClosedLoopMode::sparse_unscaled(sched), p.x0, 0.0, icfg);

  const double eps = cfg.epsilon.value_or(3.0 * p.x0.norm());
  const StabilityVerdict verdict = stability_verdict(run, eps, cfg.eta.value_or(1e-6),
                                                     cfg.settle_fraction);

  // |x5| growth over the observation window (defaults to [10 s, horizon]).
  const std::array<double, 2> win = cfg.window.value_or(std::array<double, 2>{10.0, horizon});
  double x5_begin = 0.0, x5_end = 0.0;
  for (std::size_t i = 0; i < run.size(); ++i) {
    if (run.times[i] <= win[0]) x5_begin = std::abs(run.states[i](4));
    if (run.times[i] <= win[1]) x5_end = std::abs(run.states[i](4));
  }
  const double growth = x5_begin > 0.0 ? x5_end / x5_begin
                                       : std::numeric_limits<double>::infinity();

  write_trajectory_csv(cfg.output_dir / "trajectory_unscaled.csv", run);
  write_states_plot(cfg.output_dir, "plot_x5.gp", "trajectory_unscaled.csv",
                    {{6, "|x5|"}}, "spring position under unscaled scheduling (log scale)",
                    /*logscale=*/true);

  const bool diverged = verdict.kind == StabilityVerdict::Kind::Diverges ||
                        verdict.kind == StabilityVerdict::Kind::Blowup;
  nlohmann::json report;
  report["experiment"] = cfg.experiment;
  report["verdict"] = to_json(verdict);
  report["x5_growth_factor"] = growth;
  report["growth_window"] = win;
  report["diverged_as_expected"] = diverged;
  report["exit_code"] = diverged ? 0 : 1;
  return report;
}

nlohmann::json run_spacecraft_decreasing(const ExperimentConfig& cfg) {
  require_preset(cfg, "spacecraft");
  SpacecraftParams p = spacecraft_params_from(cfg, /*default_omega_bar=*/0.0);
  const ControlAffineSystem sys = build_spacecraft_system(p);

  const double step = cfg.step.value_or(p.step);
  const double horizon = cfg.horizon.value_or(p.sim_horizon);
  PiecewiseSchedule sched = [&] {
    if (cfg.schedule) {
      Schedule s = schedule_from_json(*cfg.schedule, sys.m, 0.0);
      if (!std::holds_alternative<PiecewiseSchedule>(s))
        throw ConfigError("spacecraft-decreasing expects a piecewise schedule");
      return std::get<PiecewiseSchedule>(s);
    }
    // dwell time shrinking by a factor of 0.1 every 5 s, five segments
    return PiecewiseSchedule({0.1, 0.01, 1e-3, 1e-4, 1e-5}, 5.0, sys.m, 0.0);
  }();

  const StateVec x0 = shift_spacecraft_state(
      p, (Eigen::VectorXd(7) << p.q0_init, p.qv_init, p.omega_init).finished());
  const Trajectory traj =
      integrate_closed_loop_per_segment(sys, sched, /*scaled=*/true, x0, 0.0, step, horizon,
                                        /*record_dt=*/step);

  const double qv_final = state_norm_at_end(traj, 1, 3);
  const double omega_final = state_norm_at_end(traj, 4, 3);

  write_trajectory_csv(cfg.output_dir / "trajectory_spacecraft.csv", traj);
  write_states_plot(cfg.output_dir, "plot_quaternion.gp", "trajectory_spacecraft.csv",
                    {{2, "q0 - 1"}, {3, "qv1"}, {4, "qv2"}, {5, "qv3"}},
                    "quaternion deviation under shrinking dwell times");
  write_states_plot(cfg.output_dir, "plot_omega.gp", "trajectory_spacecraft.csv",
                    {{6, "w1"}, {7, "w2"}, {8, "w3"}},
                    "angular velocity under shrinking dwell times");

  nlohmann::json report;
  report["experiment"] = cfg.experiment;
  report["schedule"] = schedule_to_json(Schedule(sched));
  report["final_qv_norm"] = qv_final;
  report["final_omega_norm"] = omega_final;
  report["blowup"] = traj.blowup;
  report["exit_code"] = traj.blowup ? 1 : 0;
  return report;
}

nlohmann::json run_slow_switch_probe(const ExperimentConfig& cfg) {
  require_preset(cfg, "spacecraft");
  SpacecraftParams p = spacecraft_params_from(cfg, /*default_omega_bar=*/1.0);
  const ControlAffineSystem sys = build_spacecraft_system(p);

  const double step = cfg.step.value_or(p.step);
  const double horizon = cfg.horizon.value_or(p.sim_horizon);
  const double tau = cfg.schedule ? std::get<ConstantSchedule>(
                                        schedule_from_json(*cfg.schedule, sys.m, 0.0)).tau
                                  : 18.0;
  const Schedule sched = ConstantSchedule(tau, sys.m, 0.0);
  IntegratorConfig icfg{step, horizon, cfg.record_stride};

  // One run per ball radius: attitude starts at the target, the angular
  // velocity is drawn uniformly from the radius ball around the target spin.
  std::vector<double> exit_times(cfg.probe_radii.size(),
                                 std::numeric_limits<double>::quiet_NaN());
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t i = 0; i < cfg.probe_radii.size(); ++i) {
    SplitMix64 rng(cfg.seed + i);
    const Eigen::Vector3d dw = rng.uniform_ball3(cfg.probe_radii[i]);
    StateVec x0 = StateVec::Zero(7);
    x0.segment<3>(4) = dw;  // shifted coordinates: omega deviation from target
    const Trajectory traj = integrate_closed_loop(sys, ClosedLoopMode::sparse(sched), x0, 0.0,
                                                  icfg);
    for (std::size_t s = 0; s < traj.size(); ++s)
      if (traj.states[s].segment<3>(4).norm() > cfg.probe_ball) {
        exit_times[i] = traj.times[s];
        break;
      }
    const std::string csv = "trajectory_radius_" + std::to_string(i) + ".csv";
    write_trajectory_csv(cfg.output_dir / csv, traj);
    runs.push_back({{"radius", cfg.probe_radii[i]},
                    {"omega_offset", {dw(0), dw(1), dw(2)}},
                    {"exit_time", exit_times[i]},
                    {"blowup", traj.blowup}});
  }

  {
    std::ostringstream os;
    os << gnuplot_header("angular velocity distance to the target spin (dwell time " +
                         std::to_string(tau) + " s)")
       << "set logscale y\nplot ";
    for (std::size_t i = 0; i < cfg.probe_radii.size(); ++i) {
      if (i) os << ", \\\n     ";
      os << "'trajectory_radius_" << i
         << ".csv' using 1:(sqrt($6**2+$7**2+$8**2)) with lines title 'radius " << i << "'";
    }
    os << ", 0.1 with lines dashtype 2 title 'ball boundary'\n";
    write_text_file(cfg.output_dir / "plot_omega_norm.gp", os.str());
  }

  bool all_exited = true;
  bool nondecreasing = true;
  for (std::size_t i = 0; i < exit_times.size(); ++i) {
    if (std::isnan(exit_times[i])) all_exited = false;
    if (i > 0 && !(std::isnan(exit_times[i]) || exit_times[i] >= exit_times[i - 1]))
      nondecreasing = false;
  }

  nlohmann::json report;
  report["experiment"] = cfg.experiment;
  report["tau"] = tau;
  report["ball"] = cfg.probe_ball;
  report["seed"] = cfg.seed;
  report["runs"] = runs;
  report["all_exited"] = all_exited;
  report["exit_times_nondecreasing"] = nondecreasing;
  report["diverged_as_expected"] = all_exited;
  report["exit_code"] = all_exited ? 0 : 1;
  return report;
}

nlohmann::json run_tau_sweep(const ExperimentConfig& cfg) {
  require_preset(cfg, "coupled-linear");
  Eigen::MatrixXd Q, R;
  CartPendulumMassSpringParams p = coupled_params_from(cfg, &Q, &R);
  const GainMatrix gain = synthesize_gain(coupled_linear_A(p), coupled_linear_B(p), Q, R);
  const ControlAffineSystem sys = build_linear_system(p, gain);

  const std::vector<double> taus = cfg.taus.value_or(std::vector<double>{0.4, 0.2, 0.1, 0.05});
  const std::array<double, 2> window = cfg.window.value_or(std::array<double, 2>{0.0, 5.0});
  const double step = cfg.step.value_or(p.step);

  const DivergenceReport report = tau_sweep(sys, p.x0, window[0], taus, window, step);

  nlohmann::json jr;
  jr["experiment"] = cfg.experiment;
  jr["report"] = to_json(report);
  bool nonincreasing = true;
  for (std::size_t i = 1; i < report.gaps.size(); ++i)
    if (report.gaps[i] > report.gaps[i - 1]) nonincreasing = false;
  jr["gaps_nonincreasing"] = nonincreasing;
  jr["exit_code"] = 0;

  {
    std::ostringstream os;
    os << "set datafile separator ','\nset grid\nset logscale xy\n"
       << "set xlabel 'dwell time tau [s]'\nset ylabel 'sup-norm trajectory gap'\n"
       << "set title 'gap to the nominal run vs dwell time'\n"
       << "plot 'gaps.csv' using 1:2 with linespoints title 'sup gap'\n";
    write_text_file(cfg.output_dir / "plot_gaps.gp", os.str());
    std::ostringstream csv;
    csv << "tau,gap\n";
    char buf[64];
    for (std::size_t i = 0; i < report.taus.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", report.taus[i], report.gaps[i]);
      csv << buf;
    }
    write_text_file(cfg.output_dir / "gaps.csv", csv.str());
  }
  return jr;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);

  nlohmann::json report;
  if (cfg.experiment == "coupled-stability")
    report = run_coupled_stability(cfg);
  else if (cfg.experiment == "no-amplification")
    report = run_no_amplification(cfg);
  else if (cfg.experiment == "spacecraft-decreasing")
    report = run_spacecraft_decreasing(cfg);
  else if (cfg.experiment == "slow-switch-probe")
    report = run_slow_switch_probe(cfg);
  else if (cfg.experiment == "tau-sweep")
    report = run_tau_sweep(cfg);
  else
    throw ConfigError("config: unknown experiment \"" + cfg.experiment + "\"");

  RunResult result;
  result.exit_code = report.at("exit_code").get<int>();
  result.report = report;
  std::ofstream out(cfg.output_dir / ("report_" + cfg.experiment + ".json"));
  out << report.dump(2) << "\n";
  return result;
}

std::string presets_text() {
  std::ostringstream os;
  CartPendulumMassSpringParams cp;
  os << "coupled-linear (cart-mounted inverted pendulum coupled with a mass-spring system,\n"
     << "                linearized about the upright equilibrium; d = 6, m = 2)\n"
     << "  Mass of the cart: " << cp.cart_mass << " kg\n"
     << "  Mass of the pendulum: " << cp.pendulum_mass << " kg\n"
     << "  Pendulum length L: " << cp.pendulum_length
     << " m (default chosen here; any positive value keeps the unstable upright structure)\n"
     << "  Acceleration due to gravity: " << cp.gravity << " m/s^2\n"
     << "  Time of simulation: " << cp.sim_horizon << " s\n"
     << "  Switching (dwell) time: " << cp.tau << " s\n"
     << "  ODE solver: 4th-order Runge-Kutta, fixed step\n"
     << "  Step length: " << cp.step << " s\n"
     << "  Initial condition: (0, pi/10, 0, 0, 1, 1.05)\n"
     << "  Gain synthesis: LQR, Q = diag(30, 1, 30, 1, 0.3, 0.3), R = diag(1, 0.01)\n"
     << "\n";
  SpacecraftParams sp;
  os << "spacecraft (rigid-body attitude with unit-quaternion kinematics; d = 7, m = 3)\n"
     << "  Inertia: diag(100, 70, 150) kg m^2\n"
     << "  k1: " << sp.k1 << ", k2: " << sp.k2 << " (feedback torque = -k1 qv - k2 omega)\n"
     << "  Time of simulation: " << sp.sim_horizon << " s\n"
     << "  ODE solver: 4th-order Runge-Kutta, fixed step\n"
     << "  Step length: " << sp.step << " s\n"
     << "  Initial quaternion: (1, 0, 0, 0)\n"
     << "  Initial angular velocity: (0.01, 0.05, 0.03) rad/s\n"
     << "  Target spin omega_bar: 0 rad/s (slow-switch-probe default: 1 rad/s about x)\n";
  return os.str();
}

int selftest() {
  int failures = 0;
  auto check = [&](bool ok, const std::string& what) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", what.c_str());
    if (!ok) ++failures;
  };

  {
    const ConstantSchedule s(0.5, 2, 0.0);
    bool ok = true;
    for (int i = 0; i < 200; ++i) {
      const double t = 0.013 * i;
      ok = ok && active_index(s, t) == active_index(s, t + 2 * 0.5);
    }
    check(ok, "constant schedule is periodic with period m*tau");
  }
  {
    // time-average of the switched field over one cycle at a frozen state
    // equals the nominal field
    CartPendulumMassSpringParams p;
    const GainMatrix g = synthesize_gain(coupled_linear_A(p), coupled_linear_B(p),
                                         default_coupled_Q(), default_coupled_R());
    const ControlAffineSystem sys = build_linear_system(p, g);
    const Schedule sched = ConstantSchedule(0.5, 2, 0.0);
    StateVec x(6);
    x << 0.3, -0.1, 0.2, 0.05, 1.0, -0.4;
    StateVec avg = StateVec::Zero(6);
    for (int k = 0; k < 2; ++k)
      avg += eval_switched_rhs(sys, x, 0.5 * k + 0.1, sched, true) / 2.0;
    const StateVec nominal = eval_nominal_rhs(sys, x);
    check((avg - nominal).norm() <= 1e-12 * std::max(1.0, nominal.norm()),
          "cycle average of the m-scaled switched field equals the nominal field");
  }
  {
    ContractionConstants c;
    c.lambda_prime = 0.9;
    c.kappa = 0.37;
    c.overshoot_C = 2.5;
    c.lambda = (1 - c.kappa) / (c.overshoot_C * c.overshoot_C) * c.lambda_prime;
    const double roundtrip = c.lambda * c.overshoot_C * c.overshoot_C / (1 - c.kappa);
    check(std::abs(roundtrip - c.lambda_prime) <= 1e-12 * c.lambda_prime,
          "contraction-rate arithmetic round-trips");
  }
  {
    const auto sub = chatter_subdivide(0.0, 4.0, {0.25, 0.25, 0.5}, 4);
    std::vector<Eigen::VectorXd> fields;
    SplitMix64 rng(7);
    for (int i = 0; i < 3; ++i) {
      Eigen::VectorXd f(3);
      for (int k = 0; k < 3; ++k) f(k) = rng.uniform_pm1();
      fields.push_back(f);
    }
    const double defect = chatter_defect(fields, {0.25, 0.25, 0.5}, sub,
                                         {{sub.block_boundary(0), sub.block_boundary(3)}});
    check(defect == 0.0, "chatter defect over whole blocks is exactly zero");
  }
  {
    const ChannelRhs rhs = [](double, const StateVec& x, int, StateVec& dx) { dx = -x; };
    StateVec x0(1);
    x0 << 1.0;
    const OrderEstimate est = convergence_order(rhs, x0, 0.0, 1.0);
    check(!est.exact && est.order > 3.8 && est.order < 4.2,
          "integrator shows 4th-order convergence on xdot = -x");
  }
  {
    const ChannelRhs rhs = [](double, const StateVec& x, int, StateVec& dx) { dx = -0.5 * x; };
    StateVec x0(2);
    x0 << 1.0, -2.0;
    const Trajectory t = integrate(rhs, x0, 0.0, IntegratorConfig{0.1, 1.0, 1});
    const auto tmp = std::filesystem::temp_directory_path() / "rrsim_selftest.csv";
    write_trajectory_csv(tmp, t);
    const Trajectory back = read_trajectory_csv(tmp);
    bool ok = back.size() == t.size();
    for (std::size_t i = 0; ok && i < t.size(); ++i)
      ok = back.times[i] == t.times[i] && back.states[i] == t.states[i] &&
           back.active[i] == t.active[i];
    std::filesystem::remove(tmp);
    check(ok, "trajectory CSV round-trips exactly");
  }
  return failures;
}

}  // namespace rrsim
