#include "rrsim/analysis.hpp"

#include "rrsim/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace rrsim {

// ---------------------------------------------------------------------------
// Trajectory comparison and verdicts
// ---------------------------------------------------------------------------

double sup_norm_gap(const Trajectory& a, const Trajectory& b, double wa, double wb) {
  if (a.dim() != b.dim()) throw AnalysisError("sup_norm_gap: state dimensions differ");
  if (!(wb > wa)) throw AnalysisError("sup_norm_gap: empty window");

  const double tol = 1e-9 * std::max({1.0, std::abs(wa), std::abs(wb)});
  double gap = 0.0;
  std::size_t shared = 0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a.times[i];
    if (t < wa - tol) continue;
    if (t > wb + tol) break;
    while (j < b.size() && b.times[j] < t - tol) ++j;
    if (j >= b.size()) break;
    if (std::abs(b.times[j] - t) <= tol) {
      gap = std::max(gap, (a.states[i] - b.states[j]).norm());
      ++shared;
    }
  }
  if (shared < 2)
    throw AnalysisError("sup_norm_gap: trajectory grids do not align on the window");
  return gap;
}

namespace {

double segment_norm(const StateVec& x, int offset, int len) {
  if (len < 0) return x.norm();
  return x.segment(offset, len).norm();
}

}  // namespace

StabilityVerdict stability_verdict(const Trajectory& traj, double epsilon, double eta,
                                   double settle_fraction, int norm_offset, int norm_len) {
  if (traj.size() == 0) throw AnalysisError("stability_verdict: empty trajectory");
  StabilityVerdict v;
  v.epsilon = epsilon;
  v.eta = eta;

  std::vector<double> norms(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i)
    norms[i] = segment_norm(traj.states[i], norm_offset, norm_len);
  v.sup_norm = *std::max_element(norms.begin(), norms.end());

  if (traj.blowup) {
    v.kind = StabilityVerdict::Kind::Blowup;
    v.blowup_time = traj.blowup_time;
    return v;
  }
  if (v.sup_norm > epsilon) {
    v.kind = StabilityVerdict::Kind::Diverges;
    for (std::size_t i = 0; i < traj.size(); ++i)
      if (norms[i] > epsilon) {
        v.first_exit_time = traj.times[i];
        break;
      }
    return v;
  }

  const double t_begin = traj.times.front();
  const double boundary = t_begin + settle_fraction * (traj.times.back() - t_begin);
  bool tail_ok = true;
  for (std::size_t i = 0; i < traj.size(); ++i)
    if (traj.times[i] >= boundary && norms[i] > eta) {
      tail_ok = false;
      break;
    }
  if (tail_ok) {
    v.kind = StabilityVerdict::Kind::ConvergesTo0;
    // first time from which the trajectory stays within eta
    std::size_t settled = traj.size() - 1;
    for (std::size_t i = traj.size(); i-- > 0;) {
      if (norms[i] > eta) break;
      settled = i;
    }
    v.settled_time = traj.times[settled];
  } else {
    v.kind = StabilityVerdict::Kind::StaysInBall;
  }
  return v;
}

std::pair<double, double> decay_fit(const Trajectory& traj, double wa, double wb, int norm_offset,
                                    int norm_len) {
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.times[i];
    if (t < wa || t > wb) continue;
    const double n = segment_norm(traj.states[i], norm_offset, norm_len);
    if (n <= 0.0) break;  // shrink to the last all-positive prefix
    ts.push_back(t);
    ys.push_back(std::log(n));
  }
  if (ts.size() < 2) throw AnalysisError("decay_fit: fewer than two usable samples in window");

  const auto n = static_cast<double>(ts.size());
  double st = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) st += ts[i], sy += ys[i];
  const double mt = st / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double dt = ts[i] - mt, dy = ys[i] - my;
    sxx += dt * dt;
    sxy += dt * dy;
    syy += dy * dy;
  }
  const double slope = sxy / sxx;
  double r2 = 1.0;
  if (syy > 0.0) {
    double ss_res = 0.0;
    const double intercept = my - slope * mt;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double r = ys[i] - (slope * ts[i] + intercept);
      ss_res += r * r;
    }
    r2 = 1.0 - ss_res / syy;
  }
  return {slope, r2};
}

// ---------------------------------------------------------------------------
// Contraction constants and bound formulas
// ---------------------------------------------------------------------------

ContractionConstants contraction_constants(const ControlAffineSystem& sys, double kappa,
                                           double lambda_prime_fraction, int grid_points) {
  if (!(kappa > 0.0 && kappa < 1.0))
    throw std::domain_error("contraction_constants: kappa must lie in (0,1)");
  if (!(lambda_prime_fraction > 0.0 && lambda_prime_fraction < 1.0))
    throw std::domain_error("contraction_constants: lambda' fraction must lie in (0,1)");
  if (grid_points < 2) throw std::domain_error("contraction_constants: grid too coarse");

  const StateVec zero = StateVec::Zero(sys.d);
  Eigen::MatrixXd J0;
  if (sys.nominal_jacobian) {
    J0 = sys.nominal_jacobian(zero);
  } else {
    VectorFieldFn closed_loop = [&sys](const StateVec& x, StateVec& out) {
      out = eval_nominal_rhs(sys, x);
    };
    J0 = finite_difference_jacobian(closed_loop, zero);
  }

  ContractionConstants c;
  c.kappa = kappa;
  c.lambda_g = hurwitz_margin(J0);
  if (!(c.lambda_g > 0.0))
    throw std::domain_error("contraction_constants: closed-loop Jacobian at 0 is not Hurwitz");
  c.lambda_prime = lambda_prime_fraction * c.lambda_g;

  const double t_max = 50.0 / c.lambda_prime;
  double C = 0.0;
  for (int k = 0; k < grid_points; ++k) {
    const double t = t_max * static_cast<double>(k) / static_cast<double>(grid_points - 1);
    C = std::max(C, spectral_norm(expm(J0 * t)) * std::exp(c.lambda_prime * t));
  }
  c.overshoot_C = C;
  c.lambda = (1.0 - kappa) / (C * C) * c.lambda_prime;
  return c;
}

GeometricBound geometric_bound(double gamma_bar, double K1, double lambda, double T, int n) {
  if (!(gamma_bar > 0.0 && K1 > 0.0 && lambda > 0.0 && T > 0.0))
    throw std::domain_error("geometric_bound: parameters must be positive");
  if (n < 1) throw std::domain_error("geometric_bound: n must be >= 1");

  const double theta = K1 * std::exp(-lambda * T);
  GeometricBound b;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += std::pow(theta, i);
  b.at_blocks = gamma_bar * sum;
  b.at_general_time = gamma_bar + K1 * gamma_bar * sum;
  if (theta < 1.0) {
    b.has_limit = true;
    b.limit = gamma_bar * (1.0 + K1 / (1.0 - theta));
  }
  return b;
}

GeometricBoundTv geometric_bound_tv(double gamma_bar, double K1, double lambda, double T,
                                    double beta, int n) {
  if (!(gamma_bar > 0.0 && K1 > 0.0 && lambda > 0.0 && T > 0.0))
    throw std::domain_error("geometric_bound_tv: parameters must be positive");
  if (!(beta > 0.0 && beta < 1.0)) throw std::domain_error("geometric_bound_tv: beta in (0,1)");
  if (n < 0) throw std::domain_error("geometric_bound_tv: n must be >= 0");

  const double decay = K1 * std::exp(-lambda * T);
  GeometricBoundTv b;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += std::pow(beta, n - 1 - i) * std::pow(decay, i);
  b.full_sum = std::pow(beta, n) * gamma_bar + K1 * gamma_bar * sum;

  const double theta = decay / beta;
  if (theta < 1.0) {
    b.has_bound = true;
    b.collapsed = std::pow(beta, n) * gamma_bar * (1.0 + K1 / (1.0 - theta));
  }
  return b;
}

double settling_time(double eta, double K2, double gamma_bar, double beta, double T_prime) {
  if (!(eta > 0.0 && K2 > 0.0 && gamma_bar > 0.0))
    throw std::domain_error("settling_time: eta, K2, gamma_bar must be positive");
  if (!(beta > 0.0 && beta < 1.0)) throw std::domain_error("settling_time: beta in (0,1)");
  const double term = std::log(eta / (2.0 * K2 * gamma_bar)) / std::log(beta);
  return std::max(T_prime, term);
}

// ---------------------------------------------------------------------------
// Chattering subdivision
// ---------------------------------------------------------------------------

ChatterSubdivision::ChatterSubdivision(double begin, double end, std::vector<double> weights,
                                       int block_count)
    : begin_(begin), end_(end), blocks_(block_count), weights_(std::move(weights)) {
  if (!(end_ > begin_)) throw std::domain_error("chatter_subdivide: empty interval");
  if (blocks_ < 1) throw std::domain_error("chatter_subdivide: block_count must be >= 1");
  if (weights_.empty()) throw std::domain_error("chatter_subdivide: needs at least one weight");
  double sum = 0.0;
  for (double w : weights_) {
    if (w < 0.0) throw std::domain_error("chatter_subdivide: weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::domain_error("chatter_subdivide: weights must sum to 1");
  block_length_ = (end_ - begin_) / static_cast<double>(blocks_);
  cumulative_.resize(weights_.size() + 1);
  cumulative_[0] = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i)
    cumulative_[i + 1] = cumulative_[i] + weights_[i];
  cumulative_.back() = 1.0;  // close the partition exactly
}

double ChatterSubdivision::block_boundary(int j) const {
  return begin_ + static_cast<double>(j) * block_length_;
}

double ChatterSubdivision::sub_boundary(int j, int i) const {
  return begin_ + (static_cast<double>(j) + cumulative_[static_cast<std::size_t>(i)]) *
                      block_length_;
}

// Locates t as (block index, local coordinate in [0,1]), snapping the local
// coordinate onto block and sub-interval boundaries within a relative 1e-9, so
// that endpoint queries issued from boundary arithmetic decompose exactly.
std::pair<int, double> locate_in_blocks(const ChatterSubdivision& s, double t) {
  constexpr double snap = 1e-9;
  const double pos = (t - s.begin_) / s.block_length_;
  if (pos < -snap || pos > static_cast<double>(s.blocks_) + snap)
    throw std::domain_error("chatter subdivision queried outside its interval");
  int j = static_cast<int>(std::floor(pos + snap));
  j = std::clamp(j, 0, s.blocks_ - 1);
  double u = pos - static_cast<double>(j);
  if (u < snap) u = 0.0;
  if (u > 1.0 - snap) u = 1.0;
  for (double c : s.cumulative_)
    if (std::abs(u - c) < snap) {
      u = c;
      break;
    }
  return {j, u};
}

int ChatterSubdivision::assignment(double t) const {
  const auto [j, u] = locate_in_blocks(*this, t);
  (void)j;
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  auto i = static_cast<int>(it - cumulative_.begin()) - 1;
  return std::clamp(i, 0, field_count() - 1) + 1;
}

ChatterSubdivision chatter_subdivide(double begin, double end, const std::vector<double>& weights,
                                     int block_count) {
  return ChatterSubdivision(begin, end, weights, block_count);
}

namespace {

// Integral of (avg - F_sigma) over the part of block j between local
// coordinates u1 <= u2, accumulated into defect.
void accumulate_partial_block(const std::vector<Eigen::VectorXd>& fields,
                              const Eigen::VectorXd& avg, const ChatterSubdivision& sub,
                              const std::vector<double>& cum, double u1, double u2,
                              Eigen::VectorXd& defect) {
  const double L = sub.block_length();
  for (std::size_t i = 0; i + 1 < cum.size(); ++i) {
    const double lo = std::max(u1, cum[i]);
    const double hi = std::min(u2, cum[i + 1]);
    if (hi > lo) defect += (L * (hi - lo)) * (avg - fields[i]);
  }
}

}  // namespace

double chatter_defect(const std::vector<Eigen::VectorXd>& fields,
                      const std::vector<double>& weights, const ChatterSubdivision& sub,
                      const std::vector<std::pair<double, double>>& t_pairs) {
  if (fields.size() != weights.size() ||
      fields.size() != static_cast<std::size_t>(sub.field_count()))
    throw AnalysisError("chatter_defect: fields/weights/subdivision mismatch");
  if (fields.empty()) throw AnalysisError("chatter_defect: no fields");

  const auto d = fields.front().size();
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < fields.size(); ++i) avg += weights[i] * fields[i];

  std::vector<double> cum(fields.size() + 1, 0.0);
  for (std::size_t i = 0; i < weights.size(); ++i) cum[i + 1] = cum[i] + weights[i];
  cum.back() = 1.0;

  double worst = 0.0;
  for (const auto& [ta, tb] : t_pairs) {
    const auto [j1, u1] = locate_in_blocks(sub, std::min(ta, tb));
    const auto [j2, u2] = locate_in_blocks(sub, std::max(ta, tb));
    Eigen::VectorXd defect = Eigen::VectorXd::Zero(d);
    if (j1 == j2) {
      accumulate_partial_block(fields, avg, sub, cum, u1, u2, defect);
    } else {
      // Whole blocks between the two partial ends integrate to exactly zero:
      // each block spends weight_i * L on field i by construction.
      accumulate_partial_block(fields, avg, sub, cum, u1, 1.0, defect);
      accumulate_partial_block(fields, avg, sub, cum, 0.0, u2, defect);
    }
    worst = std::max(worst, defect.norm());
  }
  return worst;
}

double max_chatter_defect(const std::vector<Eigen::VectorXd>& fields,
                          const std::vector<double>& weights, const ChatterSubdivision& sub) {
  if (fields.size() != weights.size() ||
      fields.size() != static_cast<std::size_t>(sub.field_count()))
    throw AnalysisError("max_chatter_defect: fields/weights/subdivision mismatch");
  const auto d = fields.front().size();
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < fields.size(); ++i) avg += weights[i] * fields[i];

  // Vertices of the running defect over one block; the pattern repeats with
  // anchor zero, so the sup over all pairs is the vertex-set diameter.
  std::vector<Eigen::VectorXd> verts;
  verts.push_back(Eigen::VectorXd::Zero(d));
  const double L = sub.block_length();
  for (std::size_t i = 0; i < fields.size(); ++i)
    verts.push_back(verts.back() + (weights[i] * L) * (avg - fields[i]));

  double diam = 0.0;
  for (std::size_t i = 0; i < verts.size(); ++i)
    for (std::size_t j = i + 1; j < verts.size(); ++j)
      diam = std::max(diam, (verts[i] - verts[j]).norm());
  return diam;
}

// ---------------------------------------------------------------------------
// Probes
// ---------------------------------------------------------------------------

void parallel_for(int n, const std::function<void(int)>& body) {
  int cap = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RR_SIM_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) cap = v;
  }
  cap = std::max(1, std::min(cap, n));
  if (cap == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(cap));
  for (int w = 0; w < cap; ++w)
    workers.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  for (auto& t : workers) t.join();
}

SwitchProbeResult max_switching_time_probe(const ControlAffineSystem& sys, const StateVec& x0,
                                           const SwitchProbeConfig& cfg) {
  if (!(cfg.tau_lo > 0.0 && cfg.tau_hi >= cfg.tau_lo))
    throw std::domain_error("switch probe: needs 0 < tau_lo <= tau_hi");
  SwitchProbeResult res;

  auto settles = [&](const Trajectory& traj) {
    const auto v =
        stability_verdict(traj, std::numeric_limits<double>::infinity(), cfg.eta,
                          cfg.settle_fraction, cfg.norm_offset, cfg.norm_len);
    return v.kind == StabilityVerdict::Kind::ConvergesTo0;
  };

  {
    IntegratorConfig icfg{cfg.step, cfg.horizon, 1};
    const Trajectory nominal =
        integrate_closed_loop(sys, ClosedLoopMode::nominal(), x0, cfg.t0, icfg);
    res.nominal_converges = settles(nominal);
    if (!res.nominal_converges) return res;
  }

  auto try_tau = [&](double tau) {
    IntegratorConfig icfg{std::min(cfg.step, tau), cfg.horizon, 1};
    const Trajectory traj = integrate_closed_loop(
        sys, ClosedLoopMode::sparse(ConstantSchedule(tau, sys.m, cfg.t0)), x0, cfg.t0, icfg);
    const bool ok = settles(traj);
    res.observations.emplace_back(tau, ok);
    return ok;
  };

  const bool hi_ok = try_tau(cfg.tau_hi);
  if (hi_ok) {
    res.found = true;
    res.critical_tau = cfg.tau_hi;
    return res;
  }
  if (cfg.tau_hi == cfg.tau_lo || !try_tau(cfg.tau_lo)) {
    res.found = false;  // no tau in range succeeded
    return res;
  }

  double lo = cfg.tau_lo, hi = cfg.tau_hi;  // lo succeeded, hi failed
  while (hi - lo > cfg.rel_tol * lo) {
    const double mid = 0.5 * (lo + hi);
    if (try_tau(mid))
      lo = mid;
    else
      hi = mid;
  }
  res.found = true;
  res.critical_tau = lo;

  // Non-monotone observations: a failure below some success.
  auto obs = res.observations;
  std::sort(obs.begin(), obs.end());
  double largest_success = 0.0;
  for (const auto& [tau, ok] : obs)
    if (ok) largest_success = tau;
  for (const auto& [tau, ok] : obs)
    if (!ok && tau < largest_success) res.monotone = false;
  return res;
}

DivergenceReport tau_sweep(const ControlAffineSystem& sys, const StateVec& x0, double t0,
                           const std::vector<double>& taus, const std::array<double, 2>& window,
                           double step) {
  DivergenceReport report;
  report.taus = taus;
  report.gaps.assign(taus.size(), 0.0);
  report.window = window;

  const double horizon = window[1] - t0;
  IntegratorConfig cfg{step, horizon, 1};
  const Trajectory nominal = integrate_closed_loop(sys, ClosedLoopMode::nominal(), x0, t0, cfg);

  parallel_for(static_cast<int>(taus.size()), [&](int i) {
    const Trajectory switched = integrate_closed_loop(
        sys, ClosedLoopMode::sparse(ConstantSchedule(taus[static_cast<std::size_t>(i)], sys.m, t0)),
        x0, t0, cfg);
    report.gaps[static_cast<std::size_t>(i)] =
        sup_norm_gap(nominal, switched, window[0], window[1]);
  });
  return report;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string to_string(StabilityVerdict::Kind kind) {
  switch (kind) {
    case StabilityVerdict::Kind::StaysInBall: return "stays-in-ball";
    case StabilityVerdict::Kind::ConvergesTo0: return "converges-to-0";
    case StabilityVerdict::Kind::Diverges: return "diverges";
    case StabilityVerdict::Kind::Blowup: return "blowup";
  }
  return "unknown";
}

nlohmann::json to_json(const DivergenceReport& r) {
  return nlohmann::json{{"taus", r.taus}, {"gaps", r.gaps}, {"window", r.window}};
}

nlohmann::json to_json(const StabilityVerdict& v) {
  nlohmann::json j{{"kind", to_string(v.kind)},
                   {"epsilon", v.epsilon},
                   {"eta", v.eta},
                   {"sup_norm", v.sup_norm}};
  if (v.kind == StabilityVerdict::Kind::Diverges) j["first_exit_time"] = v.first_exit_time;
  if (v.kind == StabilityVerdict::Kind::ConvergesTo0) j["settled_time"] = v.settled_time;
  if (v.kind == StabilityVerdict::Kind::Blowup) j["blowup_time"] = v.blowup_time;
  return j;
}

nlohmann::json to_json(const ContractionConstants& c) {
  return nlohmann::json{{"lambda_g", c.lambda_g},
                        {"lambda_prime", c.lambda_prime},
                        {"kappa", c.kappa},
                        {"C", c.overshoot_C},
                        {"lambda", c.lambda}};
}

}  // namespace rrsim
