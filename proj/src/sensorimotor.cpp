#include "octoarm/sensorimotor.hpp"

#include <algorithm>
#include <cmath>

#include "octoarm/environment.hpp"

namespace octoarm {

double interp_units(const std::vector<double>& vals, const std::vector<double>& su, double s) {
  int N = static_cast<int>(su.size());
  if (s <= su.front()) return vals.front();
  if (s >= su.back()) return vals.back();
  int i = static_cast<int>(std::upper_bound(su.begin(), su.end(), s) - su.begin()) - 1;
  i = std::min(std::max(i, 0), N - 2);
  double f = (s - su[i]) / (su[i + 1] - su[i]);
  return (1.0 - f) * vals[i] + f * vals[i + 1];
}

EstimateFields interpolate_estimates(const ConsensusState& est, const ArmSenseInputs& in,
                                     const SensingParams& sp, const RodParameters& rp) {
  int n = rp.n_elem;
  std::vector<double> su = unit_arclengths(sp);
  std::vector<double> rho_unit(sp.n_units);
  for (int i = 0; i < sp.n_units; ++i)
    rho_unit[i] = std::exp(-est.mu[i] * in.conc[i]);

  EstimateFields f;
  f.alpha_mid.resize(n);
  f.rho_node.resize(n + 1);
  for (int e = 0; e < n; ++e) {
    double s = (e + 0.5) / n;  // arm lengths
    f.alpha_mid[e] = interp_units(est.alpha, su, s);
  }
  for (int k = 0; k <= n; ++k) f.rho_node[k] = interp_units(rho_unit, su, double(k) / n);
  f.closest_node = closest_point_index(f.rho_node);
  f.s_hat = f.closest_node * rp.ds();
  return f;
}

ControlInputs certainty_equivalence_currents(const EstimateFields& f, const RodParameters& rp,
                                             const ControlParams& cp, bool enable_trans) {
  return muscle_currents(f.alpha_mid, element_midpoint_s(rp), f.s_hat, cp, enable_trans);
}

ArmStart make_rest_arm(const RodParameters& rp, const MuscleParams& mp, const CableParams& cp,
                       double v_top0, double v_topL, double v_bot0, double v_botL,
                       RodMode mode) {
  int n = rp.n_elem;
  double ds = rp.ds();
  RestProfile top = rest_voltage_profile(cp, v_top0, v_topL, rp.L);
  RestProfile bot = rest_voltage_profile(cp, v_bot0, v_botL, rp.L);
  ArmStart st;
  st.top = make_cable_state(n);
  st.bottom = make_cable_state(n);
  st.trans = make_cable_state(n);
  st.u0 = Activations::zero(n);
  for (int e = 0; e < n; ++e) {
    double s = (e + 0.5) * ds;
    st.top.V[e] = top.eval(s);
    st.bottom.V[e] = bot.eval(s);
    st.top.W[e] = cp.b * std::max(st.top.V[e], 0.0);
    st.bottom.W[e] = cp.b * std::max(st.bottom.V[e], 0.0);
    st.u0.top[e] = activation_sigmoid(st.top.V[e]);
    st.u0.bottom[e] = activation_sigmoid(st.bottom.V[e]);
    st.u0.trans[e] = activation_sigmoid(0.0);
  }
  Deformations d = solve_static_deformations(rp, mp, st.u0, mode);
  st.rod = make_state_from_deformations(rp, d);
  return st;
}

namespace {

struct ReachTracker {
  double eps = 0.0;
  LoopResult* res;
  double entry = -1.0;  // start of the current inside-eps stretch
  bool touched = false;
  void observe(double t, double rho) {
    if (rho <= eps) {
      if (entry < 0.0) entry = t;
      touched = true;
    } else {
      entry = -1.0;
      if (touched) res->held = false;
    }
    res->reached = entry >= 0.0;
    res->t_reach = entry;
  }
};

}  // namespace

LoopResult run_truth_reach(const RodParameters& rp, const MuscleParams& mp,
                           const CableParams& cp, const ControlParams& ctrl,
                           const ArmStart& start, Vec2 target, const LoopParams& lp,
                           CsvWriter* log) {
  int n = rp.n_elem;
  double ds = rp.ds();
  std::vector<double> s_mid = element_midpoint_s(rp);
  CableBc neu;

  LoopResult res;
  res.state = start.rod;
  CableState top = start.top, bottom = start.bottom, trans = start.trans;
  Activations u = start.u0;
  StepOptions so;
  so.mode = lp.mode;
  so.dt = lp.dt;

  ReachTracker track{ctrl.eps_frac * rp.L, &res};
  long steps = static_cast<long>(std::llround(lp.t_final / lp.dt));

  for (long k = 0; k <= steps; ++k) {
    double t = k * lp.dt;
    PolarField pol = measure_target_polar(res.state, rp, target);
    int ci = closest_point_index(pol.rho);
    double s_bar = ci * ds;
    double rho = pol.rho[ci];
    track.observe(t, rho);
    double tip_cos = std::cos(pol.alpha[n]);
    if (k % lp.log_stride == 0 || k == steps) {
      res.samples.push_back({t, rho, s_bar, 0.0, 0.0, 0.0, tip_cos});
      if (log) log->row({t, rho, s_bar, 0.0, 0.0, 0.0, tip_cos});
    }
    if (k == steps) {
      res.final_rho = rho;
      res.final_tip_cos_alpha = tip_cos;
      break;
    }

    std::vector<double> alpha_mid = measure_midpoint_bearing(res.state, target);
    ControlInputs in = muscle_currents(alpha_mid, s_mid, s_bar, ctrl, lp.enable_trans);
    step_cable(top, cp, in.top, ds, lp.dt, neu, neu);
    step_cable(bottom, cp, in.bottom, ds, lp.dt, neu, neu);
    step_cable(trans, cp, in.trans, ds, lp.dt, neu, neu);
    for (int e = 0; e < n; ++e) {
      u.top[e] = activation_sigmoid(top.V[e]);
      u.bottom[e] = activation_sigmoid(bottom.V[e]);
      u.trans[e] = activation_sigmoid(trans.V[e]);
    }
    step_arm(res.state, rp, mp, u, so);
  }
  return res;
}

LoopResult run_sensorimotor(const RodParameters& rp, const MuscleParams& mp,
                            const CableParams& cp, const ControlParams& ctrl,
                            const SensingParams& sp, const SensorArrayOptions& so_opt,
                            const ArmStart& start, Vec2 target, const LoopParams& lp,
                            std::uint64_t seed, CsvWriter* log) {
  int n = rp.n_elem;
  double ds = rp.ds();
  CableBc neu;

  LoopResult res;
  res.state = start.rod;
  CableState top = start.top, bottom = start.bottom, trans = start.trans;
  Activations u = start.u0;
  StepOptions so;
  so.mode = lp.mode;
  so.dt = lp.dt;

  SensorArray sensors(sp, so_opt, seed);
  RngStream kap_noise(seed, streams::kCurvatureNoise);
  RngStream con_noise(seed, streams::kConcentrationNoise);
  int N = sp.n_units;
  std::vector<int> unit_node(N);
  for (int i = 0; i < N; ++i) {
    double s = static_cast<double>(i) / (N - 1);  // arm lengths
    unit_node[i] = static_cast<int>(std::lround(s * n));
  }
  ArmSenseInputs in_cached;
  in_cached.kappa.assign(N, 0.0);
  in_cached.conc.assign(N, 0.0);
  Vec2 target_L = (1.0 / rp.L) * target;

  ReachTracker track{ctrl.eps_frac * rp.L, &res};
  long steps = static_cast<long>(std::llround(lp.t_final / lp.dt));
  long sense_count = 0;
  std::vector<Vec2> upos(N), est_targets(N);

  for (long k = 0; k <= steps; ++k) {
    double t = k * lp.dt;

    // Sensors fire first so the estimator state always reflects the arm as
    // currently seen; estimator integrates across the sense stride.
    if (k % lp.sense_stride == 0) {
      Deformations d = compute_deformations(res.state, rp);
      for (int i = 0; i < N; ++i) {
        int node = std::min(std::max(unit_node[i], 1), n - 1);
        double kap = d.kappa[node - 1] * rp.L;
        double dist = norm(target - res.state.pos[unit_node[i]]);
        if (!(dist > 0.0)) throw NumericsError("sensor sits on the source");
        double conc = steady_concentration(dist, rp.L, sp.mu);
        if (lp.noise_level > 0.0) {
          // Common-mode noise: one draw per channel per sense step, scaled by
          // each reading (see the sensing lane for why sensor-independent
          // concentration draws poison the intensity consensus).
          std::uint64_t c = static_cast<std::uint64_t>(sense_count);
          kap *= 1.0 + lp.noise_level * kap_noise.normal(c);
          conc *= 1.0 + lp.noise_level * con_noise.normal(c);
        }
        in_cached.kappa[i] = kap;
        in_cached.conc[i] = conc;
      }
      sensors.step(in_cached, lp.dt * lp.sense_stride);
      ++sense_count;
    }

    PolarField pol = measure_target_polar(res.state, rp, target);
    int ci = closest_point_index(pol.rho);
    double s_bar = ci * ds;
    double rho = pol.rho[ci];
    double tip_cos = std::cos(pol.alpha[n]);
    track.observe(t, rho);

    double e_r = 0.0;
    if (k % lp.log_stride == 0 || k == steps) {
      const ConsensusState& est = sensors.estimates();
      for (int i = 0; i < N; ++i) {
        upos[i] = (1.0 / rp.L) * res.state.pos[unit_node[i]];
        est_targets[i] = target_estimate(upos[i], est.theta[i], est.alpha[i], est.mu[i],
                                         in_cached.conc[i]);
      }
      e_r = sensing_error(est_targets, target_L);
      res.samples.push_back({t, rho, s_bar, e_r, sensors.last_e_prop(),
                             sensors.last_e_chemo(), tip_cos});
      if (log) log->row({t, rho, s_bar, e_r, sensors.last_e_prop(),
                         sensors.last_e_chemo(), tip_cos});
    }
    if (k == steps) {
      res.final_rho = rho;
      res.final_tip_cos_alpha = tip_cos;
      res.final_e_r = e_r;
      break;
    }

    EstimateFields f = interpolate_estimates(sensors.estimates(), in_cached, sp, rp);
    ControlInputs in = certainty_equivalence_currents(f, rp, ctrl, lp.enable_trans);
    step_cable(top, cp, in.top, ds, lp.dt, neu, neu);
    step_cable(bottom, cp, in.bottom, ds, lp.dt, neu, neu);
    step_cable(trans, cp, in.trans, ds, lp.dt, neu, neu);
    for (int e = 0; e < n; ++e) {
      u.top[e] = activation_sigmoid(top.V[e]);
      u.bottom[e] = activation_sigmoid(bottom.V[e]);
      u.trans[e] = activation_sigmoid(trans.V[e]);
    }
    step_arm(res.state, rp, mp, u, so);
  }
  res.estimates = sensors.estimates();
  return res;
}

}  // namespace octoarm
