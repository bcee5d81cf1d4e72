#include "octoarm/runs.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <thread>

#include "octoarm/environment.hpp"

namespace octoarm {

namespace {

// Rest clamp voltages shared by every dynamic run: the arm always wakes up in
// the balanced shape these cables hold.
constexpr double kRestTopV0 = 60.0;
constexpr double kRestTopVL = 80.0;
constexpr double kRestBotV0 = 40.0;
constexpr double kRestBotVL = 0.0;

Vec2 scenario_target_m(const Scenario& s) {
  return Vec2{s.target_x * s.rod.L, s.target_y * s.rod.L};
}

std::vector<int> sensor_nodes(const SensingParams& sp, int n) {
  std::vector<int> nodes(sp.n_units);
  for (int i = 0; i < sp.n_units; ++i)
    nodes[i] = static_cast<int>(std::lround(static_cast<double>(i) / (sp.n_units - 1) * n));
  return nodes;
}

}  // namespace

std::vector<RestShapeCell> run_rest_shape(const Scenario& s, RunReport* rep) {
  const RodParameters& rp = s.rod;
  int n = rp.n_elem;
  double ds = rp.ds();

  auto balance = [&](double tv0, double tvl, double gain) {
    CableParams cp = s.cable;
    cp.b = gain;
    RestProfile top = rest_voltage_profile(cp, tv0, tvl, rp.L);
    RestProfile bot = rest_voltage_profile(cp, s.rest.bottom_v0, s.rest.bottom_vl, rp.L);
    Activations u = Activations::zero(n);
    for (int e = 0; e < n; ++e) {
      double sm = (e + 0.5) * ds;
      u.top[e] = activation_sigmoid(top.eval(sm));
      u.bottom[e] = activation_sigmoid(bot.eval(sm));
      u.trans[e] = activation_sigmoid(0.0);
    }
    RestShapeCell cell;
    cell.top_v0 = tv0;
    cell.top_vl = tvl;
    cell.bottom_v0 = s.rest.bottom_v0;
    cell.bottom_vl = s.rest.bottom_vl;
    cell.gain_b = gain;
    cell.def = solve_static_deformations(rp, s.muscle, u, RodMode::constrained);
    cell.kappa_base = cell.def.kappa.front();
    cell.kappa_tip = cell.def.kappa.back();
    double th = 0.0;
    for (double k : cell.def.kappa) th += k * ds;
    cell.theta_tip = th;
    return cell;
  };

  std::vector<RestShapeCell> cells;
  int nv0 = static_cast<int>(s.rest.top_v0.size());
  int nvl = static_cast<int>(s.rest.top_vl.size());
  for (int i = 0; i < nv0; ++i)
    for (int j = 0; j < nvl; ++j)
      cells.push_back(balance(s.rest.top_v0[i], s.rest.top_vl[j], s.cable.b));
  int grid_count = nv0 * nvl;
  for (double g : s.rest.b_sweep)
    cells.push_back(balance(s.rest.sweep_top_v0, s.rest.sweep_top_vl, g));

  RestShapeCell straight = balance(s.rest.bottom_v0, s.rest.bottom_vl, s.cable.b);
  double straight_max = 0.0;
  for (double k : straight.def.kappa) straight_max = std::max(straight_max, std::abs(k));

  bool ok = true;
  auto at = [&](int i, int j) -> const RestShapeCell& { return cells[i * nvl + j]; };
  for (int j = 0; j < nvl; ++j)
    for (int i = 0; i + 1 < nv0; ++i)
      if (!(at(i + 1, j).kappa_base > at(i, j).kappa_base)) {
        ok = false;
        if (rep) rep->notes.push_back("base curvature not monotone in the base clamp");
      }
  for (int i = 0; i < nv0; ++i)
    for (int j = 0; j + 1 < nvl; ++j)
      if (!(at(i, j + 1).kappa_tip > at(i, j).kappa_tip)) {
        ok = false;
        if (rep) rep->notes.push_back("tip curvature not monotone in the tip clamp");
      }
  for (int k = grid_count; k + 1 < static_cast<int>(cells.size()); ++k)
    if (!(std::abs(cells[k + 1].theta_tip) < std::abs(cells[k].theta_tip))) {
      ok = false;
      if (rep) rep->notes.push_back("recurrence gain sweep does not straighten the arm");
    }
  if (straight_max > 1e-8) {
    ok = false;
    if (rep) rep->notes.push_back("equal clamps do not give a straight arm");
  }

  if (rep) {
    rep->ok = rep->ok && ok;
    rep->metric("grid_cells", grid_count);
    rep->metric("sweep_cells", static_cast<double>(s.rest.b_sweep.size()));
    rep->metric("straight_kappa_max", straight_max);
    rep->metric("theta_tip_first", cells.front().theta_tip);
    rep->metric("theta_tip_last", cells[grid_count - 1].theta_tip);
  }

  if (!s.out_dir.empty()) {
    CsvWriter grid;
    grid.open(s.out_dir + "/rest_grid.csv",
              {"cell", "top_v0", "top_vl", "b", "theta_tip", "kappa_base", "kappa_tip"});
    for (size_t c = 0; c < cells.size(); ++c)
      grid.row({static_cast<double>(c), cells[c].top_v0, cells[c].top_vl, cells[c].gain_b,
                cells[c].theta_tip, cells[c].kappa_base, cells[c].kappa_tip});
    CsvWriter shapes;
    shapes.open(s.out_dir + "/rest_shapes.csv",
                {"cell", "top_v0", "top_vl", "b", "s", "kappa"});
    for (size_t c = 0; c < cells.size(); ++c)
      for (int i = 0; i + 1 < n; ++i)
        shapes.row({static_cast<double>(c), cells[c].top_v0, cells[c].top_vl,
                    cells[c].gain_b, (i + 1) * ds, cells[c].def.kappa[i]});
    if (rep) {
      rep->files.push_back(s.out_dir + "/rest_grid.csv");
      rep->files.push_back(s.out_dir + "/rest_shapes.csv");
    }
  }
  return cells;
}

Deformations bent_arm_shape(const Scenario& s) {
  // Canonical hooked test shape: kappa(s) = (1.5 + cos(pi s/L))/L,
  // inextensible and shear-free.  Smooth with flat curvature at both ends,
  // total turning angle 1.5 rad.
  const RodParameters& rp = s.rod;
  int n = rp.n_elem;
  Deformations d;
  d.nu1.assign(n, 1.0);
  d.nu2.assign(n, 0.0);
  d.kappa.resize(n - 1);
  for (int i = 1; i < n; ++i) {
    double sf = static_cast<double>(i) / n;  // arclength fraction at node i
    d.kappa[i - 1] = (1.5 + std::cos(M_PI * sf)) / rp.L;
  }
  return d;
}

SenseRunResult run_sense_once(const Scenario& s, const Deformations& shape, Vec2 target,
                              std::uint64_t seed, CsvWriter* log) {
  SenseRunResult out;
  try {
    const RodParameters& rp = s.rod;
    const SensingParams& sp = s.sense;
    int n = rp.n_elem;
    int N = sp.n_units;
    RodState st = make_state_from_deformations(rp, shape);
    std::vector<int> nodes = sensor_nodes(sp, n);
    out.unit_pos.resize(N);
    for (int i = 0; i < N; ++i) out.unit_pos[i] = (1.0 / rp.L) * st.pos[nodes[i]];
    Vec2 target_m = rp.L * target;

    SensorArrayOptions opt;
    opt.mode = (s.estimator == "rings") ? SensingMode::rings : SensingMode::direct;
    opt.pin_mu = (s.mu_mode == "pinned");
    SensorArray sensors(sp, opt, seed);
    RngStream kn(seed, streams::kCurvatureNoise);
    RngStream cn(seed, streams::kConcentrationNoise);
    double noise = s.noise ? s.noise_level : 0.0;

    ArmSenseInputs in;
    in.kappa.assign(N, 0.0);
    in.conc.assign(N, 0.0);
    auto read_inputs = [&](long step) {
      for (int i = 0; i < N; ++i) {
        int node = std::min(std::max(nodes[i], 1), n - 1);
        double kap = shape.kappa[node - 1] * rp.L;
        double dist = norm(target_m - st.pos[nodes[i]]);
        if (!(dist > 0.0)) throw NumericsError("sensor sits on the source");
        double conc = steady_concentration(dist, rp.L, sp.mu);
        if (noise > 0.0) {
          // One fresh draw per channel per step, shared across the array and
          // scaled by each reading.  Sensor-independent concentration draws
          // would let the consensus flow rectify the noise variance and walk
          // the soft intensity mode toward zero; the shared draw cancels in
          // neighbor differences, which matches the small reported noise
          // penalty of the estimator.
          std::uint64_t c = static_cast<std::uint64_t>(step);
          kap *= 1.0 + noise * kn.normal(c);
          conc *= 1.0 + noise * cn.normal(c);
        }
        in.kappa[i] = kap;
        in.conc[i] = conc;
      }
    };
    auto eval_err = [&]() {
      const ConsensusState& est = sensors.estimates();
      std::vector<Vec2> et(N);
      for (int i = 0; i < N; ++i)
        et[i] = target_estimate(out.unit_pos[i], est.theta[i], est.alpha[i], est.mu[i],
                                in.conc[i]);
      return sensing_error(et, target);
    };

    if (s.assumptions == "thm2") {
      // Start the consensus at its fixed point for the noiseless readings:
      // shape angles from the cumulative trapezoid of the curvature readings,
      // bearings true up to a small jitter, intensities pinned.  This probes
      // local stability of the estimate flow rather than basin capture.
      ConsensusState fp;
      fp.theta.resize(N);
      fp.alpha.resize(N);
      fp.mu.assign(N, sp.mu);
      double dsl = unit_spacing(sp);
      RngStream jit(seed, streams::kInitAlpha);
      std::vector<double> kap(N);
      for (int i = 0; i < N; ++i) {
        int kn = std::min(std::max(nodes[i], 1), n - 1);
        kap[i] = shape.kappa[kn - 1] * rp.L;
      }
      for (int i = 0; i < N; ++i) {
        fp.theta[i] = (i == 0) ? 0.0
                               : fp.theta[i - 1] + 0.5 * (kap[i] + kap[i - 1]) * dsl;
        Vec2 rel = target - out.unit_pos[i];
        fp.alpha[i] = std::atan2(rel.y, rel.x) - fp.theta[i] + jit.uniform(N + i, -0.1, 0.1);
      }
      sensors.reset_state(fp);
    }

    long steps = static_cast<long>(std::llround(s.duration / s.dt));
    read_inputs(0);
    for (long k = 0; k <= steps; ++k) {
      if (log && (k % s.log_stride == 0 || k == steps))
        log->row({k * s.dt, eval_err(), sensors.last_e_prop(), sensors.last_e_chemo()});
      if (k == steps) break;
      if (noise > 0.0 && k > 0) read_inputs(k);
      sensors.step(in, s.dt);
    }
    out.e_r = eval_err();
    out.e_prop = sensors.last_e_prop();
    out.e_chemo = sensors.last_e_chemo();
    out.est = sensors.estimates();
  } catch (const std::exception& e) {
    out.failed = true;
    out.message = e.what();
  }
  return out;
}

StatsSummary run_stats(const Scenario& s, RunReport* rep) {
  if (s.stats.nx == 0) throw ConfigError("stats grid is unset; finalize the scenario first");
  Deformations shape;
  if (s.arm == "bent") {
    shape = bent_arm_shape(s);
  } else {
    int n = s.rod.n_elem;
    shape.nu1.assign(n, 1.0);
    shape.nu2.assign(n, 0.0);
    shape.kappa.assign(n - 1, 0.0);
  }

  int nx = s.stats.nx, ny = s.stats.ny;
  int total = nx * ny;
  double dx = (s.stats.x1 - s.stats.x0) / nx;
  double dy = (s.stats.y1 - s.stats.y0) / ny;
  std::vector<Vec2> targets;
  targets.reserve(total);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      targets.push_back(Vec2{s.stats.x0 + (i + 0.5) * dx, s.stats.y0 + (j + 0.5) * dy});

  std::vector<SenseRunResult> results(total);
  std::atomic<int> next{0};
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, total);
  std::vector<std::future<void>> futs;
  futs.reserve(workers);
  for (int w = 0; w < workers; ++w)
    futs.push_back(std::async(std::launch::async, [&] {
      for (int i = next.fetch_add(1); i < total; i = next.fetch_add(1))
        results[i] = run_sense_once(s, shape, targets[i], derive_seed(s.seed, i), nullptr);
    }));
  for (auto& f : futs) f.get();

  StatsSummary sum;
  double acc = 0.0;
  sum.min_e = std::numeric_limits<double>::infinity();
  sum.max_e = 0.0;
  for (const auto& r : results) {
    if (r.failed) {
      ++sum.failed;
      continue;
    }
    ++sum.n;
    acc += r.e_r;
    sum.min_e = std::min(sum.min_e, r.e_r);
    sum.max_e = std::max(sum.max_e, r.e_r);
    sum.errors.push_back(r.e_r);
  }
  sum.mean = sum.n > 0 ? acc / sum.n : 0.0;
  if (sum.n == 0) sum.min_e = 0.0;

  if (rep) {
    rep->ok = rep->ok && sum.failed == 0 && sum.n > 0;
    rep->metric("targets", total);
    rep->metric("failed", sum.failed);
    rep->metric("mean_e_r", sum.mean);
    rep->metric("min_e_r", sum.min_e);
    rep->metric("max_e_r", sum.max_e);
    for (const auto& r : results)
      if (r.failed) rep->notes.push_back("target run failed: " + r.message);
  }
  if (!s.out_dir.empty()) {
    CsvWriter csv;
    csv.open(s.out_dir + "/stats.csv",
             {"idx", "target_x", "target_y", "e_r", "e_prop", "failed"});
    for (int i = 0; i < total; ++i)
      csv.row({static_cast<double>(i), targets[i].x, targets[i].y, results[i].e_r,
               results[i].e_prop, results[i].failed ? 1.0 : 0.0});
    if (rep) rep->files.push_back(s.out_dir + "/stats.csv");
  }
  return sum;
}

LoopResult run_reach_scenario(const Scenario& s, RunReport* rep) {
  RodMode mode = scenario_rod_mode(s);
  bool trans = (mode == RodMode::extensible);
  ArmStart start = make_rest_arm(s.rod, s.muscle, s.cable, kRestTopV0, kRestTopVL,
                                 kRestBotV0, kRestBotVL, mode);
  LoopParams lp;
  lp.dt = s.dt;
  lp.t_final = s.duration;
  lp.mode = mode;
  lp.enable_trans = trans;
  lp.log_stride = s.log_stride;

  CsvWriter log;
  CsvWriter* lg = nullptr;
  if (!s.out_dir.empty()) {
    log.open(s.out_dir + "/reach.csv",
             {"t", "rho", "s_bar", "e_r", "e_prop", "e_chemo", "tip_cos_alpha"});
    lg = &log;
    if (rep) rep->files.push_back(s.out_dir + "/reach.csv");
  }
  LoopResult res = run_truth_reach(s.rod, s.muscle, s.cable, s.control, start,
                                   scenario_target_m(s), lp, lg);
  if (rep) {
    rep->metric("reached", res.reached ? 1.0 : 0.0);
    rep->metric("held", res.held ? 1.0 : 0.0);
    rep->metric("t_reach", res.t_reach);
    rep->metric("final_rho_over_L", res.final_rho / s.rod.L);
    rep->metric("final_tip_cos_alpha", res.final_tip_cos_alpha);
    if (s.reach_case == "II")
      rep->ok = rep->ok && res.final_tip_cos_alpha >= 0.95;
    else
      rep->ok = rep->ok && res.reached;
  }
  return res;
}

LoopResult run_sensorimotor_scenario(const Scenario& s, RunReport* rep) {
  RodMode mode = scenario_rod_mode(s);
  bool trans = (mode == RodMode::extensible);
  ArmStart start = make_rest_arm(s.rod, s.muscle, s.cable, kRestTopV0, kRestTopVL,
                                 kRestBotV0, kRestBotVL, mode);
  SensorArrayOptions opt;
  opt.mode = (s.estimator == "rings") ? SensingMode::rings : SensingMode::direct;
  opt.pin_mu = (s.mu_mode == "pinned");
  LoopParams lp;
  lp.dt = s.dt;
  lp.t_final = s.duration;
  lp.sense_stride = s.sense_stride;
  lp.noise_level = s.noise ? s.noise_level : 0.0;
  lp.mode = mode;
  lp.enable_trans = trans;
  lp.log_stride = s.log_stride;

  CsvWriter log;
  CsvWriter* lg = nullptr;
  if (!s.out_dir.empty()) {
    log.open(s.out_dir + "/loop.csv",
             {"t", "rho", "s_bar", "e_r", "e_prop", "e_chemo", "tip_cos_alpha"});
    lg = &log;
    if (rep) rep->files.push_back(s.out_dir + "/loop.csv");
  }
  LoopResult res = run_sensorimotor(s.rod, s.muscle, s.cable, s.control, s.sense, opt,
                                    start, scenario_target_m(s), lp, s.seed, lg);
  if (rep) {
    rep->metric("reached", res.reached ? 1.0 : 0.0);
    rep->metric("t_reach", res.t_reach);
    rep->metric("final_rho_over_L", res.final_rho / s.rod.L);
    rep->metric("final_e_r", res.final_e_r);
    rep->ok = rep->ok && res.reached;
  }
  return res;
}

McCompare run_mc_scenario(const Scenario& s, RunReport* rep) {
  const McSetup& m = s.mc;
  McCompare c;
  Vec2 target{m.range0 * std::cos(m.bearing0), m.range0 * std::sin(m.bearing0)};
  c.oracle = mc_unicycle_oracle(Vec2{0.0, 0.0}, 0.0, target, m.speed, s.control.chi,
                                m.dt, m.duration, m.capture);
  c.flow = integrate_bearing_flow(m.range0, m.bearing0, s.control.chi / m.speed,
                                  m.speed * m.dt, m.speed * m.duration, m.capture);
  size_t K = std::min(c.oracle.zeta.size(), c.flow.rho.size());
  for (size_t k = 0; k < K; ++k) {
    c.max_gap = std::max(c.max_gap, std::abs(c.oracle.zeta[k] - c.flow.rho[k]));
    c.max_gap = std::max(c.max_gap, std::abs(c.oracle.phi[k] - c.flow.alpha[k]));
  }
  if (rep) {
    rep->metric("max_gap", c.max_gap);
    rep->metric("oracle_captured", c.oracle.captured ? 1.0 : 0.0);
    rep->metric("flow_captured", c.flow.captured ? 1.0 : 0.0);
    rep->ok = rep->ok && c.max_gap <= 1e-4 && c.oracle.captured == c.flow.captured;
  }
  if (!s.out_dir.empty()) {
    CsvWriter csv;
    csv.open(s.out_dir + "/mc.csv", {"t", "zeta", "phi", "rho", "alpha"});
    for (size_t k = 0; k < K; ++k)
      csv.row({k * m.dt, c.oracle.zeta[k], c.oracle.phi[k], c.flow.rho[k],
               c.flow.alpha[k]});
    if (rep) rep->files.push_back(s.out_dir + "/mc.csv");
  }
  return c;
}

RunReport run_scenario(const Scenario& s) {
  RunReport rep;
  rep.kind = s.kind;
  rep.hash = scenario_hash(s);
  if (!s.out_dir.empty()) {
    std::filesystem::create_directories(s.out_dir);
    std::ofstream cfg(s.out_dir + "/config.txt");
    if (!cfg) throw ConfigError("cannot write " + s.out_dir + "/config.txt");
    cfg << serialize_scenario(s);
    rep.files.push_back(s.out_dir + "/config.txt");
  }

  if (s.kind == "rest_shape") {
    run_rest_shape(s, &rep);
  } else if (s.kind == "reach") {
    run_reach_scenario(s, &rep);
  } else if (s.kind == "sensorimotor") {
    run_sensorimotor_scenario(s, &rep);
  } else if (s.kind == "stats") {
    run_stats(s, &rep);
  } else if (s.kind == "mc_oracle") {
    run_mc_scenario(s, &rep);
  } else if (s.kind == "sense") {
    Deformations shape;
    if (s.arm == "bent") {
      shape = bent_arm_shape(s);
    } else {
      int n = s.rod.n_elem;
      shape.nu1.assign(n, 1.0);
      shape.nu2.assign(n, 0.0);
      shape.kappa.assign(n - 1, 0.0);
    }
    CsvWriter log;
    CsvWriter* lg = nullptr;
    if (!s.out_dir.empty()) {
      log.open(s.out_dir + "/sense.csv", {"t", "e_r", "e_prop", "e_chemo"});
      lg = &log;
      rep.files.push_back(s.out_dir + "/sense.csv");
    }
    SenseRunResult r =
        run_sense_once(s, shape, Vec2{s.target_x, s.target_y}, s.seed, lg);
    rep.metric("e_r", r.e_r);
    rep.metric("e_prop", r.e_prop);
    rep.metric("e_chemo", r.e_chemo);
    if (r.failed) {
      rep.ok = false;
      rep.notes.push_back("sense run failed: " + r.message);
    } else if (!s.noise && !(s.arm == "bent" && s.mu_mode == "free")) {
      rep.ok = rep.ok && r.e_r <= 1e-2;
    }
  } else {
    throw ConfigError("unknown run kind '" + s.kind + "'");
  }

  if (!s.out_dir.empty()) {
    std::ofstream out(s.out_dir + "/report.txt");
    if (!out) throw ConfigError("cannot write " + s.out_dir + "/report.txt");
    out << "kind = " << rep.kind << "\n";
    out << "config_hash = " << rep.hash << "\n";
    out << "ok = " << (rep.ok ? "true" : "false") << "\n";
    for (const auto& [k, v] : rep.metrics) out << k << " = " << format_double(v) << "\n";
    for (const auto& n : rep.notes) out << "note: " << n << "\n";
    for (const auto& f : rep.files) out << "file: " << f << "\n";
    rep.files.push_back(s.out_dir + "/report.txt");
  }
  return rep;
}

}  // namespace octoarm
