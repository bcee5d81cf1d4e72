#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "octoarm/runs.hpp"

namespace {

struct SubOpts {
  std::string config, out;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  double tx = 0.0, ty = 0.0, duration = 0.0, noise_level = 0.0;
  std::string rcase, arm, mu, estimator;
  bool noise = false;
};

CLI::App* add_common(CLI::App& app, const char* name, const char* desc, SubOpts& o) {
  CLI::App* sub = app.add_subcommand(name, desc);
  sub->add_option("--config", o.config, "scenario file (sectioned key = value)");
  sub->add_option("--out", o.out, "output directory for CSV logs and the run report");
  sub->add_option("--seed", o.seed, "master seed");
  sub->add_option("--target-x", o.tx, "target x, arm lengths");
  sub->add_option("--target-y", o.ty, "target y, arm lengths");
  sub->add_option("--case", o.rcase, "reach case: I, II or III");
  sub->add_option("--arm", o.arm, "start shape: straight or bent");
  sub->add_option("--mu", o.mu, "source intensity estimates: free or pinned");
  sub->add_option("--estimator", o.estimator, "estimator: direct or rings");
  sub->add_option("--duration", o.duration, "run time [s]");
  sub->add_flag("--noise", o.noise, "turn sensory noise on");
  sub->add_option("--noise-level", o.noise_level, "relative noise level (implies --noise)");
  sub->add_option("--set,-D", o.sets, "section.key=value override, repeatable");
  return sub;
}

int execute(const std::string& kind, CLI::App* sub, const SubOpts& o) {
  octoarm::Scenario s = octoarm::scenario_defaults(kind);
  if (sub->count("--config")) {
    std::ifstream f(o.config);
    if (!f) throw octoarm::ConfigError("cannot read config file: " + o.config);
    std::stringstream ss;
    ss << f.rdbuf();
    octoarm::parse_scenario_text(s, ss.str());
  }
  s.kind = kind;
  if (sub->count("--seed")) s.seed = o.seed;
  if (sub->count("--target-x")) {
    s.target_x = o.tx;
    s.have_target = true;
  }
  if (sub->count("--target-y")) {
    s.target_y = o.ty;
    s.have_target = true;
  }
  if (sub->count("--case")) s.reach_case = o.rcase;
  if (sub->count("--arm")) s.arm = o.arm;
  if (sub->count("--mu")) s.mu_mode = o.mu;
  if (sub->count("--estimator")) s.estimator = o.estimator;
  if (sub->count("--duration")) s.duration = o.duration;
  if (o.noise) s.noise = true;
  if (sub->count("--noise-level")) {
    s.noise_level = o.noise_level;
    s.noise = true;
  }
  if (sub->count("--out")) s.out_dir = o.out;
  for (const auto& a : o.sets) octoarm::apply_override(s, a);
  octoarm::finalize_scenario(s);

  octoarm::RunReport rep = octoarm::run_scenario(s);
  std::printf("kind: %s\n", rep.kind.c_str());
  std::printf("config_hash: %" PRIu64 "\n", rep.hash);
  for (const auto& [k, v] : rep.metrics) std::printf("%s: %.10g\n", k.c_str(), v);
  for (const auto& n : rep.notes) std::printf("note: %s\n", n.c_str());
  for (const auto& f : rep.files) std::printf("wrote: %s\n", f.c_str());
  std::printf("verdict: %s\n", rep.ok ? "pass" : "fail");
  return rep.ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planar soft-arm reaching simulator"};
  app.require_subcommand(1);

  SubOpts o_rest, o_reach, o_sense, o_loop, o_stats, o_mc;
  CLI::App* rest = add_common(app, "rest-shape",
                              "balanced shapes over a grid of cable clamp voltages", o_rest);
  CLI::App* reach = add_common(app, "reach",
                               "closed-loop reach with ground-truth sensing", o_reach);
  CLI::App* sense = add_common(app, "sense",
                               "consensus estimator against a frozen arm shape", o_sense);
  CLI::App* loop = add_common(app, "sensorimotor",
                              "full loop: sensors, estimator, stimuli, cables, arm", o_loop);
  CLI::App* stats = add_common(app, "stats",
                               "estimator error statistics over a target grid", o_stats);
  CLI::App* mc = add_common(app, "mc-oracle",
                            "pursuit recursion against the arm-frame bearing flow", o_mc);

  CLI11_PARSE(app, argc, argv);

  try {
    if (rest->parsed()) return execute("rest_shape", rest, o_rest);
    if (reach->parsed()) return execute("reach", reach, o_reach);
    if (sense->parsed()) return execute("sense", sense, o_sense);
    if (loop->parsed()) return execute("sensorimotor", loop, o_loop);
    if (stats->parsed()) return execute("stats", stats, o_stats);
    if (mc->parsed()) return execute("mc_oracle", mc, o_mc);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
