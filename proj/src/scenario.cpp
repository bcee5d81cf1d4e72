#include "octoarm/scenario.hpp"

#include <cctype>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "octoarm/csv.hpp"

namespace octoarm {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v) {
  const char* c = v.c_str();
  char* end = nullptr;
  double x = std::strtod(c, &end);
  if (end == c || trim(end) != "" || !std::isfinite(x))
    throw ConfigError("bad number '" + v + "'");
  return x;
}

long parse_long(const std::string& v) {
  const char* c = v.c_str();
  char* end = nullptr;
  long x = std::strtol(c, &end, 10);
  if (end == c || trim(end) != "") throw ConfigError("bad integer '" + v + "'");
  return x;
}

std::uint64_t parse_u64(const std::string& v) {
  const char* c = v.c_str();
  char* end = nullptr;
  unsigned long long x = std::strtoull(c, &end, 10);
  if (end == c || trim(end) != "") throw ConfigError("bad integer '" + v + "'");
  return static_cast<std::uint64_t>(x);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError("bad boolean '" + v + "'");
}

std::vector<double> parse_list(const std::string& v) {
  std::vector<double> out;
  std::string item;
  std::istringstream ss(v);
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item)));
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

using Setter = std::function<void(Scenario&, const std::string&)>;

Setter dbl(std::function<double&(Scenario&)> f) {
  return [f](Scenario& s, const std::string& v) { f(s) = parse_double(v); };
}
Setter intv(std::function<int&(Scenario&)> f) {
  return [f](Scenario& s, const std::string& v) { f(s) = static_cast<int>(parse_long(v)); };
}
Setter boolv(std::function<bool&(Scenario&)> f) {
  return [f](Scenario& s, const std::string& v) { f(s) = parse_bool(v); };
}
Setter strv(std::function<std::string&(Scenario&)> f) {
  return [f](Scenario& s, const std::string& v) { f(s) = v; };
}
Setter listv(std::function<std::vector<double>&(Scenario&)> f) {
  return [f](Scenario& s, const std::string& v) { f(s) = parse_list(v); };
}

using KeyTable = std::map<std::string, std::map<std::string, Setter>>;

const KeyTable& key_table() {
  static const KeyTable t = [] {
    KeyTable t;
    auto& run = t["run"];
    run["kind"] = strv([](Scenario& s) -> std::string& { return s.kind; });
    run["case"] = strv([](Scenario& s) -> std::string& { return s.reach_case; });
    run["arm"] = strv([](Scenario& s) -> std::string& { return s.arm; });
    run["mu"] = strv([](Scenario& s) -> std::string& { return s.mu_mode; });
    run["assumptions"] = strv([](Scenario& s) -> std::string& { return s.assumptions; });
    run["estimator"] = strv([](Scenario& s) -> std::string& { return s.estimator; });
    run["rod_mode"] = strv([](Scenario& s) -> std::string& { return s.rod_mode; });
    run["target_x"] = [](Scenario& s, const std::string& v) {
      s.target_x = parse_double(v);
      s.have_target = true;
    };
    run["target_y"] = [](Scenario& s, const std::string& v) {
      s.target_y = parse_double(v);
      s.have_target = true;
    };
    run["seed"] = [](Scenario& s, const std::string& v) { s.seed = parse_u64(v); };
    run["duration"] = dbl([](Scenario& s) -> double& { return s.duration; });
    run["dt"] = dbl([](Scenario& s) -> double& { return s.dt; });
    run["sense_stride"] = intv([](Scenario& s) -> int& { return s.sense_stride; });
    run["log_stride"] = intv([](Scenario& s) -> int& { return s.log_stride; });
    run["noise"] = boolv([](Scenario& s) -> bool& { return s.noise; });
    run["noise_level"] = dbl([](Scenario& s) -> double& { return s.noise_level; });
    run["out_dir"] = strv([](Scenario& s) -> std::string& { return s.out_dir; });

    auto& rod = t["rod"];
    rod["n"] = intv([](Scenario& s) -> int& { return s.rod.n_elem; });
    rod["length"] = dbl([](Scenario& s) -> double& { return s.rod.L; });
    rod["r_base"] = dbl([](Scenario& s) -> double& { return s.rod.r_base; });
    rod["r_tip"] = dbl([](Scenario& s) -> double& { return s.rod.r_tip; });
    rod["density"] = dbl([](Scenario& s) -> double& { return s.rod.rho; });
    rod["youngs"] = dbl([](Scenario& s) -> double& { return s.rod.E; });
    rod["shear"] = dbl([](Scenario& s) -> double& { return s.rod.G; });
    rod["damping"] = dbl([](Scenario& s) -> double& { return s.rod.xi; });
    rod["water_density"] = dbl([](Scenario& s) -> double& { return s.rod.rho_water; });
    rod["drag_tan"] = dbl([](Scenario& s) -> double& { return s.rod.xi_tan; });
    rod["drag_per"] = dbl([](Scenario& s) -> double& { return s.rod.xi_per; });

    auto& mus = t["muscle"];
    mus["sigma_lm"] = dbl([](Scenario& s) -> double& { return s.muscle.sigma_lm; });
    mus["sigma_tm"] = dbl([](Scenario& s) -> double& { return s.muscle.sigma_tm; });
    mus["area_frac_lm"] = dbl([](Scenario& s) -> double& { return s.muscle.area_frac_lm; });
    mus["area_frac_tm"] = dbl([](Scenario& s) -> double& { return s.muscle.area_frac_tm; });
    mus["offset_factor"] = dbl([](Scenario& s) -> double& { return s.muscle.offset_factor; });
    mus["tm_reciprocal"] = boolv([](Scenario& s) -> bool& { return s.muscle.tm_reciprocal; });

    auto& cab = t["cable"];
    cab["tau"] = dbl([](Scenario& s) -> double& { return s.cable.tau; });
    cab["tau_w"] = dbl([](Scenario& s) -> double& { return s.cable.tau_w; });
    cab["lambda"] = dbl([](Scenario& s) -> double& { return s.cable.lambda; });
    cab["b"] = dbl([](Scenario& s) -> double& { return s.cable.b; });

    auto& env = t["env"];
    env["mu"] = dbl([](Scenario& s) -> double& { return s.env.mu; });
    env["diffusivity"] = dbl([](Scenario& s) -> double& { return s.env.diffusivity; });

    auto& ctl = t["control"];
    ctl["chi"] = dbl([](Scenario& s) -> double& { return s.control.chi; });
    ctl["eps_frac"] = dbl([](Scenario& s) -> double& { return s.control.eps_frac; });

    auto& sen = t["sense"];
    sen["n_units"] = intv([](Scenario& s) -> int& { return s.sense.n_units; });
    sen["k_theta"] = dbl([](Scenario& s) -> double& { return s.sense.k_theta; });
    sen["k_r"] = dbl([](Scenario& s) -> double& { return s.sense.k_r; });
    sen["k_mu"] = dbl([](Scenario& s) -> double& { return s.sense.k_mu; });
    sen["mu"] = dbl([](Scenario& s) -> double& { return s.sense.mu; });
    sen["ring_size"] = intv([](Scenario& s) -> int& { return s.sense.ring_size; });
    sen["ring_tau"] = dbl([](Scenario& s) -> double& { return s.sense.ring_tau; });

    auto& rst = t["rest"];
    rst["top_v0"] = listv([](Scenario& s) -> std::vector<double>& { return s.rest.top_v0; });
    rst["top_vl"] = listv([](Scenario& s) -> std::vector<double>& { return s.rest.top_vl; });
    rst["bottom_v0"] = dbl([](Scenario& s) -> double& { return s.rest.bottom_v0; });
    rst["bottom_vl"] = dbl([](Scenario& s) -> double& { return s.rest.bottom_vl; });
    rst["b_sweep"] = listv([](Scenario& s) -> std::vector<double>& { return s.rest.b_sweep; });
    rst["sweep_top_v0"] = dbl([](Scenario& s) -> double& { return s.rest.sweep_top_v0; });
    rst["sweep_top_vl"] = dbl([](Scenario& s) -> double& { return s.rest.sweep_top_vl; });

    auto& mc = t["mc"];
    mc["range0"] = dbl([](Scenario& s) -> double& { return s.mc.range0; });
    mc["bearing0"] = dbl([](Scenario& s) -> double& { return s.mc.bearing0; });
    mc["speed"] = dbl([](Scenario& s) -> double& { return s.mc.speed; });
    mc["dt"] = dbl([](Scenario& s) -> double& { return s.mc.dt; });
    mc["duration"] = dbl([](Scenario& s) -> double& { return s.mc.duration; });
    mc["capture"] = dbl([](Scenario& s) -> double& { return s.mc.capture; });

    auto& st = t["stats"];
    st["nx"] = intv([](Scenario& s) -> int& { return s.stats.nx; });
    st["ny"] = intv([](Scenario& s) -> int& { return s.stats.ny; });
    st["x0"] = dbl([](Scenario& s) -> double& { return s.stats.x0; });
    st["x1"] = dbl([](Scenario& s) -> double& { return s.stats.x1; });
    st["y0"] = dbl([](Scenario& s) -> double& { return s.stats.y0; });
    st["y1"] = dbl([](Scenario& s) -> double& { return s.stats.y1; });
    return t;
  }();
  return t;
}

void apply_keyed(Scenario& s, const std::string& section, const std::string& key,
                 const std::string& value, const std::string& where) {
  const KeyTable& t = key_table();
  auto si = t.find(section);
  if (si == t.end()) throw ConfigError(where + ": unknown section [" + section + "]");
  auto ki = si->second.find(key);
  if (ki == si->second.end())
    throw ConfigError(where + ": unknown key '" + key + "' in [" + section + "]");
  try {
    ki->second(s, value);
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

std::string fmt(double x) { return format_double(x); }

std::string fmt_list(const std::vector<double>& xs) {
  std::string out;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += fmt(xs[i]);
  }
  return out;
}

}  // namespace

Scenario scenario_defaults(const std::string& kind) {
  Scenario s;
  s.kind = kind;
  return s;
}

void parse_scenario_text(Scenario& s, const std::string& text) {
  std::istringstream in(text);
  std::string line, section;
  std::set<std::string> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string where = "line " + std::to_string(lineno);
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError(where + ": key before any [section]");
    if (key.empty()) throw ConfigError(where + ": empty key");
    std::string full = section + "." + key;
    if (!seen.insert(full).second)
      throw ConfigError(where + ": duplicate key '" + full + "'");
    apply_keyed(s, section, key, value, where);
  }
}

void apply_override(Scenario& s, const std::string& assignment) {
  size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override '" + assignment + "': expected section.key=value");
  std::string lhs = trim(assignment.substr(0, eq));
  std::string value = trim(assignment.substr(eq + 1));
  size_t dot = lhs.find('.');
  if (dot == std::string::npos)
    throw ConfigError("override '" + assignment + "': expected section.key=value");
  apply_keyed(s, trim(lhs.substr(0, dot)), trim(lhs.substr(dot + 1)), value,
              "override '" + assignment + "'");
}

void finalize_scenario(Scenario& s) {
  static const std::set<std::string> kinds{"rest_shape", "reach",        "sense",
                                           "sensorimotor", "stats", "mc_oracle"};
  if (!kinds.count(s.kind)) throw ConfigError("unknown run kind '" + s.kind + "'");
  if (s.reach_case != "I" && s.reach_case != "II" && s.reach_case != "III")
    throw ConfigError("unknown reach case '" + s.reach_case + "'");
  if (s.arm != "straight" && s.arm != "bent")
    throw ConfigError("unknown arm shape '" + s.arm + "'");
  if (s.mu_mode != "free" && s.mu_mode != "pinned")
    throw ConfigError("unknown mu mode '" + s.mu_mode + "'");
  if (s.assumptions != "free" && s.assumptions != "thm2")
    throw ConfigError("unknown assumptions mode '" + s.assumptions + "'");
  if (s.assumptions == "thm2") s.mu_mode = "pinned";  // fixed-point start presumes known mu
  if (s.estimator != "direct" && s.estimator != "rings")
    throw ConfigError("unknown estimator '" + s.estimator + "'");
  if (s.rod_mode != "constrained" && s.rod_mode != "extensible")
    throw ConfigError("unknown rod mode '" + s.rod_mode + "'");

  if (s.kind == "reach")
    s.rod_mode = (s.reach_case == "III") ? "extensible" : "constrained";

  if (s.kind == "reach" || s.kind == "sense" || s.kind == "sensorimotor") {
    if (!s.have_target) throw ConfigError(s.kind + " run needs run.target_x / run.target_y");
  }
  if (s.duration == 0.0) {
    if (s.kind == "reach")
      s.duration = (s.reach_case == "III") ? 6.0 : 2.0;  // extension settles slowly
    else if (s.kind == "sensorimotor")
      s.duration = 2.0;
    else if (s.kind == "sense" || s.kind == "stats")
      s.duration = 1.0;
  }
  if (s.duration < 0.0) throw ConfigError("negative duration");
  if (!(s.dt > 0.0)) throw ConfigError("dt must be positive");
  if (s.sense_stride < 1 || s.log_stride < 1) throw ConfigError("strides must be >= 1");
  if (s.noise_level < 0.0) throw ConfigError("negative noise level");

  s.rod.validate();
  s.muscle.validate();
  s.cable.validate();
  s.env.validate();
  s.control.validate();
  s.sense.validate();

  if (s.kind == "stats" && s.stats.nx == 0) {
    if (s.arm == "straight") {
      s.stats = {11, 11, 0.0, 1.0, 0.0, 1.0};
    } else {
      s.stats = {16, 11, -0.5, 1.0, 0.0, 1.0};
    }
  }
  if (s.stats.nx != 0) {
    if (s.stats.nx < 1 || s.stats.ny < 1) throw ConfigError("stats grid needs nx, ny >= 1");
    if (!(s.stats.x1 > s.stats.x0) || !(s.stats.y1 > s.stats.y0))
      throw ConfigError("stats grid extent is empty");
  }
  if (s.kind == "mc_oracle") {
    if (!(s.mc.dt > 0.0) || !(s.mc.duration > 0.0) || !(s.mc.range0 > 0.0) ||
        !(s.mc.speed > 0.0) || !(s.mc.capture > 0.0))
      throw ConfigError("pursuit setup needs positive dt, duration, range, speed, capture");
  }
  if (s.rest.top_v0.size() != s.rest.top_vl.size())
    throw ConfigError("rest.top_v0 and rest.top_vl need matching lengths");
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream o;
  o << "[run]\n";
  o << "kind = " << s.kind << "\n";
  o << "case = " << s.reach_case << "\n";
  o << "arm = " << s.arm << "\n";
  o << "mu = " << s.mu_mode << "\n";
  o << "assumptions = " << s.assumptions << "\n";
  o << "estimator = " << s.estimator << "\n";
  o << "rod_mode = " << s.rod_mode << "\n";
  if (s.have_target) {
    o << "target_x = " << fmt(s.target_x) << "\n";
    o << "target_y = " << fmt(s.target_y) << "\n";
  }
  o << "seed = " << s.seed << "\n";
  o << "duration = " << fmt(s.duration) << "\n";
  o << "dt = " << fmt(s.dt) << "\n";
  o << "sense_stride = " << s.sense_stride << "\n";
  o << "log_stride = " << s.log_stride << "\n";
  o << "noise = " << (s.noise ? "true" : "false") << "\n";
  o << "noise_level = " << fmt(s.noise_level) << "\n";
  if (!s.out_dir.empty()) o << "out_dir = " << s.out_dir << "\n";
  o << "\n[rod]\n";
  o << "n = " << s.rod.n_elem << "\n";
  o << "length = " << fmt(s.rod.L) << "\n";
  o << "r_base = " << fmt(s.rod.r_base) << "\n";
  o << "r_tip = " << fmt(s.rod.r_tip) << "\n";
  o << "density = " << fmt(s.rod.rho) << "\n";
  o << "youngs = " << fmt(s.rod.E) << "\n";
  o << "shear = " << fmt(s.rod.G) << "\n";
  o << "damping = " << fmt(s.rod.xi) << "\n";
  o << "water_density = " << fmt(s.rod.rho_water) << "\n";
  o << "drag_tan = " << fmt(s.rod.xi_tan) << "\n";
  o << "drag_per = " << fmt(s.rod.xi_per) << "\n";
  o << "\n[muscle]\n";
  o << "sigma_lm = " << fmt(s.muscle.sigma_lm) << "\n";
  o << "sigma_tm = " << fmt(s.muscle.sigma_tm) << "\n";
  o << "area_frac_lm = " << fmt(s.muscle.area_frac_lm) << "\n";
  o << "area_frac_tm = " << fmt(s.muscle.area_frac_tm) << "\n";
  o << "offset_factor = " << fmt(s.muscle.offset_factor) << "\n";
  o << "tm_reciprocal = " << (s.muscle.tm_reciprocal ? "true" : "false") << "\n";
  o << "\n[cable]\n";
  o << "tau = " << fmt(s.cable.tau) << "\n";
  o << "tau_w = " << fmt(s.cable.tau_w) << "\n";
  o << "lambda = " << fmt(s.cable.lambda) << "\n";
  o << "b = " << fmt(s.cable.b) << "\n";
  o << "\n[env]\n";
  o << "mu = " << fmt(s.env.mu) << "\n";
  o << "diffusivity = " << fmt(s.env.diffusivity) << "\n";
  o << "\n[control]\n";
  o << "chi = " << fmt(s.control.chi) << "\n";
  o << "eps_frac = " << fmt(s.control.eps_frac) << "\n";
  o << "\n[sense]\n";
  o << "n_units = " << s.sense.n_units << "\n";
  o << "k_theta = " << fmt(s.sense.k_theta) << "\n";
  o << "k_r = " << fmt(s.sense.k_r) << "\n";
  o << "k_mu = " << fmt(s.sense.k_mu) << "\n";
  o << "mu = " << fmt(s.sense.mu) << "\n";
  o << "ring_size = " << s.sense.ring_size << "\n";
  o << "ring_tau = " << fmt(s.sense.ring_tau) << "\n";
  o << "\n[rest]\n";
  o << "top_v0 = " << fmt_list(s.rest.top_v0) << "\n";
  o << "top_vl = " << fmt_list(s.rest.top_vl) << "\n";
  o << "bottom_v0 = " << fmt(s.rest.bottom_v0) << "\n";
  o << "bottom_vl = " << fmt(s.rest.bottom_vl) << "\n";
  o << "b_sweep = " << fmt_list(s.rest.b_sweep) << "\n";
  o << "sweep_top_v0 = " << fmt(s.rest.sweep_top_v0) << "\n";
  o << "sweep_top_vl = " << fmt(s.rest.sweep_top_vl) << "\n";
  o << "\n[mc]\n";
  o << "range0 = " << fmt(s.mc.range0) << "\n";
  o << "bearing0 = " << fmt(s.mc.bearing0) << "\n";
  o << "speed = " << fmt(s.mc.speed) << "\n";
  o << "dt = " << fmt(s.mc.dt) << "\n";
  o << "duration = " << fmt(s.mc.duration) << "\n";
  o << "capture = " << fmt(s.mc.capture) << "\n";
  o << "\n[stats]\n";
  o << "nx = " << s.stats.nx << "\n";
  o << "ny = " << s.stats.ny << "\n";
  o << "x0 = " << fmt(s.stats.x0) << "\n";
  o << "x1 = " << fmt(s.stats.x1) << "\n";
  o << "y0 = " << fmt(s.stats.y0) << "\n";
  o << "y1 = " << fmt(s.stats.y1) << "\n";
  return o.str();
}

std::uint64_t scenario_hash(const Scenario& s) {
  std::string text = serialize_scenario(s);
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

RodMode scenario_rod_mode(const Scenario& s) {
  if (s.rod_mode == "extensible") return RodMode::extensible;
  return RodMode::constrained;
}

}  // namespace octoarm
