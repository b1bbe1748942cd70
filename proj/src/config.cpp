#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wrcontrol/expcli.hpp"
#include "wrcontrol/timegrid.hpp"

namespace wrc {
namespace {

using ojson = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& key, const std::string& msg) {
  throw ConfigError(key, "config error: " + key + " " + msg);
}

void check_keys(const ojson& obj, const std::string& prefix,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (item.key() == a) {
        known = true;
        break;
      }
    if (!known)
      bad(prefix.empty() ? item.key() : prefix + "." + item.key(), "is not a recognized key");
  }
}

double need_num(const ojson& v, const std::string& key) {
  if (!v.is_number()) bad(key, "must be a number");
  return v.get<double>();
}

int need_int(const ojson& v, const std::string& key) {
  if (!v.is_number_integer()) bad(key, "must be an integer");
  return v.get<int>();
}

std::string need_str(const ojson& v, const std::string& key) {
  if (!v.is_string()) bad(key, "must be a string");
  return v.get<std::string>();
}

std::vector<double> need_vec(const ojson& v, const std::string& key) {
  if (!v.is_array()) bad(key, "must be an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) bad(key, "must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

void validate(const ExperimentConfig& c) {
  static const std::vector<std::string> algos{"monodomain", "dnwr",  "nnwr",
                                              "bounds",     "sweep", "verify"};
  bool ok = false;
  for (const auto& a : algos) ok = ok || a == c.algorithm;
  if (!ok)
    bad("algorithm", "must be one of monodomain, dnwr, nnwr, bounds, sweep, verify (got '" +
                         c.algorithm + "')");
  if (!(c.alpha > 0) || c.alpha > 1) bad("problem.alpha", "must lie in (0, 1]");
  if (!(c.sigma > 0)) bad("problem.sigma", "must be positive");
  if (!(c.horizon > 0)) bad("problem.horizon", "must be positive");
  if (c.target != "paper" && c.target != "zero")
    bad("problem.target", "must be \"paper\", \"zero\", or {\"file\": path}");
  try {
    mesh_kind_from(c.mesh);
  } catch (const std::exception&) {
    bad("discretization.mesh", "must be uniform, one_sided, or both_sided (got '" + c.mesh +
                                   "')");
  }
  if (c.intervals < 2) bad("discretization.intervals", "must be at least 2");
  if (mesh_kind_from(c.mesh) == MeshKind::both_sided_graded && c.intervals % 2 != 0)
    bad("discretization.intervals", "must be even for the both_sided mesh");
  if (!(c.dx > 0)) bad("discretization.dx", "must be positive");
  if (c.breakpoints.size() < 2) bad("decomposition.breakpoints", "needs at least 2 entries");
  for (std::size_t i = 0; i + 1 < c.breakpoints.size(); ++i)
    if (!(c.breakpoints[i] < c.breakpoints[i + 1]))
      bad("decomposition.breakpoints", "must be strictly increasing");
  if (c.kappas.size() + 1 != c.breakpoints.size())
    bad("decomposition.kappas", "needs one entry per subdomain");
  for (double k : c.kappas)
    if (!(k > 0)) bad("decomposition.kappas", "entries must be positive");
  if (c.relaxation != "auto" && c.relaxation != "explicit")
    bad("relaxation.mode", "must be \"auto\" or \"explicit\"");
  if (c.relaxation == "explicit" && c.theta.empty())
    bad("relaxation.theta", "must be given in explicit mode");
  for (double t : c.theta)
    if (!(t > 0) || t >= 1) bad("relaxation.theta", "entries must lie in (0, 1)");
  for (double p : c.phi)
    if (!(p > 0) || p >= 1) bad("relaxation.phi", "entries must lie in (0, 1)");
  if (!c.phi.empty() && c.phi.size() != c.theta.size())
    bad("relaxation.phi", "must match the length of relaxation.theta");
  if (c.tol < 0) bad("control.tol", "must be nonnegative");
  if (c.max_iter < 1) bad("control.max_iter", "must be at least 1");
  if (c.iterations < 0) bad("control.iterations", "must be nonnegative");
  if (!(c.grid_step > 0)) bad("sweep.grid_step", "must be positive");
  if (!(c.grid_start > 0) || !(c.grid_start < 1)) bad("sweep.grid_start", "must lie in (0, 1)");
  if (!(c.grid_stop > 0) || !(c.grid_stop < 1)) bad("sweep.grid_stop", "must lie in (0, 1)");
  if (c.grid_start > c.grid_stop) bad("sweep.grid_start", "must not exceed sweep.grid_stop");
  if (c.fixed_iterations < 1) bad("sweep.fixed_iterations", "must be at least 1");
  if (c.output.empty()) bad("output", "must be a nonempty path");
}

}  // namespace

ExperimentConfig default_config() { return {}; }

ExperimentConfig parse_config(const std::string& json_text) {
  ojson j;
  try {
    j = ojson::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError("", std::string("config error: not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("", "config error: top level must be an object");
  check_keys(j, "", {"algorithm", "problem", "discretization", "decomposition", "relaxation",
                     "control", "sweep", "output"});
  if (!j.contains("algorithm"))
    throw ConfigError("algorithm",
                      "config error: missing required key: algorithm (all other keys default; "
                      "sections: problem, discretization, decomposition, relaxation, control, "
                      "sweep, output)");

  ExperimentConfig c;
  c.algorithm = need_str(j["algorithm"], "algorithm");

  if (j.contains("problem")) {
    const auto& p = j["problem"];
    if (!p.is_object()) bad("problem", "must be an object");
    check_keys(p, "problem", {"alpha", "sigma", "horizon", "target"});
    if (p.contains("alpha")) c.alpha = need_num(p["alpha"], "problem.alpha");
    if (p.contains("sigma")) c.sigma = need_num(p["sigma"], "problem.sigma");
    if (p.contains("horizon")) c.horizon = need_num(p["horizon"], "problem.horizon");
    if (p.contains("target")) {
      const auto& t = p["target"];
      if (t.is_string()) {
        c.target = t.get<std::string>();
      } else if (t.is_object()) {
        check_keys(t, "problem.target", {"file"});
        if (!t.contains("file")) bad("problem.target.file", "is required in the object form");
        c.target_file = need_str(t["file"], "problem.target.file");
      } else {
        bad("problem.target", "must be a string or {\"file\": path}");
      }
    }
  }
  if (j.contains("discretization")) {
    const auto& d = j["discretization"];
    if (!d.is_object()) bad("discretization", "must be an object");
    check_keys(d, "discretization", {"mesh", "intervals", "dx"});
    if (d.contains("mesh")) c.mesh = need_str(d["mesh"], "discretization.mesh");
    if (d.contains("intervals"))
      c.intervals = need_int(d["intervals"], "discretization.intervals");
    if (d.contains("dx")) c.dx = need_num(d["dx"], "discretization.dx");
  }
  if (j.contains("decomposition")) {
    const auto& d = j["decomposition"];
    if (!d.is_object()) bad("decomposition", "must be an object");
    check_keys(d, "decomposition", {"breakpoints", "kappas"});
    if (d.contains("breakpoints"))
      c.breakpoints = need_vec(d["breakpoints"], "decomposition.breakpoints");
    if (d.contains("kappas")) c.kappas = need_vec(d["kappas"], "decomposition.kappas");
  }
  if (j.contains("relaxation")) {
    const auto& r = j["relaxation"];
    if (!r.is_object()) bad("relaxation", "must be an object");
    check_keys(r, "relaxation", {"mode", "theta", "phi"});
    if (r.contains("mode")) c.relaxation = need_str(r["mode"], "relaxation.mode");
    if (r.contains("theta")) c.theta = need_vec(r["theta"], "relaxation.theta");
    if (r.contains("phi")) c.phi = need_vec(r["phi"], "relaxation.phi");
  }
  if (j.contains("control")) {
    const auto& ct = j["control"];
    if (!ct.is_object()) bad("control", "must be an object");
    check_keys(ct, "control", {"tol", "max_iter", "iterations"});
    if (ct.contains("tol")) c.tol = need_num(ct["tol"], "control.tol");
    if (ct.contains("max_iter")) c.max_iter = need_int(ct["max_iter"], "control.max_iter");
    if (ct.contains("iterations"))
      c.iterations = need_int(ct["iterations"], "control.iterations");
  }
  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    if (!s.is_object()) bad("sweep", "must be an object");
    check_keys(s, "sweep", {"grid_start", "grid_step", "grid_stop", "fixed_iterations"});
    if (s.contains("grid_start")) c.grid_start = need_num(s["grid_start"], "sweep.grid_start");
    if (s.contains("grid_step")) c.grid_step = need_num(s["grid_step"], "sweep.grid_step");
    if (s.contains("grid_stop")) c.grid_stop = need_num(s["grid_stop"], "sweep.grid_stop");
    if (s.contains("fixed_iterations"))
      c.fixed_iterations = need_int(s["fixed_iterations"], "sweep.fixed_iterations");
  }
  if (j.contains("output")) c.output = need_str(j["output"], "output");

  validate(c);
  return c;
}

std::string serialize_config(const ExperimentConfig& c) {
  ojson j;
  j["algorithm"] = c.algorithm;
  ojson prob;
  prob["alpha"] = c.alpha;
  prob["sigma"] = c.sigma;
  prob["horizon"] = c.horizon;
  if (!c.target_file.empty())
    prob["target"] = ojson{{"file", c.target_file}};
  else
    prob["target"] = c.target;
  j["problem"] = prob;
  ojson disc;
  disc["mesh"] = c.mesh;
  disc["intervals"] = c.intervals;
  disc["dx"] = c.dx;
  j["discretization"] = disc;
  ojson deco;
  deco["breakpoints"] = c.breakpoints;
  deco["kappas"] = c.kappas;
  j["decomposition"] = deco;
  ojson rel;
  rel["mode"] = c.relaxation;
  rel["theta"] = c.theta;
  rel["phi"] = c.phi;
  j["relaxation"] = rel;
  ojson ctrl;
  ctrl["tol"] = c.tol;
  ctrl["max_iter"] = c.max_iter;
  ctrl["iterations"] = c.iterations;
  j["control"] = ctrl;
  ojson sw;
  sw["grid_start"] = c.grid_start;
  sw["grid_step"] = c.grid_step;
  sw["grid_stop"] = c.grid_stop;
  sw["fixed_iterations"] = c.fixed_iterations;
  j["sweep"] = sw;
  j["output"] = c.output;
  return j.dump(2) + "\n";
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("", "config error: cannot read config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

}  // namespace wrc
