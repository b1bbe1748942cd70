#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wrcontrol/expcli.hpp"

namespace {

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw wrc::ConfigError(flag, "config error: " + flag + " expects a comma-separated "
                                       "list of numbers, got '" + text + "'");
    }
  }
  if (out.empty())
    throw wrc::ConfigError(flag, "config error: " + flag + " expects at least one number");
  return out;
}

struct CliState {
  wrc::ExperimentConfig cfg = wrc::default_config();
  wrc::RunOptions opts;
  // raw flag storage resolved after parsing
  double h1 = 0, h2 = 0;
  double kappa1 = 1, kappa2 = 1;
  std::string subdomains_list, kappas_list;
  std::string theta_text = "auto", phi_text;
};

void add_problem_flags(CLI::App* sub, CliState& st) {
  sub->add_option("--alpha", st.cfg.alpha, "Fractional time order in (0, 1]");
  sub->add_option("--sigma", st.cfg.sigma, "Control regularization weight");
  sub->add_option("--horizon", st.cfg.horizon, "Final time T");
  sub->add_option("--target", st.cfg.target, "Tracking target: paper | zero");
  sub->add_option("--target-file", st.cfg.target_file,
                  "CSV file with columns x,t,value overriding --target");
  sub->add_option("--mesh", st.cfg.mesh, "Time mesh: uniform | one_sided | both_sided");
  sub->add_option("--nt", st.cfg.intervals, "Number of time intervals");
  sub->add_option("--dx", st.cfg.dx, "Space step");
}

void add_iteration_flags(CLI::App* sub, CliState& st) {
  sub->add_option("--tol", st.cfg.tol, "Relative increment stopping tolerance");
  sub->add_option("--max-iter", st.cfg.max_iter, "Iteration cap");
  sub->add_option("--iterations", st.cfg.iterations,
                  "Run exactly this many iterations (ignores --tol)");
  sub->add_option("--theta", st.theta_text, "Relaxation weight(s): auto or comma list");
  sub->add_option("--phi", st.phi_text, "Adjoint relaxation weight(s), defaults to --theta");
}

void add_dnwr_geometry(CLI::App* sub, CliState& st) {
  sub->add_option("--h1", st.h1, "Length of the first subdomain");
  sub->add_option("--h2", st.h2, "Length of the second subdomain");
  sub->add_option("--kappa1", st.kappa1, "Diffusivity of the first subdomain");
  sub->add_option("--kappa2", st.kappa2, "Diffusivity of the second subdomain");
}

void add_nnwr_geometry(CLI::App* sub, CliState& st) {
  sub->add_option("--subdomains", st.subdomains_list,
                  "Comma list of breakpoints x_0,...,x_N (N subdomains)");
  sub->add_option("--kappas", st.kappas_list, "Comma list of per-subdomain diffusivities");
}

void resolve_geometry(const CLI::App* sub, CliState& st) {
  auto given = [sub](const std::string& name) {
    const auto* opt = sub->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--h1") || given("--h2") || given("--kappa1") || given("--kappa2")) {
    const double h1 = given("--h1") ? st.h1 : 1.0;
    const double h2 = given("--h2") ? st.h2 : 1.0;
    const double left = st.cfg.breakpoints.front();
    st.cfg.breakpoints = {left, left + h1, left + h1 + h2};
    st.cfg.kappas = {st.kappa1, st.kappa2};
  }
  if (!st.subdomains_list.empty())
    st.cfg.breakpoints = parse_list(st.subdomains_list, "--subdomains");
  if (!st.kappas_list.empty()) st.cfg.kappas = parse_list(st.kappas_list, "--kappas");
}

void resolve_relaxation(CliState& st) {
  if (st.theta_text == "auto") {
    st.cfg.relaxation = "auto";
    st.cfg.theta.clear();
    st.cfg.phi.clear();
    return;
  }
  st.cfg.relaxation = "explicit";
  st.cfg.theta = parse_list(st.theta_text, "--theta");
  st.cfg.phi = st.phi_text.empty() ? std::vector<double>{} : parse_list(st.phi_text, "--phi");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Waveform relaxation for subdiffusion-constrained optimal control"};
  app.require_subcommand(1);
  app.fallthrough();

  CliState st;
  std::string out_dir;
  app.add_option("--out", out_dir, "Output directory (default: out)");
  app.add_option("--seed", st.opts.seed, "Seed for randomized checks");
  app.add_option("--threads", st.opts.threads, "Worker threads (0 = hardware)");
  app.add_flag("--dump-operators", st.opts.dump_operators,
               "Also write l1.csv, exchange.csv, coupled.csv");

  auto* mono = app.add_subcommand("monodomain", "Solve the undecomposed reference problem");
  add_problem_flags(mono, st);

  auto* dnwr = app.add_subcommand("dnwr", "Two-subdomain Dirichlet-Neumann iteration");
  add_problem_flags(dnwr, st);
  add_dnwr_geometry(dnwr, st);
  add_iteration_flags(dnwr, st);

  auto* nnwr = app.add_subcommand("nnwr", "Multi-subdomain Neumann-Neumann iteration");
  add_problem_flags(nnwr, st);
  add_nnwr_geometry(nnwr, st);
  add_iteration_flags(nnwr, st);

  auto* bounds = app.add_subcommand("bounds", "Measured errors against the theoretical bound");
  add_problem_flags(bounds, st);
  add_dnwr_geometry(bounds, st);
  add_nnwr_geometry(bounds, st);
  add_iteration_flags(bounds, st);

  auto* sweep = app.add_subcommand("sweep", "Error after fixed iterations over a theta grid");
  add_problem_flags(sweep, st);
  add_dnwr_geometry(sweep, st);
  add_nnwr_geometry(sweep, st);
  sweep->add_option("--grid-start", st.cfg.grid_start, "First grid value");
  sweep->add_option("--grid-step", st.cfg.grid_step, "Grid spacing");
  sweep->add_option("--grid-stop", st.cfg.grid_stop, "Last grid value");
  sweep->add_option("--fixed-iterations", st.cfg.fixed_iterations,
                    "Iterations per grid point");

  auto* verify = app.add_subcommand("verify", "Run the self-check suite");

  auto* presets = app.add_subcommand("presets", "List available experiment presets");

  auto* run = app.add_subcommand("run", "Run a preset or a JSON config file");
  std::string preset_name, config_path;
  auto* preset_opt = run->add_option("--preset", preset_name, "Preset name (see presets)");
  auto* config_opt = run->add_option("--config", config_path, "JSON config file");
  preset_opt->excludes(config_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    st.opts.out_override = out_dir;
    wrc::RunOutcome outcome;
    if (presets->parsed()) {
      for (const auto& n : wrc::preset_names()) std::cout << n << "\n";
      return 0;
    }
    if (run->parsed()) {
      if (!preset_name.empty()) {
        outcome = wrc::run_preset(preset_name, st.opts);
      } else if (!config_path.empty()) {
        outcome = wrc::run_experiment(wrc::load_config_file(config_path), st.opts);
      } else {
        std::cerr << "config error: run needs --preset or --config\n";
        return 2;
      }
    } else {
      CLI::App* sub = app.get_subcommands().front();
      st.cfg.algorithm = sub->get_name();
      if (!verify->parsed()) {
        resolve_geometry(sub, st);
        resolve_relaxation(st);
      }
      outcome = wrc::run_experiment(st.cfg, st.opts);
    }
    std::cout << outcome.summary << "\n";
    for (const auto& f : outcome.files) std::cout << "  wrote " << f << "\n";
    return outcome.exit_code;
  } catch (const wrc::ConfigError& e) {
    std::cerr << "config error [" << e.key << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
