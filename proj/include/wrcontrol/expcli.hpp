#pragma once

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "wrcontrol/timeop.hpp"

namespace wrc {

inline constexpr const char* library_version = "0.1.0";

// Rectangular table; numeric cells are written with 17 significant digits so
// a read-back reproduces the stored doubles bit for bit.
using CsvCell = std::variant<double, std::string>;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<CsvCell>> rows;
};

std::string format_cell(double v);
void emit_csv(const CsvTable& table, const std::string& path);
CsvTable read_csv(const std::string& path);

// Configuration error carrying the offending key path (dotted).
struct ConfigError : std::runtime_error {
  ConfigError(std::string key_path, const std::string& message)
      : std::runtime_error(message), key(std::move(key_path)) {}
  std::string key;
};

struct ExperimentConfig {
  std::string algorithm;  // monodomain | dnwr | nnwr | bounds | sweep | verify
  // problem
  double alpha = 0.5;
  double sigma = 1e-6;
  double horizon = 1.0;
  std::string target = "paper";  // paper | zero
  std::string target_file;       // overrides target when nonempty (CSV x,t,value)
  // discretization
  std::string mesh = "both_sided";
  int intervals = 100;  // time intervals n + 1
  double dx = 0.05;
  // decomposition (breakpoints double as the domain ends)
  std::vector<double> breakpoints{-1.0, 0.0, 1.0};
  std::vector<double> kappas{1.0, 1.0};
  // relaxation
  std::string relaxation = "auto";  // auto | explicit
  std::vector<double> theta;
  std::vector<double> phi;  // empty: same as theta
  // control
  double tol = 1e-10;
  int max_iter = 200;
  int iterations = 0;  // > 0: run exactly this many iterations (tol ignored)
  // sweep
  double grid_start = 0.05;
  double grid_step = 0.05;
  double grid_stop = 0.95;
  int fixed_iterations = 8;
  // output
  std::string output = "out";
};

ExperimentConfig default_config();
ExperimentConfig parse_config(const std::string& json_text);
std::string serialize_config(const ExperimentConfig& cfg);
ExperimentConfig load_config_file(const std::string& path);

struct RunOptions {
  std::string out_override;
  unsigned long long seed = 0;
  unsigned threads = 0;
  bool dump_operators = false;
};

struct RunOutcome {
  int exit_code = 0;
  std::vector<std::string> files;
  std::string summary;
};

RunOutcome run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

std::vector<std::string> preset_names();
RunOutcome run_preset(const std::string& name, const RunOptions& opts = {});

struct VerifyCheck {
  std::string name;
  bool pass = false;
  double margin = 0;  // distance to the failure threshold; positive passes
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

VerifyReport verify_suite(unsigned long long seed = 0, unsigned threads = 0);
std::string format_verify_table(const VerifyReport& report);

// True when every row of an L1 coefficient table decays strictly and stays
// positive; exposed so a corrupted table can be checked as a test fixture.
bool l1_monotonicity_holds(const L1Operator<double>& op);

}  // namespace wrc
