#pragma once

// Experiment plumbing shared by the command-line tool and the Python module: config parsing,
// schema checks and the subcommands, each producing a list of named output files.

#include "beachlab/evolution.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace beachlab::lab {

using json = nlohmann::json;

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kInvalidInput = 3,
  kSolverFailure = 4,
  kMonitorHalt = 5,
  kIoError = 6,
  kInternalError = 7,
};
int exit_code(ErrorKind k);
std::string error_json(const std::string& kind, const std::string& message, int code);

// Full 17 significant digits.
std::string fmt(double x);

struct Artifact {
  std::string name;  // relative path inside the output directory
  std::string data;
};
using Artifacts = std::vector<Artifact>;

// Config readers. All throw LabError(Config) naming the offending field.
CornerDomain domain_from_json(const json& j);
SimulationConfig simulation_from_json(const json& j);
Tolerances tolerances_from_json(const json& j, Tolerances base = tolerances());
// Initial (eta, psi) from {"mode", "amplitude", "potential_amplitude"}.
std::pair<VecX, VecX> initial_data_from_json(const json& j, const CornerDomain& rest);

struct ExponentsOptions {
  std::vector<std::string> bcs{"dn", "nn", "dd"};
  std::vector<double> omegas;
  int count = 6;
};
ExponentsOptions exponents_from_json(const json& j);

Artifacts run_exponents(const ExponentsOptions& o, int jobs = 1);
Artifacts run_solve(const json& cfg);
Artifacts run_convergence(const json& cfg);
Artifacts run_dtn(const json& cfg);
Artifacts run_taylor(const json& cfg);
struct RunOutput {
  Artifacts files;
  std::optional<MonitorEvent> halt;  // files are still written up to the halt
};
// Energy time series only; simulate also writes the numbered state files.
RunOutput run_energy(const json& cfg);
RunOutput run_simulate(const json& cfg);

// Energy and monitor CSV of a finished run.
std::string energy_csv(const RunResult& r, bool with_tolerance);
json run_summary(const RunResult& r);

}  // namespace beachlab::lab
