#pragma once

// Subcommand implementations shared by the CLI, the Python module and the
// acceptance runner. Each returns an exit code and a JSON report; when
// out_dir is nonempty the report and any CSV series are written there.
//
// Exit codes: 0 success, 1 configuration or input error, 2 solver error,
// 3 certification precondition failure, 4 violated check.

#include <string>

#include "json.hpp"
#include "rotforch/config.hpp"
#include "rotforch/exponents.hpp"
#include "rotforch/solver.hpp"

namespace rotforch {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kReportSchema = "rotforch.report/1";

enum ExitCode { kExitOk = 0, kExitConfig = 1, kExitSolver = 2, kExitPrecondition = 3, kExitFailed = 4 };

struct CommandResult {
  int exit_code = kExitOk;
  nlohmann::ordered_json report;
};

Medium build_medium(const RunConfig& cfg);
Grid build_grid(const RunConfig& cfg, int nx, int ny);
BoundaryForcing build_forcing(const RunConfig& cfg);
Problem build_problem(const RunConfig& cfg);
SolverConfig build_solver_config(const RunConfig& cfg);
// alpha = cfg.alpha, or beta_1 of the default alpha_0 when cfg.alpha is 0.
ExponentInputs build_exponent_inputs(const RunConfig& cfg, const Medium& medium);

CommandResult run_simulate(const RunConfig& cfg, const std::string& out_dir);
// suite: constitutive | elementary | exponents | calibrate | composites
CommandResult run_verify(const RunConfig& cfg, const std::string& suite,
                         const std::string& out_dir);
CommandResult run_certify(const RunConfig& cfg, const std::string& out_dir);
CommandResult run_mms(const RunConfig& cfg, const std::string& out_dir);

// Writes report.json (2-space indent, trailing newline).
void write_report(const std::string& out_dir, const nlohmann::ordered_json& report);

}  // namespace rotforch
