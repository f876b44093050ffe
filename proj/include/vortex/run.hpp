#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "vortex/config.hpp"
#include "vortex/diagnostics.hpp"
#include "vortex/field_io.hpp"
#include "vortex/mountain_pass.hpp"
#include "vortex/plane.hpp"
#include "vortex/torus.hpp"

namespace vortex {

enum ExitCode : int {
  kExitOk = 0,
  kExitBadInput = 1,
  kExitDiagnosticFailure = 2,
  kExitNonConvergence = 3,
  kExitInfeasible = 4,
};

// environment variable that overrides the configured output directory
inline constexpr const char* kOutDirEnv = "VORTEXSOLVE_OUT_DIR";

struct CliOverrides {
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<int> grid;
  std::optional<TorusSeed> seed;
  bool second_solution = false;
  std::optional<std::filesystem::path> out_dir;
};

// precedence: command line, then environment, then config file
void apply_overrides(RunConfig& c, const CliOverrides& o, const char* env_out_dir);

struct RunOutcome {
  int exit_code = kExitOk;
  std::vector<SolveReport> reports;
  std::vector<std::string> failed;
  std::string message;
};

SolveReport plane_report(const PlaneSolution& s, bool with_decay);
SolveReport torus_report(const TorusSolution& s, const std::string& label);
SolveReport second_solution_report(const MountainPassResult& r);

// residual threshold used for pass/fail: 10 * solver tolerance
ReportThresholds thresholds_for(const RunConfig& c);

// Solve, diagnose and write config.json, fields, report.json and profile
// CSVs into c.out_dir.
RunOutcome run_solve(const RunConfig& c, std::ostream& log);
// Rerun the diagnostics on the fields stored in dir; writes verify_report.json.
RunOutcome run_verify(const RunConfig& c, const std::filesystem::path& dir, std::ostream& log);
// Plane solve at tol <= 1e-11 followed by the decay fit, which alone decides the exit code.
RunOutcome run_decay_fit(const RunConfig& c, std::ostream& log);

}  // namespace vortex
