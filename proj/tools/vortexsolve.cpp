#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "vortex/run.hpp"

using namespace vortex;

namespace {

struct Args {
  std::string config;
  std::string out;
  double tol = 0.0;
  int max_iter = 0;
  int grid = 0;
  std::string seed;
  bool second = false;
};

void add_common(CLI::App* sub, Args& a, bool solve) {
  sub->add_option("--config", a.config, "run configuration (JSON)")->check(CLI::ExistingFile);
  sub->add_option("--out", a.out, "output directory");
  if (!solve) return;
  sub->add_option("--tol", a.tol, "gradient max-norm tolerance");
  sub->add_option("--max-iter", a.max_iter, "iteration limit");
  sub->add_option("--grid", a.grid, "grid size per side");
}

CliOverrides overrides(const CLI::App* sub, const Args& a) {
  CliOverrides o;
  if (sub->count("--tol")) o.tol = a.tol;
  if (sub->count("--max-iter")) o.max_iter = a.max_iter;
  if (sub->count("--grid")) o.grid = a.grid;
  if (!a.seed.empty()) o.seed = parse_seed(a.seed);
  o.second_solution = a.second;
  if (!a.out.empty()) o.out_dir = a.out;
  return o;
}

RunConfig config_for(const CLI::App* sub, const Args& a, RunMode expect) {
  if (a.config.empty()) throw ConfigError("--config is required");
  RunConfig c = load_config(a.config);
  if (c.mode != expect)
    throw ConfigError(fmt::format("field 'mode': {} given to {}", to_string(c.mode), sub->get_name()));
  apply_overrides(c, overrides(sub, a), std::getenv(kOutDirEnv));
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-species vortex solver: plane and doubly periodic systems with diagnostics"};
  app.require_subcommand(1);
  Args a;
  auto* plane = app.add_subcommand("solve-plane", "solve the full-plane system on a truncated box");
  add_common(plane, a, true);
  auto* torus = app.add_subcommand("solve-torus", "solve the doubly periodic system");
  add_common(torus, a, true);
  torus->add_flag("--second-solution", a.second, "also search for a second solution");
  torus->add_option("--seed", a.seed, "initial state")->check(CLI::IsMember({"zero", "tarantello"}));
  auto* verify = app.add_subcommand("verify", "rerun diagnostics on the fields in the output directory");
  add_common(verify, a, false);
  auto* decay = app.add_subcommand("decay-fit", "plane solve plus decay-rate fit");
  add_common(decay, a, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return e.get_exit_code() == 0 ? app.exit(e) : (app.exit(e), kExitBadInput);
  }

  try {
    RunOutcome out;
    if (plane->parsed()) {
      out = run_solve(config_for(plane, a, RunMode::plane), std::cerr);
    } else if (torus->parsed()) {
      out = run_solve(config_for(torus, a, RunMode::torus), std::cerr);
    } else if (decay->parsed()) {
      out = run_decay_fit(config_for(decay, a, RunMode::plane), std::cerr);
    } else {
      std::filesystem::path dir = !a.out.empty() ? std::filesystem::path(a.out)
                                  : std::getenv(kOutDirEnv) ? std::filesystem::path(std::getenv(kOutDirEnv))
                                                            : std::filesystem::path();
      if (dir.empty()) throw ConfigError("verify needs --out DIR (or " + std::string(kOutDirEnv) + ")");
      const RunConfig c = load_config(a.config.empty() ? dir / "config.json" : std::filesystem::path(a.config));
      out = run_verify(c, dir, std::cerr);
      std::cout << report_json(out.reports);
    }
    return out.exit_code;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
  } catch (const FieldFileError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "error: {}\n", e.what());
  }
  return kExitBadInput;
}
