#include "vortex/run.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "vortex/field_io.hpp"

namespace fs = std::filesystem;

namespace vortex {

namespace {

constexpr double kDecayBand = 0.15;

void write_text(const fs::path& path, const std::string& s) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FieldFileError("cannot open " + path.string() + " for writing");
  out << s;
  if (!out) throw FieldFileError("write failed: " + path.string());
}

void write_trace(const fs::path& path, const std::vector<double>& values) {
  std::string s = "step,energy\n";
  for (std::size_t k = 0; k < values.size(); ++k) s += fmt::format("{},{:.17g}\n", k, values[k]);
  write_text(path, s);
}

void write_profile(const fs::path& path, const PlaneFields& f) {
  std::string s = "ray,r,value\n";
  for (const auto& x : decay_profile(f)) s += fmt::format("{},{:.17g},{:.17g}\n", x.ray, x.r, x.value);
  write_text(path, s);
}

std::vector<BoundCheck> not_applicable(std::vector<BoundCheck> checks) {
  for (auto& c : checks) c.status = CheckStatus::not_applicable;
  return checks;
}

// exit code for a set of reports whose solves all returned
RunOutcome judge(std::vector<SolveReport> reports, const ReportThresholds& t) {
  RunOutcome out;
  for (const auto& r : reports)
    for (const auto& f : failed_checks(r, t)) out.failed.push_back(r.label + ":" + f);
  out.reports = std::move(reports);
  out.exit_code = out.failed.empty() ? kExitOk : kExitDiagnosticFailure;
  return out;
}

void log_outcome(std::ostream& log, const RunOutcome& o) {
  for (const auto& f : o.failed) fmt::print(log, "FAILED {}\n", f);
  if (!o.message.empty()) fmt::print(log, "{}\n", o.message);
}

PlaneFields load_plane_fields(const RunConfig& c, const fs::path& dir) {
  PlaneFields f;
  f.total = read_field(dir / "u.bin", c.domain);
  for (int i = 1; i <= c.params.species; ++i)
    f.species.push_back(read_field(dir / fmt::format("u_{}.bin", i), c.domain));
  return f;
}

void save_plane_fields(const PlaneFields& f, const fs::path& dir) {
  write_field(dir / "u.bin", f.total);
  for (std::size_t i = 0; i < f.species.size(); ++i)
    write_field(dir / fmt::format("u_{}.bin", i + 1), f.species[i]);
}

void save_torus_fields(const TorusSolution& s, const fs::path& dir, const std::string& prefix) {
  write_field(dir / (prefix + "u.bin"), s.fields.u);
  write_field(dir / (prefix + "v.bin"), s.fields.v);
  write_field(dir / (prefix + "U.bin"), s.gauge.big_u);
  write_field(dir / (prefix + "V.bin"), s.gauge.big_v);
}

PlaneSolution plane_from_fields(const RunConfig& c, const PlaneFields& f) {
  PlaneSolution s;
  s.params = c.params;
  s.vortices = c.vortices;
  s.bg = plane_background(c.vortices, c.params.lambda_bg, c.domain);
  s.fields = f;
  s.state.shift.push_back(f.total - s.bg.u0_sum);
  for (std::size_t i = 0; i < f.species.size(); ++i) s.state.shift.push_back(f.species[i] - s.bg.u0[i]);
  s.stats.energy = plane_energy(s.state, s.bg, c.params);
  double g = 0.0;
  for (const auto& x : plane_gradient(s.state, s.bg, c.params).shift) g = std::max(g, x.max_abs());
  s.stats.grad_norm = g;
  return s;
}

double l2_distance(const TorusSolution& a, const TorusSolution& b) {
  const GridDomain& d = a.fields.u.domain();
  long double acc = 0.0L;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double du = a.fields.u[k] - b.fields.u[k], dv = a.fields.v[k] - b.fields.v[k];
    acc += du * du + dv * dv;
  }
  return std::sqrt(static_cast<double>(acc) * d.cell_area());
}

PlaneSolution solve_plane_config(const RunConfig& c, double tol) {
  PlaneOptions o;
  o.tol = tol;
  o.max_iter = c.max_iter();
  return solve_plane(c.params, c.vortices, c.domain, o);
}

TorusOptions torus_options(const RunConfig& c) {
  TorusOptions o;
  o.tol = c.tol();
  o.max_iter = c.max_iter();
  o.seed = c.solve.seed;
  o.lambda_t = c.solve.lambda_t;
  return o;
}

MountainPassOptions mountain_pass_options(const RunConfig& c) {
  MountainPassOptions o;
  o.path_nodes = c.solve.path_nodes;
  o.separation = c.solve.separation;
  o.seed = c.solve.rng_seed;
  o.tol = c.tol();
  return o;
}

}  // namespace

void apply_overrides(RunConfig& c, const CliOverrides& o, const char* env_out_dir) {
  if (o.tol) {
    if (!(*o.tol > 0.0)) throw ConfigError("--tol must be positive");
    c.solve.tol = o.tol;
  }
  if (o.max_iter) {
    if (*o.max_iter < 1) throw ConfigError("--max-iter must be at least 1");
    c.solve.max_iter = o.max_iter;
  }
  if (o.grid) {
    try {
      c.domain = c.domain.is_box()
                     ? GridDomain::box(c.domain.ext1, *o.grid)
                     : GridDomain::torus(c.domain.ext1, c.domain.ext2, *o.grid, *o.grid, c.domain.stencil);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("--grid: ") + e.what());
    }
  }
  if (o.seed) c.solve.seed = *o.seed;
  if (o.second_solution) {
    if (c.mode != RunMode::torus) throw ConfigError("--second-solution needs a torus configuration");
    c.solve.second_solution = true;
  }
  if (o.out_dir)
    c.out_dir = *o.out_dir;
  else if (env_out_dir && *env_out_dir)
    c.out_dir = env_out_dir;
}

ReportThresholds thresholds_for(const RunConfig& c) {
  ReportThresholds t;
  t.residual = 10.0 * c.tol();
  return t;
}

SolveReport plane_report(const PlaneSolution& s, bool with_decay) {
  SolveReport r;
  r.mode = "plane";
  r.label = "plane";
  r.energy = s.stats.energy;
  r.grad_norm = s.stats.grad_norm;
  r.quantized = plane_quantized_integrals(s.fields, s.vortices, s.params);
  r.residual = plane_pde_residual(s.state, s.bg, s.params, s.vortices);
  const bool any = s.vortices.total() > 0;
  if (with_decay && any) {
    try {
      r.decay = decay_fit(s.fields, s.params);
    } catch (const DecayFitError& e) {
      r.notes.push_back(e.what());
    }
    r.notes.push_back("decay fit is informational here; the decay-fit subcommand gates on it");
  }
  r.max_principle = plane_sign_check(s.fields, s.vortices);
  if (!any) r.max_principle = not_applicable(std::move(r.max_principle));
  return r;
}

SolveReport torus_report(const TorusSolution& s, const std::string& label) {
  SolveReport r;
  r.mode = "torus";
  r.label = label;
  r.energy = s.stats.energy;
  r.grad_norm = s.stats.grad_norm;
  r.quantized = torus_quantized_integrals(s.gauge, s.bg.n, s.params);
  r.residual = torus_pde_residual(s.fields, s.bg, s.params, s.vortices);
  r.max_principle = max_principle_check(s.gauge, s.vortices);
  r.feasibility_margin = feasibility(s.params, s.bg.n, s.bg.u0.domain().area()).margin;
  r.extra = {{"reduced_energy", s.reduced_energy},
             {"u_mean", s.state.u_mean},
             {"v_mean", s.state.v_mean}};
  return r;
}

SolveReport second_solution_report(const MountainPassResult& m) {
  SolveReport r = torus_report(m.second, "second");
  const auto& p = m.report;
  r.extra.insert(r.extra.end(), {{"separation", p.separation},
                                 {"barrier_shift", p.barrier_shift},
                                 {"barrier_energy", p.barrier_energy},
                                 {"endpoint_shift", p.endpoint_shift},
                                 {"endpoint_energy", p.endpoint_energy},
                                 {"probe_min_rise", p.probe_min_rise}});
  return r;
}

RunOutcome run_solve(const RunConfig& c, std::ostream& log) {
  fs::create_directories(c.out_dir);
  write_text(c.out_dir / "config.json", config_json(c));
  const ReportThresholds t = thresholds_for(c);
  RunOutcome out;

  if (c.mode == RunMode::plane) {
    fmt::print(log, "solving plane system: M={} n={} N={} L={}\n", c.params.species, c.vortices.total(),
               c.domain.n1, c.domain.ext1);
    PlaneSolution s;
    bool converged = true;
    std::string msg;
    try {
      s = solve_plane_config(c, c.tol());
    } catch (const PlaneNonConvergence& e) {
      s = e.last;
      converged = false;
      msg = e.what();
    }
    save_plane_fields(s.fields, c.out_dir);
    write_trace(c.out_dir / "energy_trace.csv", s.stats.energy_trace);
    SolveReport r = plane_report(s, true);
    r.converged = converged;
    r.iterations = s.stats.iterations;
    r.wall_time = s.stats.seconds;
    if (s.vortices.total() > 0) write_profile(c.out_dir / "decay_profile.csv", s.fields);
    out = judge({r}, t);
    if (!converged) {
      out.exit_code = kExitNonConvergence;
      out.message = msg;
    }
  } else {
    const Feasibility fe = feasibility(c.params, c.vortices.total(), c.domain.area());
    if (!fe.feasible) {
      out.exit_code = kExitInfeasible;
      out.message = fmt::format("infeasible: alpha beta |Omega| - 8 pi n = {:.6g} < 0; no solution exists",
                                fe.margin);
      SolveReport r;
      r.mode = "torus";
      r.label = "first";
      r.feasibility_margin = fe.margin;
      r.notes.push_back(out.message);
      out.reports.push_back(r);
      write_text(c.out_dir / "report.json", report_json(out.reports));
      log_outcome(log, out);
      return out;
    }
    fmt::print(log, "solving torus system: alpha={} beta={} n={} N={}\n", c.params.alpha, c.params.beta,
               c.vortices.total(), c.domain.n1);
    TorusSolution first;
    try {
      first = minimize_torus(c.params, c.vortices, c.domain, torus_options(c));
    } catch (const InadmissibleError& e) {
      out.exit_code = kExitNonConvergence;
      out.message = e.what();
      SolveReport r;
      r.mode = "torus";
      r.label = "first";
      r.feasibility_margin = fe.margin;
      r.notes.push_back(out.message);
      out.reports.push_back(r);
      write_text(c.out_dir / "report.json", report_json(out.reports));
      log_outcome(log, out);
      return out;
    } catch (const TorusNonConvergence& e) {
      save_torus_fields(e.last, c.out_dir, "");
      SolveReport r = torus_report(e.last, "first");
      r.converged = false;
      r.iterations = e.last.stats.iterations;
      r.wall_time = e.last.stats.seconds;
      r.notes.push_back(e.what());
      out.reports.push_back(r);
      out.exit_code = kExitNonConvergence;
      out.message = e.what();
      write_text(c.out_dir / "report.json", report_json(out.reports));
      log_outcome(log, out);
      return out;
    }
    save_torus_fields(first, c.out_dir, "");
    write_trace(c.out_dir / "energy_trace.csv", first.stats.energy_trace);
    SolveReport r1 = torus_report(first, "first");
    r1.converged = true;
    r1.iterations = first.stats.iterations;
    r1.wall_time = first.stats.seconds;
    std::vector<SolveReport> reports{r1};
    std::string msg;
    bool second_failed = false;
    if (c.solve.second_solution) {
      fmt::print(log, "searching for a second solution along the mountain-pass path\n");
      try {
        const MountainPassResult mp = mountain_pass(first, mountain_pass_options(c));
        save_torus_fields(mp.second, c.out_dir, "second_");
        std::string path = "shift,energy\n";
        for (std::size_t k = 0; k < mp.report.path_shifts.size(); ++k)
          path += fmt::format("{:.17g},{:.17g}\n", mp.report.path_shifts[k], mp.report.path_energies[k]);
        write_text(c.out_dir / "mountain_pass_path.csv", path);
        SolveReport r2 = second_solution_report(mp);
        r2.converged = true;
        r2.iterations = mp.second.stats.iterations;
        r2.wall_time = mp.second.stats.seconds;
        if (!(r2.energy > r1.energy)) r2.notes.push_back("energy of the second solution does not exceed the first");
        reports.push_back(r2);
      } catch (const MountainPassError& e) {
        second_failed = true;
        msg = e.what();
      }
    }
    out = judge(reports, t);
    if (out.reports.size() == 2 && !(out.reports[1].energy > out.reports[0].energy))
      out.failed.push_back("second:energy_ordering"), out.exit_code = kExitDiagnosticFailure;
    if (second_failed) {
      out.exit_code = kExitNonConvergence;
      out.message = "second solution: " + msg;
    }
  }
  write_text(c.out_dir / "report.json", report_json(out.reports));
  log_outcome(log, out);
  return out;
}

RunOutcome run_verify(const RunConfig& c, const fs::path& dir, std::ostream& log) {
  std::vector<SolveReport> reports;
  if (c.mode == RunMode::plane) {
    const PlaneSolution s = plane_from_fields(c, load_plane_fields(c, dir));
    reports.push_back(plane_report(s, true));
  } else {
    const BackgroundTorus bg = torus_background(c.vortices, c.domain);
    auto load = [&](const std::string& prefix) {
      TorusSolution s = make_torus_solution(c.params, c.vortices, bg, read_field(dir / (prefix + "u.bin"), c.domain),
                                            read_field(dir / (prefix + "v.bin"), c.domain));
      s.reduced_energy = reduced_energy(s.state.u_zero_mean, s.state.v_zero_mean,
                                        {s.state.u_mean, s.state.v_mean, 0}, bg, c.params);
      return s;
    };
    const TorusSolution first = load("");
    reports.push_back(torus_report(first, "first"));
    if (c.solve.second_solution) {
      const TorusSolution second = load("second_");
      SolveReport r2 = torus_report(second, "second");
      r2.extra.emplace_back("separation", l2_distance(first, second));
      reports.push_back(r2);
    }
  }
  RunOutcome out = judge(reports, thresholds_for(c));
  if (out.reports.size() == 2) {
    if (!(out.reports[1].energy > out.reports[0].energy)) out.failed.push_back("second:energy_ordering");
    if (!(out.reports[1].extra.back().second >= c.solve.separation)) out.failed.push_back("second:separation");
    if (!out.failed.empty()) out.exit_code = kExitDiagnosticFailure;
  }
  write_text(dir / "verify_report.json", report_json(out.reports));
  log_outcome(log, out);
  return out;
}

RunOutcome run_decay_fit(const RunConfig& c, std::ostream& log) {
  if (c.mode != RunMode::plane) throw ConfigError("decay-fit needs a plane configuration");
  if (c.vortices.total() == 0) throw ConfigError("decay-fit needs at least one vortex");
  fs::create_directories(c.out_dir);
  const double tol = std::min(c.tol(), 1e-11);
  fmt::print(log, "solving plane system at tol {:.1e} for the decay fit\n", tol);
  RunOutcome out;
  PlaneSolution s;
  try {
    s = solve_plane_config(c, tol);
  } catch (const PlaneNonConvergence& e) {
    out.exit_code = kExitNonConvergence;
    out.message = e.what();
    log_outcome(log, out);
    return out;
  }
  SolveReport r;
  r.mode = "plane";
  r.label = "decay";
  r.energy = s.stats.energy;
  r.grad_norm = s.stats.grad_norm;
  r.converged = true;
  r.iterations = s.stats.iterations;
  r.wall_time = s.stats.seconds;
  try {
    r.decay = decay_fit(s.fields, s.params);
    write_profile(c.out_dir / "decay_profile.csv", s.fields);
    const double linear = 4.0 * std::min(c.params.alpha, c.params.beta);
    r.extra = {{"linearized_rate", linear}};
    if (!(r.decay->rel_dev <= kDecayBand)) out.failed.push_back("decay:rel_dev");
  } catch (const DecayFitError& e) {
    r.notes.push_back(e.what());
    out.failed.push_back("decay:underflow");
  }
  out.reports.push_back(r);
  out.exit_code = out.failed.empty() ? kExitOk : kExitDiagnosticFailure;
  write_text(c.out_dir / "decay_report.json", report_json(out.reports));
  log_outcome(log, out);
  return out;
}

}  // namespace vortex
