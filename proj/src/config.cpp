#include "vortex/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"
#include "vortex/plane.hpp"

namespace vortex {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError("field '" + field + "': " + what);
}

void only_keys(const json& obj, const std::string& where, std::set<std::string> allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) fail(where.empty() ? k : where + "." + k, "unknown field");
}

std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

double number(const json& obj, const std::string& where, const std::string& key,
              std::optional<double> dflt = std::nullopt) {
  const std::string f = join(where, key);
  if (!obj.contains(key)) {
    if (dflt) return *dflt;
    fail(f, "required");
  }
  const json& v = obj.at(key);
  if (!v.is_number()) fail(f, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(f, "must be finite");
  return x;
}

int integer(const json& obj, const std::string& where, const std::string& key, std::optional<int> dflt) {
  const std::string f = join(where, key);
  if (!obj.contains(key)) {
    if (dflt) return *dflt;
    fail(f, "required");
  }
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(f, "expected an integer");
  return v.get<int>();
}

std::string text(const json& obj, const std::string& where, const std::string& key,
                 std::optional<std::string> dflt) {
  const std::string f = join(where, key);
  if (!obj.contains(key)) {
    if (dflt) return *dflt;
    fail(f, "required");
  }
  const json& v = obj.at(key);
  if (!v.is_string()) fail(f, "expected a string");
  return v.get<std::string>();
}

bool flag(const json& obj, const std::string& where, const std::string& key, bool dflt) {
  if (!obj.contains(key)) return dflt;
  const json& v = obj.at(key);
  if (!v.is_boolean()) fail(join(where, key), "expected true or false");
  return v.get<bool>();
}

std::pair<int, int> line_col(const std::string& s, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t k = 0; k + 1 < byte && k < s.size(); ++k) {
    if (s[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

VortexSet parse_vortices(const json& j) {
  if (!j.is_array()) fail("vortices", "expected a list of per-species lists");
  VortexSet vs;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string wi = "vortices[" + std::to_string(i) + "]";
    if (!j[i].is_array()) fail(wi, "expected a list of points");
    std::vector<VortexPoint> pts;
    for (std::size_t k = 0; k < j[i].size(); ++k) {
      const std::string wk = wi + "[" + std::to_string(k) + "]";
      only_keys(j[i][k], wk, {"x", "y", "multiplicity"});
      VortexPoint pt{number(j[i][k], wk, "x"), number(j[i][k], wk, "y"),
                     integer(j[i][k], wk, "multiplicity", 1)};
      if (pt.multiplicity < 1) fail(join(wk, "multiplicity"), "must be at least 1");
      pts.push_back(pt);
    }
    vs.species.push_back(std::move(pts));
  }
  return vs;
}

GridDomain parse_domain(const json& j, RunMode mode, const ModelParams& p) {
  const std::string kind = text(j, "domain", "kind", mode == RunMode::plane ? "box" : "torus");
  try {
    if (kind == "box") {
      if (mode != RunMode::plane) fail("domain.kind", "torus mode needs a torus domain");
      only_keys(j, "domain", {"kind", "half_width", "cells"});
      double half = 0.0;
      if (!j.contains("half_width") || (j.at("half_width").is_string() && j.at("half_width") == "auto"))
        half = default_half_width(p);
      else
        half = number(j, "domain", "half_width");
      return GridDomain::box(half, integer(j, "domain", "cells", 512));
    }
    if (kind == "torus") {
      if (mode != RunMode::torus) fail("domain.kind", "plane mode needs a box domain");
      only_keys(j, "domain", {"kind", "period_x", "period_y", "nodes", "stencil"});
      const std::string st = text(j, "domain", "stencil", "five_point");
      if (st != "five_point" && st != "spectral") fail("domain.stencil", "expected five_point or spectral");
      const int n = integer(j, "domain", "nodes", 256);
      return GridDomain::torus(number(j, "domain", "period_x", 2.0 * std::numbers::pi),
                               number(j, "domain", "period_y", 2.0 * std::numbers::pi), n, n,
                               st == "spectral" ? TorusStencil::spectral : TorusStencil::five_point);
    }
  } catch (const DomainError& e) {
    fail("domain", e.what());
  }
  fail("domain.kind", "expected box or torus");
}

}  // namespace

double RunConfig::tol() const {
  return solve.tol.value_or(mode == RunMode::plane ? PlaneOptions{}.tol : TorusOptions{}.tol);
}

int RunConfig::max_iter() const {
  return solve.max_iter.value_or(mode == RunMode::plane ? PlaneOptions{}.max_iter
                                                         : TorusOptions{}.max_iter);
}

const char* to_string(RunMode m) { return m == RunMode::plane ? "plane" : "torus"; }
const char* to_string(TorusSeed s) { return s == TorusSeed::zero ? "zero" : "tarantello"; }

TorusSeed parse_seed(const std::string& s) {
  if (s == "zero") return TorusSeed::zero;
  if (s == "tarantello") return TorusSeed::tarantello;
  throw ConfigError("seed must be zero or tarantello, got '" + s + "'");
}

RunConfig parse_config(const std::string& src) {
  json j;
  try {
    j = json::parse(src);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(src, e.byte);
    throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col) +
                      ": malformed structured text");
  }
  only_keys(j, "", {"schema_version", "mode", "units", "params", "domain", "vortices", "solver", "output"});
  const int version = integer(j, "", "schema_version", std::nullopt);
  if (version != kConfigSchemaVersion)
    fail("schema_version", "unsupported version " + std::to_string(version) + " (expected " +
                               std::to_string(kConfigSchemaVersion) + ")");
  if (j.contains("units")) {
    only_keys(j["units"], "units", {"length", "parameters"});
    for (const char* k : {"length", "parameters"})
      if (text(j["units"], "units", k, "rescaled") != "rescaled")
        fail(std::string("units.") + k, "only rescaled units are supported");
  }

  RunConfig c;
  const std::string mode = text(j, "", "mode", std::nullopt);
  if (mode == "plane")
    c.mode = RunMode::plane;
  else if (mode == "torus")
    c.mode = RunMode::torus;
  else
    fail("mode", "expected plane or torus");

  c.vortices = parse_vortices(j.value("vortices", json::array()));
  if (c.vortices.species.empty()) c.vortices.species.emplace_back();

  const json& pj = j.contains("params") ? j["params"] : json::object();
  only_keys(pj, "params", {"alpha", "beta", "species", "lambda_bg", "sigma"});
  c.params.alpha = number(pj, "params", "alpha");
  c.params.beta = number(pj, "params", "beta");
  c.params.species = integer(pj, "params", "species", c.vortices.species_count());
  c.params.lambda_bg = number(pj, "params", "lambda_bg", 10.0);
  c.params.sigma = number(pj, "params", "sigma", 2.0);
  if (c.vortices.species_count() != c.params.species)
    fail("vortices", "has " + std::to_string(c.vortices.species_count()) +
                         " species lists, params.species is " + std::to_string(c.params.species));
  try {
    if (c.mode == RunMode::plane)
      c.params.validate_plane();
    else
      c.params.validate_torus();
  } catch (const std::invalid_argument& e) {
    fail("params", e.what());
  }

  c.domain = parse_domain(j.contains("domain") ? j["domain"] : json::object(), c.mode, c.params);

  const json& sj = j.contains("solver") ? j["solver"] : json::object();
  only_keys(sj, "solver", {"tol", "max_iter", "seed", "lambda_t", "second_solution", "path_nodes",
                           "separation", "rng_seed"});
  if (sj.contains("tol")) {
    c.solve.tol = number(sj, "solver", "tol");
    if (!(*c.solve.tol > 0.0)) fail("solver.tol", "must be positive");
  }
  if (sj.contains("max_iter")) {
    c.solve.max_iter = integer(sj, "solver", "max_iter", std::nullopt);
    if (*c.solve.max_iter < 1) fail("solver.max_iter", "must be at least 1");
  }
  try {
    c.solve.seed = parse_seed(text(sj, "solver", "seed", "tarantello"));
  } catch (const ConfigError& e) {
    fail("solver.seed", e.what());
  }
  c.solve.lambda_t = number(sj, "solver", "lambda_t", 0.0);
  if (c.solve.lambda_t < 0.0) fail("solver.lambda_t", "must be nonnegative (0 selects 4 alpha beta)");
  c.solve.second_solution = flag(sj, "solver", "second_solution", false);
  if (c.solve.second_solution && c.mode != RunMode::torus)
    fail("solver.second_solution", "only available in torus mode");
  c.solve.path_nodes = integer(sj, "solver", "path_nodes", 17);
  if (c.solve.path_nodes < 3) fail("solver.path_nodes", "must be at least 3");
  c.solve.separation = number(sj, "solver", "separation", 1e-3);
  if (sj.contains("rng_seed")) {
    if (!sj["rng_seed"].is_number_unsigned()) fail("solver.rng_seed", "expected a nonnegative integer");
    c.solve.rng_seed = sj["rng_seed"].get<std::uint64_t>();
  }

  if (j.contains("output")) {
    only_keys(j["output"], "output", {"dir"});
    c.out_dir = text(j["output"], "output", "dir", "vortex_out");
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string config_json(const RunConfig& c) {
  ojson j;
  j["schema_version"] = kConfigSchemaVersion;
  j["mode"] = to_string(c.mode);
  j["units"] = {{"length", "rescaled"}, {"parameters", "rescaled"}};
  j["params"] = {{"alpha", c.params.alpha},
                 {"beta", c.params.beta},
                 {"species", c.params.species},
                 {"lambda_bg", c.params.lambda_bg},
                 {"sigma", c.params.sigma}};
  if (c.domain.is_box()) {
    j["domain"] = {{"kind", "box"}, {"half_width", c.domain.ext1}, {"cells", c.domain.n1}};
  } else {
    j["domain"] = {{"kind", "torus"},
                   {"period_x", c.domain.ext1},
                   {"period_y", c.domain.ext2},
                   {"nodes", c.domain.n1},
                   {"stencil", c.domain.stencil == TorusStencil::spectral ? "spectral" : "five_point"}};
  }
  ojson vs = ojson::array();
  for (const auto& sp : c.vortices.species) {
    ojson l = ojson::array();
    for (const auto& pt : sp) l.push_back({{"x", pt.x}, {"y", pt.y}, {"multiplicity", pt.multiplicity}});
    vs.push_back(l);
  }
  j["vortices"] = vs;
  ojson s;
  s["tol"] = c.tol();
  s["max_iter"] = c.max_iter();
  s["seed"] = to_string(c.solve.seed);
  s["lambda_t"] = c.solve.lambda_t;
  s["second_solution"] = c.solve.second_solution;
  s["path_nodes"] = c.solve.path_nodes;
  s["separation"] = c.solve.separation;
  s["rng_seed"] = c.solve.rng_seed;
  j["solver"] = s;
  j["output"] = {{"dir", c.out_dir.string()}};
  return j.dump(2) + "\n";
}

}  // namespace vortex
