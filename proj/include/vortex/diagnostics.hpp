#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vortex/background.hpp"
#include "vortex/grid.hpp"
#include "vortex/params.hpp"
#include "vortex/plane.hpp"
#include "vortex/torus.hpp"

namespace vortex {

enum class CheckStatus { pass, fail, not_applicable };
const char* to_string(CheckStatus s);

struct QuantizedIntegral {
  std::string name;
  int species = 0;  // 0 for the total, i for species i
  double computed = 0.0;
  double target = 0.0;  // -4 pi n
  double rel_error = 0.0;  // |computed - target| / |target|, absolute when target = 0
};

struct ResidualPair {
  double same_operator = 0.0;  // solver's own discrete operators
  double fourth_order = 0.0;   // independent 4th-order Laplacian
};

struct DecayFit {
  double r_min = 0.0;
  double r_max = 0.0;
  double slope = 0.0;
  double expected_m = 0.0;
  double rel_dev = 0.0;
  int rays = 0;
};

class DecayFitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BoundCheck {
  std::string name;
  CheckStatus status = CheckStatus::not_applicable;
  double worst = 0.0;  // largest value over the checked nodes
  int i = -1;          // node holding it
  int j = -1;
};

struct SolveReport {
  std::string mode;
  std::string label;
  double energy = 0.0;
  double grad_norm = 0.0;
  std::optional<bool> converged;  // absent when only diagnostics were rerun
  std::vector<QuantizedIntegral> quantized;
  ResidualPair residual;
  std::optional<DecayFit> decay;
  std::vector<BoundCheck> max_principle;
  std::optional<double> feasibility_margin;
  std::optional<int> iterations;
  std::optional<double> wall_time;
  std::vector<std::pair<std::string, double>> extra;  // run-specific scalars, in insertion order
  std::vector<std::string> notes;
};

// nodes of the 3x3 patch around every vortex node
std::vector<unsigned char> vortex_patch_mask(const VortexSet& vs, const GridDomain& d);

std::vector<QuantizedIntegral> plane_quantized_integrals(const PlaneFields& f, const VortexSet& vs,
                                                         const ModelParams& p);
std::vector<QuantizedIntegral> torus_quantized_integrals(const GaugeFields& g, int n,
                                                         const ModelParams& p);

ResidualPair plane_pde_residual(const PlaneState& s, const BackgroundPlane& bg,
                                const ModelParams& p, const VortexSet& vs);
ResidualPair torus_pde_residual(const TorusFields& f, const BackgroundTorus& bg,
                                const ModelParams& p, const VortexSet& vs);

struct RaySample {
  int ray = 0;
  double r = 0.0;
  double value = 0.0;  // u^2 + sum u_i^2
};

// samples along `rays` rays from the box centre, radii in [inner, outer] * L
std::vector<RaySample> decay_profile(const PlaneFields& f, int rays = 64, double inner = 0.5,
                                     double outer = 0.8);
DecayFit decay_fit(const PlaneFields& f, const ModelParams& p, int rays = 64, double inner = 0.5,
                   double outer = 0.8);

// U < 0, U + V < 0, U - V < 0 off the vortex patches; a node fails when the
// value exceeds tol
std::vector<BoundCheck> max_principle_check(const GaugeFields& g, const VortexSet& vs,
                                            double tol = 1e-12);
// plane sign structure u < 0, u_i < 0 at interior nodes off the vortex patches;
// a node fails when the value exceeds tol
std::vector<BoundCheck> plane_sign_check(const PlaneFields& f, const VortexSet& vs, double tol = 1e-10);

struct ReportThresholds {
  double quantized_plane = 0.02;
  double quantized_torus = 0.01;
  double residual = 1e-6;
  std::optional<double> decay;  // decay band; not gated when absent
};

// names of the failing checks; empty when everything passes
std::vector<std::string> failed_checks(const SolveReport& r, const ReportThresholds& t = {});

// structured text with a fixed key order
std::string report_json(const SolveReport& r);
std::string report_json(const std::vector<SolveReport>& reports);

}  // namespace vortex
