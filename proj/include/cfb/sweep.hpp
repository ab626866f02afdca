#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cfb/integration.hpp"
#include "cfb/lorentzian_fit.hpp"
#include "cfb/params.hpp"
#include "cfb/reduced_model.hpp"

namespace cfb {

enum class SweepAxis {
  DetuningOverKappa,
  LockPhaseDeg,
  PhiDeg,
  OmegaTauOverPi,
  TauSeconds,
  P1,
  PAuxMeasured,
  TotalPower,
  KappaOverOmegaM,
};

enum class ModelKind { Reduced, Full };
enum class Spacing { Linear, Log };

const char* axis_name(SweepAxis axis);
std::optional<SweepAxis> parse_axis(const std::string& name);
const char* axis_unit(SweepAxis axis);

/// P = P1 (1 + etaT etaAux) + P~aux + 2 sqrt(etaAux eta2 P1 P~aux) cos(lock phase).
double total_power(const SystemParams& params);

/// Returns `params` with the axis variable set to `value` (axis units).
SystemParams apply_axis(SystemParams params, SweepAxis axis, double value);

std::vector<double> axis_values(double start, double stop, std::size_t points, Spacing spacing);

/// Full-model operating point: Lorentzian fit of the symmetrized S_XX around +Omega_m and
/// the adaptive phonon integral.
struct FullModelPoint {
  CoolingResult result;  // shift and damping from the fit, occupation from the integral
  LorentzianFit fit;
  PhononIntegral integral;
  double nBarFromFit = 0.0;  // amplitude * halfWidth - 1/2
};

struct FullFitOptions {
  double spanLinewidths = 20.0;
  std::size_t points = 801;
  IntegrationOptions integration;
};

/// Throws InstabilityError when the reduced model reports gamma_m + Gamma_m <= 0.
FullModelPoint evaluate_full_model(const ModelParams& params, const FullFitOptions& options = {});

struct SweepSpec {
  SweepAxis axis = SweepAxis::DetuningOverKappa;
  double start = 0.0;
  double stop = 0.0;
  std::size_t points = 2;
  Spacing spacing = Spacing::Linear;
  SystemParams baseline;
  CouplingOverride couplings;
  ModelKind model = ModelKind::Reduced;
  std::optional<SweepAxis> seriesAxis;
  std::vector<double> seriesValues;
  unsigned workers = 1;
  FullFitOptions fullOptions;

  void validate() const;
};

struct SweepRow {
  double series = 0.0;
  double value = 0.0;
  CoolingResult result;
  CoolingResult withoutLoop;   // same couplings, eta = 0
  CoolingResult singlePass;    // g2 = 0, eta = 0
  double g1 = 0.0;
  double g2 = 0.0;
  double phi = 0.0;
  double totalPower = 0.0;
  std::optional<CoolingResult> singleBeamDba;  // total-power axis: all power in one beam at Delta = -kappa/2
  std::string error;  // empty on success
};

/// Evaluates every (series, axis) point. Per-point failures are recorded in `error`.
/// Output order and values do not depend on the worker count.
std::vector<SweepRow> sweep(const SweepSpec& spec);

}  // namespace cfb
