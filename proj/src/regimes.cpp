#include "cfb/regimes.hpp"

#include <cmath>
#include <limits>

#include "cfb/constants.hpp"
#include "cfb/errors.hpp"
#include "cfb/reduced_model.hpp"

namespace cfb {

namespace {

// Dimensionless units: Omega_m = 1. The occupation A+/(A- - A+) does not depend on the
// coupling scale, so any small coupling works.
ModelParams unit_model(double kappaOverOmega, double detuningOverOmega) {
  if (!(kappaOverOmega > 0.0)) throw ParameterError("kappa / Omega_m must be positive");
  ModelParams m;
  m.mech.omega_m = 1.0;
  m.mech.gamma_m = 1e-9;
  m.mech.temperature = 0.0;
  m.kappa = kappaOverOmega;
  m.detuning = detuningOverOmega;
  m.g1 = 1e-3;
  return m;
}

double floor_of(const ModelParams& m) {
  const SidebandRates r = sideband_rates(m);
  const double gamma = r.aMinus - r.aPlus;
  if (!(gamma > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return r.aPlus / gamma;
}

}  // namespace

double feedback_floor(double kappaOverOmega, double detuningOverOmega, double eta) {
  ModelParams m = unit_model(kappaOverOmega, detuningOverOmega);
  m.g2 = m.g1;
  m.eta = eta;
  m.phi = kPi / 2.0;
  m.tau = kPi / 2.0;
  return floor_of(m);
}

double cavity_floor(double kappaOverOmega, double detuningOverOmega) {
  ModelParams m = unit_model(kappaOverOmega, detuningOverOmega);
  return floor_of(m);
}

std::vector<RegimeRow> regime_comparison(double etaCF, const std::vector<double>& ratios) {
  if (!(etaCF > 0.0 && etaCF <= 1.0)) throw ParameterError("eta must lie in (0, 1]");
  std::vector<RegimeRow> rows;
  rows.reserve(ratios.size());
  for (double k : ratios) {
    RegimeRow r;
    r.kappaOverOmega = k;
    r.feedbackResonant = feedback_floor(k, 0.0, etaCF);
    r.feedbackRedSideband = feedback_floor(k, -1.0, etaCF);
    r.cavityRedSideband = cavity_floor(k, -1.0);
    r.cavityHalfLinewidth = cavity_floor(k, -k / 2.0);
    r.dbaLimit = dba_limit(k, 1.0);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace cfb
