#pragma once

#include <vector>

namespace cfb {

/// Ground-state-limited occupations (no thermal bath, C_qu -> infinity) at one kappa/Omega_m.
/// Coherent feedback uses g1 = g2 and phi = Omega_m tau = pi/2; cavity cooling is a single
/// beam without loop. NaN marks a point whose damping is not positive.
struct RegimeRow {
  double kappaOverOmega = 0.0;
  double feedbackResonant = 0.0;     // coherent feedback, Delta = 0
  double feedbackRedSideband = 0.0;  // coherent feedback, Delta = -Omega_m
  double cavityRedSideband = 0.0;    // cavity cooling, Delta = -Omega_m
  double cavityHalfLinewidth = 0.0;  // cavity cooling, Delta = -kappa/2
  double dbaLimit = 0.0;             // kappa / (4 Omega_m)
};

/// Occupation A+/(A- - A+) for the two cooling schemes.
double feedback_floor(double kappaOverOmega, double detuningOverOmega, double eta);
double cavity_floor(double kappaOverOmega, double detuningOverOmega);

std::vector<RegimeRow> regime_comparison(double etaCF, const std::vector<double>& kappaOverOmega);

}  // namespace cfb
