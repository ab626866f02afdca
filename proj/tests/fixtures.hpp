#pragma once

#include <cmath>
#include <random>

#include "cfb/constants.hpp"
#include "cfb/params.hpp"

namespace fixtures {

using cfb::hz_to_rad;

/// Membrane-in-cavity values with the measured loop losses.
inline cfb::SystemParams membrane_system() {
  cfb::SystemParams p;
  p.mech.omega_m = hz_to_rad(1.9e6);
  p.mech.gamma_m = p.mech.omega_m / 3.2e6;
  p.mech.temperature = 20.0;
  p.cavity.kappa = hz_to_rad(55e6);
  p.cavity.detuning = 0.0;
  p.cavity.g0 = hz_to_rad(160.0);
  p.cavity.omega_L = cfb::kTwoPi * cfb::kSpeedOfLight / 852e-9;
  p.losses = {0.91, 0.9, 0.3, 0.87};
  p.loop.tau = 0.0;
  return p;
}

/// Phase scan point: 20 uW / 3 uW, Delta = -0.2 kappa, Omega_m tau = 0.07 pi.
inline cfb::SystemParams phase_scan_system(double lockDeg = 90.0) {
  cfb::SystemParams p = membrane_system();
  p.cavity.detuning = -0.2 * p.cavity.kappa;
  p.drive.p1 = 20e-6;
  p.drive.pAuxMeasured = 3e-6;
  p.drive.auxLockPhase = cfb::deg_to_rad(lockDeg);
  p.loop.tau = 0.07 * cfb::kPi / p.mech.omega_m;
  return p;
}

/// Direct-phase model with explicit couplings, membrane mechanics and cavity.
inline cfb::ModelParams model(double g1Hz, double g2Hz, double eta, double phi, double omegaTau,
                              double detuningOverKappa = 0.0) {
  cfb::ModelParams m;
  const cfb::SystemParams p = membrane_system();
  m.mech = p.mech;
  m.kappa = p.cavity.kappa;
  m.detuning = detuningOverKappa * m.kappa;
  m.g1 = hz_to_rad(g1Hz);
  m.g2 = hz_to_rad(g2Hz);
  m.eta = eta;
  m.phi = phi;
  m.tau = omegaTau / m.mech.omega_m;
  return m;
}

inline double rel(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace fixtures
