#pragma once

#include "cfb/params.hpp"
#include "cfb/spectrum.hpp"

namespace cfb {

/// Mechanical response after eliminating both cavity modes. Rates in rad/s.
struct CoolingResult {
  double deltaOmega = 0.0;
  double Gamma = 0.0;
  double aPlus = 0.0;   // Stokes rate S_fb(-Omega_m)
  double aMinus = 0.0;  // anti-Stokes rate S_fb(+Omega_m)
  double nBar = 0.0;    // NaN when unstable
  double cQu = 0.0;
  bool stable = false;
};

struct ShiftDamping {
  double deltaOmega = 0.0;
  double Gamma = 0.0;
};

struct SidebandRates {
  double aPlus = 0.0;
  double aMinus = 0.0;
};

/// Where the frequency-dependent shift, damping and sideband rates are sampled.
enum class Evaluation {
  BareFrequency,     // omega = Omega_m
  ShiftedFrequency,  // omega = Omega_m + deltaOmega(Omega_m)
};

/// Feedback noise spectrum at any detuning and linewidth.
double feedback_noise_spectrum(const ModelParams& params, double omega);

/// Frequency-dependent shift and damping. Throws ParameterError at omega = 0.
ShiftDamping damping_and_shift(const ModelParams& params, double omega);

/// A+ = S_fb(-Omega_m), A- = S_fb(Omega_m). Cross-checks A- - A+ against Gamma_m(Omega_m).
SidebandRates sideband_rates(const ModelParams& params);

/// Occupation from the sideband rates; unstable points are reported, not thrown.
CoolingResult phonon_number(const ModelParams& params,
                            Evaluation where = Evaluation::BareFrequency);

/// (1 - sqrt(eta)) / (2 sqrt(eta)).
double cooling_limit(double eta);

/// Same couplings with the loop switched off (eta = 0). Throws at zero detuning.
CoolingResult dba_baseline(const ModelParams& params);

/// Two-beam backaction shift and damping to lowest order in Omega_m / kappa.
ShiftDamping dba_unresolved(const ModelParams& params);

/// (Delta^2 + kappa^2/4) / (4 |Delta| Omega_m) - 1/2.
double dba_occupation(double detuning, double kappa, double omegaM);

/// kappa / (4 Omega_m), the usual quoted figure with the -1/2 dropped.
double dba_limit(double kappa, double omegaM);

/// Lowest-order (Omega_m << kappa) shift and damping with feedback, any detuning.
ShiftDamping unresolved_damping_and_shift(const ModelParams& params);

/// Feedback noise with the cavity filter evaluated at zero frequency; the delay phase is kept.
double unresolved_noise_spectrum(const ModelParams& params, double omega);

/// Occupation in the unresolved limit for Gamma_m >> gamma_m.
double unresolved_phonon_number(const ModelParams& params);

/// Two-Lorentzian displacement spectrum. Throws InstabilityError when gamma_m + Gamma_m <= 0.
double lorentzian_density(const ModelParams& params, double omega);
Spectrum lorentzian_spectrum(const ModelParams& params, const FrequencyGrid& grid);

/// Closed-form integral of lorentzian_density over d omega / 2 pi (= nBar + 1/2).
double lorentzian_area(const ModelParams& params);

}  // namespace cfb
