#pragma once

#include <complex>
#include <optional>
#include <string>

namespace cfb {

using Complex = std::complex<double>;

/// Mechanical mode. All rates in rad/s, temperature in K.
struct MechanicalMode {
  double omega_m = 0.0;
  double gamma_m = 0.0;
  double temperature = 0.0;

  double quality_factor() const { return omega_m / gamma_m; }
  void validate() const;
  /// Non-empty when Q < 10, where the high-Q reduced description is questionable.
  std::optional<std::string> quality_warning() const;
};

/// Optical cavity shared by both polarization modes.
struct CavityMode {
  double kappa = 0.0;     // linewidth (rad/s)
  double detuning = 0.0;  // omega_L - omega_c (rad/s)
  double g0 = 0.0;        // bare optomechanical coupling (rad/s)
  double omega_L = 0.0;   // laser angular frequency (rad/s)

  void validate() const;
};

/// Loop efficiencies, each in (0, 1].
struct LossBudget {
  double eta1 = 1.0;    // first-pass incoupling
  double eta2 = 1.0;    // second-pass incoupling
  double etaT = 1.0;    // propagation transmission
  double etaAux = 1.0;  // combining beamsplitter ratio

  double total() const { return eta1 * eta2 * etaT * etaAux; }
  void validate() const;
};

/// Drive powers in W measured in front of the cavity; lock phase in rad.
struct DriveConfig {
  double p1 = 0.0;
  double pAuxMeasured = 0.0;
  double auxLockPhase = 0.0;  // arg(alpha_aux / alpha_1^out)

  /// Auxiliary power at the combining beamsplitter input, P_aux = P~_aux / ((1 - eta_aux) eta_T).
  double aux_power(const LossBudget& losses) const;
};

enum class PhaseMode {
  Direct,    // loop phase given explicitly
  FromLock,  // loop phase = arg(alpha1 / alpha2) from the mean fields
};

struct FeedbackLoop {
  double phi = 0.0;         // used in PhaseMode::Direct (rad)
  double tau = 0.0;         // delay (s)
  PhaseMode mode = PhaseMode::FromLock;
  double lockOffset = 0.0;  // additive offset applied to the lock phase (rad)
};

/// Complete physical description of one operating point.
struct SystemParams {
  MechanicalMode mech;
  CavityMode cavity;
  LossBudget losses;
  DriveConfig drive;
  FeedbackLoop loop;

  void validate() const;
};

/// Steady-state mean fields and the couplings derived from them.
struct MeanFields {
  Complex alpha1In;   // sqrt(eta1) * alpha1'^in, real and positive
  Complex alphaAux;   // composite auxiliary amplitude seen by the second mode
  Complex alpha1;     // intracavity amplitude, mode 1
  Complex alpha2;     // intracavity amplitude, mode 2
  Complex alpha1Out;  // mean output of mode 1 used as lock reference
  double g1 = 0.0;
  double g2 = 0.0;
  double deltaX = 0.0;  // static membrane displacement in zero-point units
  double phi = 0.0;     // arg(alpha1 / alpha2)
};

/// Linearized model inputs: everything the Langevin equations need.
/// Rates in rad/s, delay in s, phase in rad.
struct ModelParams {
  MechanicalMode mech;
  double kappa = 0.0;
  double detuning = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
  double eta = 0.0;
  double phi = 0.0;
  double tau = 0.0;

  double n_th() const;
  void validate() const;
};

/// Bose-Einstein occupation at angular frequency omega > 0 and temperature T (0 for T = 0).
double bose_occupation(double omega, double temperature);

/// n_th = n_B(Omega_m).
double thermal_occupation(const MechanicalMode& mech);

/// Thermal force spectrum gamma_m |w|/Omega_m [n_B(|w|) + Theta(w)], Theta(0) = 1/2.
double thermal_spectrum(const MechanicalMode& mech, double omega);

MeanFields mean_fields(const SystemParams& params);

/// Optional fixed couplings that replace the mean-field values (rad/s).
struct CouplingOverride {
  std::optional<double> g1;
  std::optional<double> g2;
};

/// Resolve couplings and loop phase from the physical description.
ModelParams resolve(const SystemParams& params);
ModelParams resolve(const SystemParams& params, const CouplingOverride& couplings);

}  // namespace cfb
