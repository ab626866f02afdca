#pragma once

#include <functional>
#include <optional>
#include <string>

#include "cfb/params.hpp"
#include "cfb/reduced_model.hpp"

namespace cfb {

/// Derivative filter h(w) = -i g w / (1 - i w / w_mf).
struct ColdDampingFilter {
  double gMf = 0.0;      // dimensionless gain
  double omegaMf = 0.0;  // bandwidth (rad/s)
  double etaDet = 1.0;   // detector efficiency

  Complex response(double omega) const;
  void validate() const;
};

/// Arbitrary filter Xi_mf(w) applied to the detected phase quadrature.
struct GenericFilter {
  std::function<Complex(double)> response;
  double etaDet = 1.0;
  std::string name;
};

struct FilterResponse {
  double Gamma = 0.0;
  double deltaOmega = 0.0;
  double noise = 0.0;  // S_mf(w)
};

/// Closed-form cold-damping damping and shift at Omega_m. Requires zero detuning.
ShiftDamping cold_damping_rates(const ColdDampingFilter& filter, const ModelParams& params);

/// Large-bandwidth occupation g1/(g Omega) + g Omega/(16 g1 eta_det) - 1/2.
double cold_damping_occupation(const ColdDampingFilter& filter, const ModelParams& params);

/// Set when omega_mf or kappa is less than ten times Omega_m.
std::optional<std::string> large_bandwidth_warning(const ColdDampingFilter& filter,
                                                   const ModelParams& params);

/// g_mf minimizing cold_damping_occupation: 4 sqrt(eta_det) g1 / Omega_m.
double optimal_cold_damping_gain(double g1, double omegaM, double etaDet);

GenericFilter cold_damping_filter(const ColdDampingFilter& filter);

/// Damping, shift and force noise for a generic filter at frequency omega. Requires zero detuning.
FilterResponse generic_filter_response(const GenericFilter& filter, const ModelParams& params,
                                       double omega);

/// Occupation (gamma_m n_th + S_mf(-Omega_m)) / (gamma_m + Gamma_mf(Omega_m)).
CoolingResult mbf_phonon_number(const GenericFilter& filter, const ModelParams& params);

/// Filter reproducing the coherent loop: -4 g2 sqrt(eta) e^{i w tau} / (1 - 2 i w / kappa),
/// with eta_det = eta. Requires zero detuning and phi = pi/2.
GenericFilter equivalence_filter(const ModelParams& params);

}  // namespace cfb
