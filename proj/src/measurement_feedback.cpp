#include "cfb/measurement_feedback.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "cfb/constants.hpp"
#include "cfb/errors.hpp"

namespace cfb {

namespace {

constexpr double kPhaseTolerance = 1e-12;

void require_resonant(const ModelParams& p) {
  if (p.detuning != 0.0) {
    throw ParameterError("measurement-based feedback is only treated on cavity resonance");
  }
}

// 2 g1 Xi(w) / (kappa/2 - i w)
Complex loop_kernel(const GenericFilter& f, const ModelParams& p, double omega) {
  return 2.0 * p.g1 * f.response(omega) / Complex(p.kappa / 2.0, -omega);
}

}  // namespace

Complex ColdDampingFilter::response(double omega) const {
  return Complex(0.0, -gMf * omega) / Complex(1.0, -omega / omegaMf);
}

void ColdDampingFilter::validate() const {
  if (!(omegaMf > 0.0) || !std::isfinite(omegaMf)) {
    throw ParameterError("feedback bandwidth must be positive");
  }
  if (!(etaDet > 0.0 && etaDet <= 1.0)) throw ParameterError("eta_det must lie in (0, 1]");
  if (!std::isfinite(gMf)) throw ParameterError("feedback gain must be finite");
}

ShiftDamping cold_damping_rates(const ColdDampingFilter& f, const ModelParams& p) {
  f.validate();
  require_resonant(p);
  const double om = p.mech.omega_m;
  const double kh = p.kappa / 2.0;
  const double den = (kh * kh + om * om) * (om * om + f.omegaMf * f.omegaMf);
  ShiftDamping out;
  out.Gamma = 2.0 * om * p.g1 * f.gMf * f.omegaMf * (kh * f.omegaMf - om * om) / den;
  out.deltaOmega = om * om * p.g1 * f.gMf * f.omegaMf * (kh + f.omegaMf) / den;
  return out;
}

double cold_damping_occupation(const ColdDampingFilter& f, const ModelParams& p) {
  f.validate();
  if (!(f.gMf > 0.0)) throw ParameterError("feedback gain must be positive");
  if (!(p.g1 > 0.0)) throw ParameterError("readout coupling g1 must be positive");
  const double om = p.mech.omega_m;
  return p.g1 / (f.gMf * om) + f.gMf * om / (16.0 * p.g1 * f.etaDet) - 0.5;
}

std::optional<std::string> large_bandwidth_warning(const ColdDampingFilter& f,
                                                   const ModelParams& p) {
  const double om = p.mech.omega_m;
  const double ratio = std::min(f.omegaMf, p.kappa) / om;
  if (ratio >= 10.0) return std::nullopt;
  std::ostringstream os;
  os << "min(omega_mf, kappa) / Omega_m = " << ratio
     << " < 10; the large-bandwidth occupation formula is not reliable";
  return os.str();
}

double optimal_cold_damping_gain(double g1, double omegaM, double etaDet) {
  return 4.0 * std::sqrt(etaDet) * g1 / omegaM;
}

GenericFilter cold_damping_filter(const ColdDampingFilter& filter) {
  filter.validate();
  GenericFilter g;
  g.response = [filter](double w) { return filter.response(w); };
  g.etaDet = filter.etaDet;
  g.name = "cold_damping";
  return g;
}

FilterResponse generic_filter_response(const GenericFilter& f, const ModelParams& p,
                                       double omega) {
  require_resonant(p);
  if (!(f.etaDet > 0.0 && f.etaDet <= 1.0)) throw ParameterError("eta_det must lie in (0, 1]");
  if (omega == 0.0) throw ParameterError("damping rate is undefined at omega = 0");
  const Complex xi = f.response(omega);
  if (!std::isfinite(xi.real()) || !std::isfinite(xi.imag())) {
    throw ParameterError("filter response is not finite");
  }
  const Complex kernel = loop_kernel(f, p, omega);
  const Complex w(p.kappa / 2.0, -omega);
  FilterResponse r;
  r.deltaOmega = 0.5 * kernel.real();
  r.Gamma = -(p.mech.omega_m / omega) * kernel.imag();
  r.noise = p.kappa * p.g1 * p.g1 / (omega * omega + p.kappa * p.kappa / 4.0) +
            std::norm(xi) / (4.0 * p.kappa * f.etaDet) - p.g1 * (xi / w).imag();
  return r;
}

CoolingResult mbf_phonon_number(const GenericFilter& f, const ModelParams& p) {
  p.validate();
  const double om = p.mech.omega_m;
  const FilterResponse plus = generic_filter_response(f, p, om);
  const FilterResponse minus = generic_filter_response(f, p, -om);
  CoolingResult r;
  r.deltaOmega = plus.deltaOmega;
  r.Gamma = plus.Gamma;
  r.aPlus = minus.noise;
  r.aMinus = plus.noise;
  const double nth = p.n_th();
  const double total = p.mech.gamma_m + r.Gamma;
  r.stable = total > 0.0;
  r.nBar = r.stable ? (p.mech.gamma_m * nth + r.aPlus) / total
                    : std::numeric_limits<double>::quiet_NaN();
  r.cQu = nth > 0.0 ? 4.0 * p.g1 * p.g2 / (p.kappa * p.mech.gamma_m * nth)
                    : std::numeric_limits<double>::infinity();
  return r;
}

GenericFilter equivalence_filter(const ModelParams& p) {
  require_resonant(p);
  const double offset = std::remainder(p.phi - kPi / 2.0, kTwoPi);
  if (std::abs(offset) > kPhaseTolerance) {
    throw ParameterError("the equivalence filter requires phi = pi/2");
  }
  if (!(p.eta > 0.0)) throw ParameterError("the equivalence filter requires eta > 0");
  const double gain = -4.0 * p.g2 * std::sqrt(p.eta);
  const double kappa = p.kappa;
  const double tau = p.tau;
  GenericFilter g;
  g.response = [gain, kappa, tau](double w) {
    return gain * std::polar(1.0, w * tau) / Complex(1.0, -2.0 * w / kappa);
  };
  g.etaDet = p.eta;
  g.name = "coherent_equivalent";
  return g;
}

}  // namespace cfb
