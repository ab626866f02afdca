#include "cfb/params.hpp"

#include <cmath>
#include <sstream>

#include "cfb/constants.hpp"
#include "cfb/errors.hpp"

namespace cfb {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ParameterError(what);
}

bool unit_interval(double x) { return std::isfinite(x) && x > 0.0 && x <= 1.0; }

}  // namespace

void MechanicalMode::validate() const {
  require(std::isfinite(omega_m) && omega_m > 0.0, "mechanical frequency must be positive");
  require(std::isfinite(gamma_m) && gamma_m > 0.0, "mechanical damping must be positive");
  require(std::isfinite(temperature) && temperature >= 0.0, "temperature must be nonnegative");
}

std::optional<std::string> MechanicalMode::quality_warning() const {
  if (quality_factor() >= 10.0) return std::nullopt;
  std::ostringstream os;
  os << "mechanical Q = " << quality_factor()
     << " < 10; the reduced model assumes gamma_m << Omega_m";
  return os.str();
}

void CavityMode::validate() const {
  require(std::isfinite(kappa) && kappa > 0.0, "cavity linewidth must be positive");
  require(std::isfinite(detuning), "detuning must be finite");
  require(std::isfinite(g0) && g0 >= 0.0, "bare coupling must be nonnegative");
  require(std::isfinite(omega_L) && omega_L > 0.0, "laser frequency must be positive");
}

void LossBudget::validate() const {
  require(unit_interval(eta1), "eta1 must lie in (0, 1]");
  require(unit_interval(eta2), "eta2 must lie in (0, 1]");
  require(unit_interval(etaT), "etaT must lie in (0, 1]");
  require(unit_interval(etaAux), "etaAux must lie in (0, 1]");
}

double DriveConfig::aux_power(const LossBudget& losses) const {
  if (pAuxMeasured == 0.0) return 0.0;
  const double transfer = (1.0 - losses.etaAux) * losses.etaT;
  if (transfer <= 0.0) {
    throw ParameterError("auxiliary power requires etaAux < 1");
  }
  return pAuxMeasured / transfer;
}

void SystemParams::validate() const {
  mech.validate();
  cavity.validate();
  losses.validate();
  require(std::isfinite(drive.p1) && drive.p1 >= 0.0, "p1 must be nonnegative");
  require(std::isfinite(drive.pAuxMeasured) && drive.pAuxMeasured >= 0.0,
          "auxiliary power must be nonnegative");
  require(std::isfinite(drive.auxLockPhase), "lock phase must be finite");
  require(std::isfinite(loop.tau) && loop.tau >= 0.0, "loop delay must be nonnegative");
  require(std::isfinite(loop.phi), "loop phase must be finite");
}

double ModelParams::n_th() const { return thermal_occupation(mech); }

void ModelParams::validate() const {
  mech.validate();
  require(std::isfinite(kappa) && kappa > 0.0, "cavity linewidth must be positive");
  require(std::isfinite(detuning), "detuning must be finite");
  require(std::isfinite(g1) && g1 >= 0.0, "g1 must be nonnegative");
  require(std::isfinite(g2) && g2 >= 0.0, "g2 must be nonnegative");
  require(std::isfinite(eta) && eta >= 0.0 && eta <= 1.0, "eta must lie in [0, 1]");
  require(std::isfinite(phi), "loop phase must be finite");
  require(std::isfinite(tau) && tau >= 0.0, "loop delay must be nonnegative");
}

double bose_occupation(double omega, double temperature) {
  if (temperature <= 0.0) return 0.0;
  const double x = kHbar * omega / (kBoltzmann * temperature);
  return 1.0 / std::expm1(x);
}

double thermal_occupation(const MechanicalMode& mech) {
  return bose_occupation(mech.omega_m, mech.temperature);
}

double thermal_spectrum(const MechanicalMode& mech, double omega) {
  const double w = std::abs(omega);
  if (w == 0.0) {
    // |w| n_B(|w|) -> k_B T / hbar as w -> 0
    return mech.temperature > 0.0
               ? mech.gamma_m * kBoltzmann * mech.temperature / (kHbar * mech.omega_m)
               : 0.0;
  }
  const double step = omega > 0.0 ? 1.0 : 0.0;
  return mech.gamma_m * (w / mech.omega_m) * (bose_occupation(w, mech.temperature) + step);
}

MeanFields mean_fields(const SystemParams& p) {
  p.validate();
  const auto& c = p.cavity;
  const auto& l = p.losses;
  const double eta = l.total();
  const double kappa = c.kappa;
  const Complex denom(kappa / 2.0, -c.detuning);  // kappa/2 - i Delta
  const Complex numer(kappa / 2.0, c.detuning);   // kappa/2 + i Delta

  const double photonEnergy = kHbar * c.omega_L;
  const double a1Physical = std::sqrt(p.drive.p1 / photonEnergy);
  const double auxPhysicalMag = std::sqrt(p.drive.aux_power(l) / photonEnergy);

  MeanFields m;
  m.alpha1In = Complex(std::sqrt(l.eta1) * a1Physical, 0.0);
  m.alpha1Out = m.alpha1In * (-numer) / denom;

  const double refPhase = std::arg(m.alpha1Out);
  const Complex auxPhysical =
      std::polar(auxPhysicalMag, refPhase + p.drive.auxLockPhase + p.loop.lockOffset);

  // sqrt(1 - eta) * alpha_aux, written without the division so eta = 1 is regular.
  const Complex scaledAux =
      (1.0 - l.eta1) * std::sqrt(l.eta2 * l.etaT * l.etaAux) * a1Physical +
      std::sqrt(l.eta2 * l.etaT * (1.0 - l.etaAux)) * auxPhysical;
  m.alphaAux = eta < 1.0 ? scaledAux / std::sqrt(1.0 - eta) : Complex(0.0, 0.0);

  m.alpha1 = -std::sqrt(kappa) * m.alpha1In / denom;
  m.alpha2 = (std::sqrt(eta * kappa) * (numer / denom) * m.alpha1In -
              std::sqrt(kappa) * scaledAux) /
             denom;

  m.g1 = c.g0 * std::abs(m.alpha1);
  m.g2 = c.g0 * std::abs(m.alpha2);
  m.deltaX = std::sqrt(2.0) * (c.g0 / p.mech.omega_m) *
             (std::norm(m.alpha1) + std::norm(m.alpha2));
  m.phi = std::abs(m.alpha2) > 0.0 ? std::arg(m.alpha1 / m.alpha2) : 0.0;
  return m;
}

ModelParams resolve(const SystemParams& p) {
  const MeanFields m = mean_fields(p);
  ModelParams out;
  out.mech = p.mech;
  out.kappa = p.cavity.kappa;
  out.detuning = p.cavity.detuning;
  out.g1 = m.g1;
  out.g2 = m.g2;
  out.eta = p.losses.total();
  out.phi = p.loop.mode == PhaseMode::Direct ? p.loop.phi : m.phi;
  out.tau = p.loop.tau;
  return out;
}

ModelParams resolve(const SystemParams& p, const CouplingOverride& couplings) {
  ModelParams out = resolve(p);
  if (couplings.g1) out.g1 = *couplings.g1;
  if (couplings.g2) out.g2 = *couplings.g2;
  out.validate();
  return out;
}

}  // namespace cfb
