#include "cfb/reduced_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cfb/errors.hpp"

namespace cfb {

namespace {

constexpr double kIdentityTolerance = 1e-9;

double sum_sq(const ModelParams& p) { return p.g1 * p.g1 + p.g2 * p.g2; }

double loop_strength(const ModelParams& p) { return p.g1 * p.g2 * std::sqrt(p.eta) * p.kappa; }

// Complex kernel whose real part gives the shift and whose imaginary part gives the damping.
//   K(w) = 2 Delta G / D - 2 e^{i w tau} g1 g2 sqrt(eta) kappa Br / D^2
// with w~ = kappa/2 - i w, D = Delta^2 + w~^2, Br = 2 Delta w~ cos(phi) - (Delta^2 - w~^2) sin(phi).
Complex response_kernel(const ModelParams& p, double omega) {
  const Complex w(p.kappa / 2.0, -omega);
  const double d = p.detuning;
  const Complex den = d * d + w * w;
  const Complex br = 2.0 * d * w * std::cos(p.phi) - (d * d - w * w) * std::sin(p.phi);
  const Complex delay = std::polar(1.0, omega * p.tau);
  return 2.0 * d * sum_sq(p) / den - 2.0 * delay * loop_strength(p) * br / (den * den);
}

// Delta kappa cos(phi) - (Delta^2 - kappa^2/4) sin(phi)
double unresolved_bracket(const ModelParams& p) {
  const double d = p.detuning;
  const double k = p.kappa;
  return d * k * std::cos(p.phi) - (d * d - k * k / 4.0) * std::sin(p.phi);
}

double cavity_denominator(const ModelParams& p) {
  return p.detuning * p.detuning + p.kappa * p.kappa / 4.0;
}

}  // namespace

double feedback_noise_spectrum(const ModelParams& p, double omega) {
  const double k = p.kappa;
  const double dw = p.detuning + omega;
  const double den = k * k / 4.0 + dw * dw;
  const double ph = p.phi + omega * p.tau;
  const double interference = (dw * dw - k * k / 4.0) * std::cos(ph) + k * dw * std::sin(ph);
  return k * sum_sq(p) / den +
         2.0 * k * p.g1 * p.g2 * std::sqrt(p.eta) * interference / (den * den);
}

ShiftDamping damping_and_shift(const ModelParams& p, double omega) {
  if (omega == 0.0) throw ParameterError("damping rate is undefined at omega = 0");
  const Complex kernel = response_kernel(p, omega);
  ShiftDamping out;
  out.deltaOmega = kernel.real();
  out.Gamma = -2.0 * (p.mech.omega_m / omega) * kernel.imag();
  return out;
}

SidebandRates sideband_rates(const ModelParams& p) {
  const double om = p.mech.omega_m;
  SidebandRates r;
  r.aPlus = feedback_noise_spectrum(p, -om);
  r.aMinus = feedback_noise_spectrum(p, om);
  const double gamma = damping_and_shift(p, om).Gamma;
  const double scale = std::max({std::abs(r.aPlus), std::abs(r.aMinus),
                                 std::numeric_limits<double>::min()});
  if (std::abs((r.aMinus - r.aPlus) - gamma) > kIdentityTolerance * scale) {
    throw std::logic_error("sideband rates are inconsistent with the damping rate");
  }
  return r;
}

CoolingResult phonon_number(const ModelParams& p, Evaluation where) {
  p.validate();
  const double om = p.mech.omega_m;
  const double nth = p.n_th();

  CoolingResult r;
  double omegaEval = om;
  if (where == Evaluation::BareFrequency) {
    const SidebandRates rates = sideband_rates(p);
    r.aPlus = rates.aPlus;
    r.aMinus = rates.aMinus;
    const ShiftDamping sd = damping_and_shift(p, om);
    r.deltaOmega = sd.deltaOmega;
    r.Gamma = sd.Gamma;
  } else {
    omegaEval = om + damping_and_shift(p, om).deltaOmega;
    const ShiftDamping sd = damping_and_shift(p, omegaEval);
    r.deltaOmega = sd.deltaOmega;
    r.Gamma = sd.Gamma;
    r.aPlus = feedback_noise_spectrum(p, -omegaEval);
    r.aMinus = feedback_noise_spectrum(p, omegaEval);
  }

  const double total = p.mech.gamma_m + r.Gamma;
  r.stable = total > 0.0;
  r.nBar = r.stable ? (p.mech.gamma_m * nth + r.aPlus) / total
                    : std::numeric_limits<double>::quiet_NaN();
  r.cQu = nth > 0.0 ? 4.0 * p.g1 * p.g2 / (p.kappa * p.mech.gamma_m * nth)
                    : std::numeric_limits<double>::infinity();
  return r;
}

double cooling_limit(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw ParameterError("cooling limit needs 0 < eta <= 1");
  const double s = std::sqrt(eta);
  return (1.0 - s) / (2.0 * s);
}

CoolingResult dba_baseline(const ModelParams& p) {
  if (p.detuning == 0.0) throw ParameterError("no dynamical backaction cooling at zero detuning");
  ModelParams q = p;
  q.eta = 0.0;
  return phonon_number(q);
}

ShiftDamping dba_unresolved(const ModelParams& p) {
  const double z = cavity_denominator(p);
  ShiftDamping out;
  out.deltaOmega = 2.0 * p.detuning * sum_sq(p) / z;
  out.Gamma = -4.0 * p.detuning * p.kappa * p.mech.omega_m * sum_sq(p) / (z * z);
  return out;
}

double dba_occupation(double detuning, double kappa, double omegaM) {
  if (detuning == 0.0) throw ParameterError("no dynamical backaction cooling at zero detuning");
  return (detuning * detuning + kappa * kappa / 4.0) / (4.0 * std::abs(detuning) * omegaM) - 0.5;
}

double dba_limit(double kappa, double omegaM) { return kappa / (4.0 * omegaM); }

ShiftDamping unresolved_damping_and_shift(const ModelParams& p) {
  const double z = cavity_denominator(p);
  const double wt = p.mech.omega_m * p.tau;
  const double loop = loop_strength(p) * unresolved_bracket(p) / (z * z);
  ShiftDamping out;
  out.deltaOmega = 2.0 * p.detuning * sum_sq(p) / z - 2.0 * std::cos(wt) * loop;
  out.Gamma = 4.0 * std::sin(wt) * loop;
  return out;
}

double unresolved_noise_spectrum(const ModelParams& p, double omega) {
  const double k = p.kappa;
  const double d = p.detuning;
  const double z = cavity_denominator(p);
  const double ph = p.phi + omega * p.tau;
  const double interference = (d * d - k * k / 4.0) * std::cos(ph) + k * d * std::sin(ph);
  return k * sum_sq(p) / z + 2.0 * k * p.g1 * p.g2 * std::sqrt(p.eta) * interference / (z * z);
}

double unresolved_phonon_number(const ModelParams& p) {
  const double k = p.kappa;
  const double d = p.detuning;
  const double z = cavity_denominator(p);
  const double wt = p.mech.omega_m * p.tau;
  const double gamma = unresolved_damping_and_shift(p).Gamma;
  const double numer = k * d * std::sin(p.phi) + (d * d - k * k / 4.0) * std::cos(p.phi);
  return k * sum_sq(p) / (gamma * z) +
         0.5 * (std::cos(wt) / std::sin(wt)) * numer / unresolved_bracket(p) - 0.5;
}

namespace {

struct LorentzianShape {
  double center;
  double halfWidth;
  double weightPlus;   // S_th(Omega_m) + S_fb(Omega_m)
  double weightMinus;  // S_th(-Omega_m) + S_fb(-Omega_m)
};

LorentzianShape lorentzian_shape(const ModelParams& p) {
  const double om = p.mech.omega_m;
  const ShiftDamping sd = damping_and_shift(p, om);
  const double total = p.mech.gamma_m + sd.Gamma;
  if (!(total > 0.0)) throw InstabilityError("gamma_m + Gamma_m <= 0: no steady state");
  LorentzianShape s;
  s.center = om + sd.deltaOmega;
  s.halfWidth = total / 2.0;
  s.weightPlus = thermal_spectrum(p.mech, om) + feedback_noise_spectrum(p, om);
  s.weightMinus = thermal_spectrum(p.mech, -om) + feedback_noise_spectrum(p, -om);
  return s;
}

double evaluate(const LorentzianShape& s, double omega) {
  const double h2 = s.halfWidth * s.halfWidth;
  const double up = s.center - omega;
  const double down = s.center + omega;
  return 0.5 * s.weightPlus / (up * up + h2) + 0.5 * s.weightMinus / (down * down + h2);
}

}  // namespace

double lorentzian_density(const ModelParams& p, double omega) {
  return evaluate(lorentzian_shape(p), omega);
}

Spectrum lorentzian_spectrum(const ModelParams& p, const FrequencyGrid& grid) {
  p.validate();
  const LorentzianShape s = lorentzian_shape(p);
  Spectrum out;
  out.omega = grid.omega();
  out.values.reserve(grid.size());
  for (double w : grid.omega()) out.values.push_back(evaluate(s, w));
  out.observable = "X_m";
  out.model = "reduced";
  return out;
}

double lorentzian_area(const ModelParams& p) {
  const LorentzianShape s = lorentzian_shape(p);
  // Each term integrates to weight * pi / halfWidth / 2 over d omega; divide by 2 pi.
  return (s.weightPlus + s.weightMinus) / (4.0 * s.halfWidth);
}

}  // namespace cfb
