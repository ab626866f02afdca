#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cfb/constants.hpp"
#include "cfb/lorentzian_fit.hpp"
#include "cfb/params.hpp"

namespace cfb {

/// Balanced homodyne readout of the first cavity output.
struct HomodyneSetup {
  double lockAngle = kPi / 2.0;  // theta (rad); the calibration assumes pi/2
  double loAmplitude = 0.0;      // alpha_LO (sqrt(photons/s)), informational
  double d0 = 0.0;               // DC fringe amplitude D0 (detector units)
  double eta1 = 1.0;             // first-pass incoupling efficiency
};

/// Recorded single-sided spectrum. Frequencies in Hz, PSD in detector units^2 / Hz.
struct MeasuredSpectrum {
  std::vector<double> frequencyHz;
  std::vector<double> psd;
  std::map<std::string, std::string> metadata;

  void validate() const;
};

/// kappa [chi(0) chi(w) + chi*(0) chi*(-w)] with chi(w)^-1 = kappa/2 - i(Delta + w).
Complex cavity_transduction(double kappa, double detuning, double omega);
Complex cavity_transduction(const CavityMode& cavity, double omega);

struct CalibrationOptions {
  /// Restrict integration to +-N fitted linewidths (FWHM) around the peak. Empty: full grid.
  std::optional<double> windowLinewidths;
  /// Add the Lorentzian tails beyond the grid edges, S(edge) * |edge - peak|.
  bool tailCorrection = true;
};

struct CalibrationResult {
  double nBar = 0.0;
  double integral = 0.0;       // integral of the PSD over f >= 0 (units^2)
  double tailIntegral = 0.0;   // part of `integral` added by the tail correction
  double peakFrequencyHz = 0.0;
  double transduction = 0.0;   // |R| at the peak (s)
  bool valid = true;           // false when nBar < 0
  std::string message;
};

/// n = 4 / (D0^2 [eta1 g0 |R|]^2) * integral_0^inf S_DD df - 1/2, trapezoid rule.
/// A negative result is returned with valid = false rather than clamped.
CalibrationResult phonons_from_psd(const HomodyneSetup& setup, const MeasuredSpectrum& spectrum,
                                   double g0, double kappa, double detuning,
                                   const CalibrationOptions& options = {});

/// n = n_calib / A_calib * A_DD.
double phonons_from_area_ratio(double calibArea, double calibOccupation, double measuredArea);

/// Reference occupation n_th gamma_m / (gamma_m + Gamma_m) of a single-pass calibration run.
double calibration_occupation(double nTh, double gammaM, double GammaM);

/// Detector PSD 1/2 D0^2 [eta1 g0 |R|]^2 S_XX_sym built from the reduced Lorentzian spectrum.
MeasuredSpectrum synthesize_psd(const HomodyneSetup& setup, const ModelParams& params, double g0,
                                const std::vector<double>& frequencyHz);

/// Two delimited columns (frequency Hz, PSD); '#' lines may carry "key = value" metadata.
MeasuredSpectrum parse_measured_spectrum(std::istream& in);

/// Divides the PSD by the fitted flat background of `fit`.
MeasuredSpectrum normalize_to_background(const MeasuredSpectrum& spectrum,
                                         const LorentzianFit& fit);

}  // namespace cfb
