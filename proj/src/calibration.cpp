#include "cfb/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>

#include "cfb/errors.hpp"
#include "cfb/reduced_model.hpp"

namespace cfb {

namespace {

Complex susceptibility(double kappa, double detuning, double omega) {
  return 1.0 / Complex(kappa / 2.0, -(detuning + omega));
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void MeasuredSpectrum::validate() const {
  if (frequencyHz.size() != psd.size()) throw ParameterError("spectrum columns differ in length");
  if (frequencyHz.size() < 2) throw ParameterError("spectrum needs at least two samples");
  for (std::size_t i = 0; i < psd.size(); ++i) {
    if (!std::isfinite(frequencyHz[i]) || !std::isfinite(psd[i])) {
      throw ParameterError("spectrum contains non-finite values");
    }
    if (psd[i] < 0.0) throw ParameterError("spectrum contains negative PSD values");
    if (i > 0 && !(frequencyHz[i] > frequencyHz[i - 1])) {
      throw ParameterError("spectrum frequencies must be strictly increasing");
    }
  }
}

Complex cavity_transduction(double kappa, double detuning, double omega) {
  const Complex c0 = susceptibility(kappa, detuning, 0.0);
  const Complex cw = susceptibility(kappa, detuning, omega);
  const Complex cm = susceptibility(kappa, detuning, -omega);
  return kappa * (c0 * cw + std::conj(c0) * std::conj(cm));
}

Complex cavity_transduction(const CavityMode& cavity, double omega) {
  return cavity_transduction(cavity.kappa, cavity.detuning, omega);
}

CalibrationResult phonons_from_psd(const HomodyneSetup& setup, const MeasuredSpectrum& spectrum,
                                   double g0, double kappa, double detuning,
                                   const CalibrationOptions& options) {
  spectrum.validate();
  if (!(setup.d0 > 0.0)) throw ParameterError("D0 must be positive");
  if (!(setup.eta1 > 0.0 && setup.eta1 <= 1.0)) throw ParameterError("eta1 must lie in (0, 1]");
  if (!(g0 > 0.0)) throw ParameterError("g0 must be positive");

  // Single-sided part of the record.
  std::vector<double> f;
  std::vector<double> s;
  for (std::size_t i = 0; i < spectrum.frequencyHz.size(); ++i) {
    if (spectrum.frequencyHz[i] >= 0.0) {
      f.push_back(spectrum.frequencyHz[i]);
      s.push_back(spectrum.psd[i]);
    }
  }
  if (f.size() < 2) throw ParameterError("spectrum has fewer than two non-negative frequencies");

  const auto peakIt = std::max_element(s.begin(), s.end());
  double peak = f[static_cast<std::size_t>(peakIt - s.begin())];

  if (options.windowLinewidths) {
    const LorentzianFit fit = fit_lorentzian(f, s);
    peak = fit.center;
    const double half = *options.windowLinewidths * 2.0 * fit.halfWidth;
    std::vector<double> wf;
    std::vector<double> ws;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (std::abs(f[i] - fit.center) <= half) {
        wf.push_back(f[i]);
        ws.push_back(s[i]);
      }
    }
    if (wf.size() < 2) throw ParameterError("integration window holds fewer than two samples");
    f.swap(wf);
    s.swap(ws);
  }

  CalibrationResult r;
  double area = 0.0;
  for (std::size_t i = 1; i < f.size(); ++i) area += 0.5 * (s[i] + s[i - 1]) * (f[i] - f[i - 1]);

  if (options.tailCorrection && *peakIt > 0.0 && peak > f.front() && peak < f.back()) {
    r.tailIntegral = s.front() * (peak - f.front()) + s.back() * (f.back() - peak);
    area += r.tailIntegral;
  }

  r.integral = area;
  r.peakFrequencyHz = peak;
  r.transduction = std::abs(cavity_transduction(kappa, detuning, hz_to_rad(peak)));
  const double scale = setup.d0 * setup.eta1 * g0 * r.transduction;
  r.nBar = 4.0 * area / (scale * scale) - 0.5;
  if (r.nBar < 0.0) {
    r.valid = false;
    r.message = "negative occupation: calibration is inconsistent with the recorded spectrum";
  }
  return r;
}

double phonons_from_area_ratio(double calibArea, double calibOccupation, double measuredArea) {
  if (!(calibArea > 0.0)) throw ParameterError("calibration area must be positive");
  return calibOccupation / calibArea * measuredArea;
}

double calibration_occupation(double nTh, double gammaM, double GammaM) {
  if (!(gammaM + GammaM > 0.0)) throw InstabilityError("calibration run is unstable");
  return nTh * gammaM / (gammaM + GammaM);
}

MeasuredSpectrum synthesize_psd(const HomodyneSetup& setup, const ModelParams& params, double g0,
                                const std::vector<double>& frequencyHz) {
  MeasuredSpectrum out;
  out.frequencyHz = frequencyHz;
  out.psd.reserve(frequencyHz.size());
  for (double fHz : frequencyHz) {
    const double w = hz_to_rad(fHz);
    const double sxx = 0.5 * (lorentzian_density(params, w) + lorentzian_density(params, -w));
    const double gain =
        setup.d0 * setup.eta1 * g0 * std::abs(cavity_transduction(params.kappa, params.detuning, w));
    out.psd.push_back(0.5 * gain * gain * sxx);
  }
  return out;
}

MeasuredSpectrum parse_measured_spectrum(std::istream& in) {
  MeasuredSpectrum out;
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const std::string body = trim(t.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string::npos) {
        out.metadata[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
      }
      continue;
    }
    std::string norm = t;
    std::replace(norm.begin(), norm.end(), ',', ' ');
    std::replace(norm.begin(), norm.end(), ';', ' ');
    std::replace(norm.begin(), norm.end(), '\t', ' ');
    std::istringstream row(norm);
    double f = 0.0;
    double p = 0.0;
    std::string extra;
    if (!(row >> f >> p) || (row >> extra)) {
      std::ostringstream os;
      os << "spectrum line " << lineNo << ": expected two numeric columns";
      throw ParameterError(os.str());
    }
    out.frequencyHz.push_back(f);
    out.psd.push_back(p);
  }
  out.validate();
  return out;
}

MeasuredSpectrum normalize_to_background(const MeasuredSpectrum& spectrum,
                                         const LorentzianFit& fit) {
  if (!(fit.offset > 0.0)) throw ParameterError("fitted background must be positive");
  MeasuredSpectrum out = spectrum;
  for (double& v : out.psd) v /= fit.offset;
  return out;
}

}  // namespace cfb
