#pragma once

#include <vector>

namespace cfb {

/// y = offset + amplitude / (1 + ((x - center) / halfWidth)^2)
struct LorentzianFit {
  double offset = 0.0;
  double amplitude = 0.0;
  double center = 0.0;
  double halfWidth = 0.0;
  double residualNorm = 0.0;  // RMS residual in units of the data maximum
  int iterations = 0;
  bool converged = false;

  double operator()(double x) const;
  /// Integral of the peak (offset excluded) over x.
  double peak_area() const;
};

/// Least-squares fit with offset, amplitude, center and width. Initial guesses come from
/// the largest sample and its half-maximum crossings. Requires at least 5 points.
LorentzianFit fit_lorentzian(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cfb
