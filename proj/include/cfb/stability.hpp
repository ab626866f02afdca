#pragma once

#include <functional>

#include "cfb/params.hpp"

namespace cfb {

struct StabilityReport {
  bool stable = false;
  double margin = 0.0;         // gamma_m + Gamma_m(Omega_m) (rad/s)
  double shiftedMargin = 0.0;  // gamma_m + Gamma_m(Omega_m + deltaOmega_m)
  bool shiftedStable = false;
};

/// Reduced-model stability: stable iff gamma_m + Gamma_m(Omega_m) > 0.
StabilityReport stability_check(const ModelParams& params);

/// Locates a sign change of the margin of `family(x)` in [lo, hi] by bisection.
/// Throws ParameterError when the margin has the same sign at both ends.
double stability_boundary(const std::function<ModelParams(double)>& family, double lo, double hi,
                          double tolerance = 1e-6);

}  // namespace cfb
