#pragma once

#include <functional>

#include "cfb/params.hpp"
#include "cfb/spectrum.hpp"

namespace cfb {

struct PhononIntegral {
  double nBar = 0.0;             // from 2n+1 = int S (1 + w^2/Omega^2) dw/2pi
  double nBarHighQ = 0.0;        // from n + 1/2 = int S dw/2pi
  double relativeDifference = 0.0;
  double errorEstimate = 0.0;    // absolute, on nBar
};

struct IntegrationOptions {
  double tolerance = 1e-6;       // relative
  double windowLinewidths = 50.0;
  unsigned maxDepth = 20;
};

/// Integrates an even (symmetrized) displacement spectrum with a resonance at +-center of
/// full width `linewidth`. The window +-windowLinewidths around the peak and the region
/// below it are integrated adaptively; the tail above the window is closed with the
/// Lorentzian estimate S(edge) * (edge - center). Throws NonConvergenceError when the
/// quadrature error exceeds the tolerance.
PhononIntegral integrate_phonons(const std::function<double(double)>& symmetrized,
                                 const MechanicalMode& mech, double center, double linewidth,
                                 const IntegrationOptions& options = {});

/// Trapezoid version for a sampled symmetrized spectrum on omega >= 0 or a full grid.
/// Throws NonConvergenceError when the maximum sits on a grid edge or the peak is
/// covered by fewer than three samples per linewidth.
PhononIntegral integrate_phonons(const Spectrum& symmetrized, const MechanicalMode& mech);

/// Integral of the full-model symmetrized S_XX, using the reduced model to place the window.
PhononIntegral integrate_full_model(const ModelParams& params,
                                    const IntegrationOptions& options = {});

/// Integral of the reduced-model Lorentzian spectrum.
PhononIntegral integrate_reduced_model(const ModelParams& params,
                                       const IntegrationOptions& options = {});

}  // namespace cfb
