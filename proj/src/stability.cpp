#include "cfb/stability.hpp"

#include <boost/math/tools/roots.hpp>

#include "cfb/errors.hpp"
#include "cfb/reduced_model.hpp"

namespace cfb {

StabilityReport stability_check(const ModelParams& p) {
  p.validate();
  const double om = p.mech.omega_m;
  const ShiftDamping bare = damping_and_shift(p, om);
  StabilityReport r;
  r.margin = p.mech.gamma_m + bare.Gamma;
  r.stable = r.margin > 0.0;
  const double shifted = om + bare.deltaOmega;
  if (shifted > 0.0) {
    r.shiftedMargin = p.mech.gamma_m + damping_and_shift(p, shifted).Gamma;
    r.shiftedStable = r.shiftedMargin > 0.0;
  }
  return r;
}

double stability_boundary(const std::function<ModelParams(double)>& family, double lo, double hi,
                          double tolerance) {
  auto margin = [&](double x) { return stability_check(family(x)).margin; };
  const double mLo = margin(lo);
  const double mHi = margin(hi);
  if ((mLo > 0.0) == (mHi > 0.0)) {
    throw ParameterError("stability margin does not change sign on the interval");
  }
  auto done = [tolerance](double a, double b) { return std::abs(b - a) <= tolerance; };
  const auto bracket = boost::math::tools::bisect(margin, lo, hi, done);
  return 0.5 * (bracket.first + bracket.second);
}

}  // namespace cfb
