#include "cfb/integration.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cfb/constants.hpp"
#include "cfb/errors.hpp"
#include "cfb/full_model.hpp"
#include "cfb/reduced_model.hpp"

namespace cfb {

namespace {

struct Piece {
  double value = 0.0;
  double error = 0.0;
};

template <class F>
Piece adaptive(F&& f, double a, double b, const IntegrationOptions& o) {
  using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
  Piece p;
  double l1 = 0.0;
  p.value = Quad::integrate(f, a, b, o.maxDepth, o.tolerance * 0.1, &p.error, &l1);
  return p;
}

double weight(double w, double omegaM) { return 1.0 + (w / omegaM) * (w / omegaM); }

PhononIntegral finish(double integralF, double integralG, double errF) {
  PhononIntegral r;
  r.nBar = 0.5 * (integralF / kPi - 1.0);
  r.nBarHighQ = integralG / kPi - 0.5;
  r.errorEstimate = 0.5 * errF / kPi;
  const double denom = std::max(std::abs(r.nBar + 0.5), 1e-300);
  r.relativeDifference = (r.nBarHighQ - r.nBar) / denom;
  return r;
}

}  // namespace

PhononIntegral integrate_phonons(const std::function<double(double)>& s,
                                 const MechanicalMode& mech, double center, double linewidth,
                                 const IntegrationOptions& o) {
  if (!(center > 0.0) || !(linewidth > 0.0)) {
    throw ParameterError("resonance center and linewidth must be positive");
  }
  const double om = mech.omega_m;
  const double edge = center + o.windowLinewidths * linewidth;

  std::vector<double> breaks{0.0};
  for (double k : {-o.windowLinewidths, -10.0, -2.0, -0.5, 0.5, 2.0, 10.0}) {
    const double b = center + k * linewidth;
    if (b > breaks.back()) breaks.push_back(b);
  }
  if (breaks.size() > 1 && breaks[1] > 0.0) {
    // Split the low-frequency region so each panel spans a comparable dynamic range.
    const double low = breaks[1];
    breaks.insert(breaks.begin() + 1, 0.5 * low);
  }
  breaks.push_back(edge);

  auto fWeighted = [&](double w) { return s(w) * weight(w, om); };
  double iF = 0.0, iG = 0.0, eF = 0.0, eG = 0.0;
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    const Piece pf = adaptive(fWeighted, breaks[i - 1], breaks[i], o);
    const Piece pg = adaptive(s, breaks[i - 1], breaks[i], o);
    iF += pf.value;
    iG += pg.value;
    eF += pf.error;
    eG += pg.error;
  }
  // Lorentzian tail above the window.
  const double sEdge = s(edge);
  iF += sEdge * weight(edge, om) * (edge - center);
  iG += sEdge * (edge - center);

  if (!(std::isfinite(iF) && std::isfinite(iG)) || eF > 10.0 * o.tolerance * std::abs(iF) ||
      eG > 10.0 * o.tolerance * std::abs(iG)) {
    std::ostringstream os;
    os << "phonon integral did not converge (error " << eF << " on " << iF << ")";
    throw NonConvergenceError(os.str());
  }
  return finish(iF, iG, eF);
}

PhononIntegral integrate_phonons(const Spectrum& spec, const MechanicalMode& mech) {
  if (spec.omega.size() != spec.values.size()) throw ParameterError("spectrum columns differ");
  FrequencyGrid check(spec.omega);  // validates ordering
  // The spectrum is even; only omega >= 0 is used.
  std::vector<double> w, s;
  for (std::size_t i = 0; i < spec.omega.size(); ++i) {
    if (spec.omega[i] >= 0.0) {
      w.push_back(spec.omega[i]);
      s.push_back(spec.values[i]);
    }
  }
  if (w.size() < 3) throw ParameterError("spectrum has too few non-negative frequencies");

  const auto it = std::max_element(s.begin(), s.end());
  const std::size_t ip = static_cast<std::size_t>(it - s.begin());
  if (ip == 0 || ip + 1 == s.size()) {
    throw NonConvergenceError("spectrum maximum lies on the grid boundary: resonance not covered");
  }
  std::size_t lo = ip, hi = ip;
  while (lo > 0 && s[lo - 1] >= 0.5 * *it) --lo;
  while (hi + 1 < s.size() && s[hi + 1] >= 0.5 * *it) ++hi;
  if (hi - lo + 1 < 3) {
    throw NonConvergenceError("resonance is covered by fewer than three samples per linewidth");
  }

  const double om = mech.omega_m;
  auto trapezoid = [&](std::size_t stride, bool weighted) {
    double acc = 0.0;
    std::size_t prev = 0;
    for (std::size_t i = stride; i < w.size(); i += stride) {
      const double a = weighted ? s[prev] * weight(w[prev], om) : s[prev];
      const double b = weighted ? s[i] * weight(w[i], om) : s[i];
      acc += 0.5 * (a + b) * (w[i] - w[prev]);
      prev = i;
    }
    return acc;
  };
  double iF = trapezoid(1, true);
  double iG = trapezoid(1, false);
  const double eF = std::abs(iF - trapezoid(2, true)) / 3.0;

  const double peak = w[ip];
  iF += s.front() * weight(w.front(), om) * (peak - w.front()) +
        s.back() * weight(w.back(), om) * (w.back() - peak);
  iG += s.front() * (peak - w.front()) + s.back() * (w.back() - peak);

  return finish(iF, iG, eF);
}

PhononIntegral integrate_full_model(const ModelParams& p, const IntegrationOptions& o) {
  const CoolingResult r = phonon_number(p);
  if (!r.stable) throw InstabilityError("gamma_m + Gamma_m <= 0: no steady state");
  auto s = [&p](double w) { return observable_density(p, Observable::XmSymmetrized, w); };
  return integrate_phonons(s, p.mech, p.mech.omega_m + r.deltaOmega, p.mech.gamma_m + r.Gamma,
                           o);
}

PhononIntegral integrate_reduced_model(const ModelParams& p, const IntegrationOptions& o) {
  const CoolingResult r = phonon_number(p);
  if (!r.stable) throw InstabilityError("gamma_m + Gamma_m <= 0: no steady state");
  auto s = [&p](double w) {
    return 0.5 * (lorentzian_density(p, w) + lorentzian_density(p, -w));
  };
  return integrate_phonons(s, p.mech, p.mech.omega_m + r.deltaOmega, p.mech.gamma_m + r.Gamma,
                           o);
}

}  // namespace cfb
