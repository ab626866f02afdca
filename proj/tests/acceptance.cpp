// Acceptance run: one line per criterion, exit status 1 when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cfb/calibration.hpp"
#include "cfb/cli.hpp"
#include "cfb/config.hpp"
#include "cfb/measurement_feedback.hpp"
#include "cfb/optimize.hpp"
#include "cfb/reduced_model.hpp"
#include "cfb/regimes.hpp"
#include "cfb/stability.hpp"
#include "cfb/sweep.hpp"

using namespace cfb;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> info;
};

struct Criterion {
  int id;
  const char* name;
  double budgetSeconds;
  std::function<Outcome()> check;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

std::string preset(const std::string& name) { return std::string(CFB_PRESET_DIR) + "/" + name; }

ModelParams resolved(const ScenarioConfig& c) { return resolve(c.params, c.couplings); }

// --- 1 ---------------------------------------------------------------------

Outcome backaction_limit() {
  std::ostringstream out, err;
  const int code = cli::run({"--config", preset("membrane.ini"), "limits"}, out, err);
  Outcome o;
  if (code != 0) {
    o.detail = "limits exited with " + std::to_string(code) + ": " + err.str();
    return o;
  }
  double n = std::nan("");
  std::istringstream in(out.str());
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("n_dba_limit,", 0) == 0) n = std::stod(line.substr(12));
  }
  o.pass = std::abs(n - 7.24) <= 0.01;
  o.detail = fmt("n_dba = kappa/(4 Omega_m) = %.6f, required 7.24 +- 0.01", n);
  return o;
}

// --- 2 ---------------------------------------------------------------------

Outcome feedback_limit() {
  const double at1 = cooling_limit(1.0);
  const double at022 = cooling_limit(0.22);

  const ScenarioConfig c = load_config(preset("membrane.ini"));
  OptimizationProblem prob;
  prob.base = resolved(c);
  prob.base.detuning = 0.0;
  prob.base.mech.temperature = 0.0;  // n_th = 0 stands in for C_qu -> infinity
  prob.base.eta = 0.22;
  prob.base.g1 = hz_to_rad(2e5);
  prob.base.g2 = hz_to_rad(2e5);
  prob.variables = {{FreeVariable::Phi, 0.0, kTwoPi},
                    {FreeVariable::OmegaTau, 0.0, kTwoPi},
                    {FreeVariable::G2OverG1, 0.1, 10.0}};
  const OptimizationResult r = optimize(prob);
  const double gap = r.result.nBar / at022 - 1.0;

  Outcome o;
  o.pass = at1 == 0.0 && std::abs(at022 - 0.566) <= 0.001 && std::abs(gap) <= 0.01;
  o.detail = fmt("limit(1) = %g, limit(0.22) = %.6f; optimizer n = %.6f (%+.3f%% of bound), "
                 "converged = %d",
                 at1, at022, r.result.nBar, 100.0 * gap, r.converged ? 1 : 0);
  return o;
}

// --- 3 ---------------------------------------------------------------------

Outcome unresolved_consistency() {
  ModelParams base = resolved(load_config(preset("membrane.ini")));
  base.detuning = 0.0;
  const double bound = 3.0 * base.mech.omega_m / base.kappa;

  std::vector<ShiftDamping> general, limit;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      ModelParams m = base;
      m.phi = kTwoPi * i / 20.0;
      m.tau = kTwoPi * j / 20.0 / m.mech.omega_m;
      general.push_back(damping_and_shift(m, m.mech.omega_m));
      limit.push_back(unresolved_damping_and_shift(m));
    }
  }
  // Error relative to the largest magnitude each quantity reaches on the grid.
  double gScale = 0.0, sScale = 0.0;
  for (const auto& g : general) {
    gScale = std::max(gScale, std::abs(g.Gamma));
    sScale = std::max(sScale, std::abs(g.deltaOmega));
  }
  double gErr = 0.0, sErr = 0.0;
  for (std::size_t k = 0; k < general.size(); ++k) {
    gErr = std::max(gErr, std::abs(general[k].Gamma - limit[k].Gamma) / gScale);
    sErr = std::max(sErr, std::abs(general[k].deltaOmega - limit[k].deltaOmega) / sScale);
  }
  Outcome o;
  o.pass = gErr <= bound && sErr <= bound;
  o.detail = fmt("max relative error Gamma %.4f, shift %.4f; bound 3 Omega_m/kappa = %.4f", gErr,
                 sErr, bound);
  const double lag = 2.0 * std::atan(2.0 * base.mech.omega_m / base.kappa);
  o.info.push_back(fmt("cavity phase lag 2 atan(2 Omega_m/kappa) = %.4f rad, the leading size of "
                       "the discrepancy",
                       lag));
  return o;
}

// --- 4 ---------------------------------------------------------------------

Outcome full_model_equivalence() {
  const ModelParams m = resolved(load_config(preset("phase_scan.ini")));
  const FullModelPoint full = evaluate_full_model(m);
  const CoolingResult red = phonon_number(m);
  const double dG = std::abs(full.result.Gamma / red.Gamma - 1.0);
  const double dS = std::abs(full.result.deltaOmega / red.deltaOmega - 1.0);
  const double dN = std::abs(full.result.nBar / red.nBar - 1.0);
  Outcome o;
  o.pass = dG <= 0.02 && dS <= 0.02 && dN <= 0.02;
  o.detail = fmt("Gamma %.2f vs %.2f Hz, shift %.2f vs %.2f Hz, n %.3f vs %.3f; "
                 "max deviation %.3f%% (limit 2%%)",
                 rad_to_hz(full.result.Gamma), rad_to_hz(red.Gamma),
                 rad_to_hz(full.result.deltaOmega), rad_to_hz(red.deltaOmega), full.result.nBar,
                 red.nBar, 100.0 * std::max({dG, dS, dN}));
  return o;
}

// --- 5 ---------------------------------------------------------------------

Outcome sideband_identity() {
  std::mt19937_64 rng(20240501);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    ModelParams m;
    m.mech.omega_m = hz_to_rad(1.9e6);
    m.mech.gamma_m = m.mech.omega_m / 3.2e6;
    m.mech.temperature = 20.0;
    m.kappa = m.mech.omega_m * std::pow(10.0, -2.0 + 4.0 * u(rng));
    m.detuning = m.kappa * (-2.0 + 4.0 * u(rng));
    m.g1 = m.kappa * 0.1 * u(rng);
    m.g2 = m.kappa * 0.1 * u(rng);
    m.eta = u(rng);
    m.phi = kTwoPi * u(rng);
    m.tau = kTwoPi * 3.0 * u(rng) / m.mech.omega_m;
    const double om = m.mech.omega_m;
    const double up = feedback_noise_spectrum(m, om);
    const double down = feedback_noise_spectrum(m, -om);
    const double gamma = damping_and_shift(m, om).Gamma;
    const double scale = std::max({std::abs(up), std::abs(down), std::abs(gamma)});
    worst = std::max(worst, std::abs(up - down - gamma) / scale);
  }
  Outcome o;
  o.pass = worst <= 1e-9;
  o.detail = fmt("max relative residual %.2e over 1000 draws (limit 1e-9)", worst);
  return o;
}

// --- 6 ---------------------------------------------------------------------

Outcome delay_scan() {
  const ScenarioConfig c = load_config(preset("delay_scan.ini"));
  const std::vector<SweepRow> rows = sweep(*c.sweep);
  std::vector<const SweepRow*> at;
  for (const auto& r : rows) {
    if (std::abs(r.value + 0.57) < 1e-9) at.push_back(&r);
  }
  Outcome o;
  if (at.size() != c.sweep->seriesValues.size()) {
    o.detail = "detuning -0.57 is not on the sweep grid";
    return o;
  }
  const SweepRow* longest = nullptr;
  const SweepRow* shortest = nullptr;
  double smallestContribution = INFINITY;
  const SweepRow* smallest = nullptr;
  for (const SweepRow* r : at) {
    if (std::abs(r->series - 1.55) < 1e-12) longest = r;
    if (std::abs(r->series - 0.07) < 1e-12) shortest = r;
    const double contribution = std::abs(r->result.Gamma - r->withoutLoop.Gamma);
    if (contribution < smallestContribution) {
      smallestContribution = contribution;
      smallest = r;
    }
    o.info.push_back(fmt("Omega_m tau = %.2f pi: Gamma %.2f Hz, without loop %.2f Hz, "
                         "|Gamma - Gamma_dyn| %.2f Hz",
                         r->series, rad_to_hz(r->result.Gamma), rad_to_hz(r->withoutLoop.Gamma),
                         rad_to_hz(contribution)));
  }
  const double ratio = longest->result.Gamma / longest->singlePass.Gamma;
  const bool enhanced = ratio > 3.0;
  const bool shortSmallest = smallest == shortest;
  o.pass = enhanced && shortSmallest;
  o.detail = fmt("Gamma(1.55 pi) / Gamma_single = %.3f (required > 3); smallest feedback "
                 "contribution at %.2f pi (required 0.07 pi)",
                 ratio, smallest->series);

  // Same point with the opposite sign convention for the lock-derived loop phase.
  ModelParams m = resolve(apply_axis(apply_axis(c.params, SweepAxis::OmegaTauOverPi, 1.55),
                                     SweepAxis::DetuningOverKappa, -0.57),
                          c.couplings);
  m.phi = -m.phi;
  o.info.push_back(fmt("with phi -> -phi the ratio is %.3f",
                       phonon_number(m).Gamma / longest->singlePass.Gamma));
  return o;
}

// --- 7 ---------------------------------------------------------------------

Outcome phase_scan() {
  const ModelParams base = resolved(load_config(preset("phase_scan.ini")));
  ModelParams open = base;
  open.eta = 0.0;
  const CoolingResult dyn = phonon_number(open);

  const int n = 72;
  std::vector<double> phi(n), gamma(n), shift(n);
  for (int i = 0; i < n; ++i) {
    ModelParams m = base;
    m.phi = kTwoPi * i / n;
    const CoolingResult r = phonon_number(m);
    phi[i] = m.phi;
    gamma[i] = r.Gamma;
    shift[i] = r.deltaOmega;
  }
  // Discrete Fourier projection onto {1, cos, sin}; a pure sinusoid leaves no residual.
  auto residual = [&](const std::vector<double>& y, double offset) {
    double a = 0.0, b = 0.0, s = 0.0;
    for (int i = 0; i < n; ++i) {
      a += y[i] / n;
      b += 2.0 * y[i] * std::cos(phi[i]) / n;
      s += 2.0 * y[i] * std::sin(phi[i]) / n;
    }
    const double amp = std::hypot(b, s);
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(y[i] - a - b * std::cos(phi[i]) - s * std::sin(phi[i])));
    }
    return std::pair{worst / amp, std::abs(a - offset) / amp};
  };
  const auto [gFit, gOff] = residual(gamma, dyn.Gamma);
  const auto [sFit, sOff] = residual(shift, dyn.deltaOmega);

  double antisym = 0.0;
  for (int i = 0; i < n / 2; ++i) {
    const double a = gamma[i] - dyn.Gamma;
    const double b = gamma[i + n / 2] - dyn.Gamma;
    antisym = std::max(antisym, std::abs(a + b) / std::max(std::abs(a), std::abs(b)));
  }

  // Stronger loop so part of the phase range is unstable.
  int flaggedWrong = 0, unstable = 0;
  for (int i = 0; i < 360; ++i) {
    ModelParams m = base;
    m.g1 *= 4.0;
    m.g2 *= 4.0;
    m.phi = kTwoPi * i / 360.0;
    const double margin = m.mech.gamma_m + damping_and_shift(m, m.mech.omega_m).Gamma;
    const CoolingResult r = phonon_number(m);
    const StabilityReport s = stability_check(m);
    const bool expectStable = margin > 0.0;
    if (!expectStable) ++unstable;
    if (r.stable != expectStable || s.stable != expectStable ||
        std::isnan(r.nBar) == expectStable) {
      ++flaggedWrong;
    }
  }

  const double tol = 1e-9;
  Outcome o;
  o.pass = gFit < tol && sFit < tol && gOff < tol && sOff < tol && antisym < tol &&
           unstable > 0 && flaggedWrong == 0;
  o.detail = fmt("sinusoid residual Gamma %.1e, shift %.1e; offset error %.1e, %.1e; "
                 "phi + pi antisymmetry %.1e (limits 1e-9); %d/360 unstable phases, %d misflagged",
                 gFit, sFit, gOff, sOff, antisym, unstable, flaggedWrong);
  return o;
}

// --- 8 ---------------------------------------------------------------------

Outcome measurement_equivalence() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int delayed = 0;
  for (int n = 0; n < 100; ++n) {
    ModelParams m;
    m.mech.omega_m = hz_to_rad(1.9e6);
    m.mech.gamma_m = m.mech.omega_m / 3.2e6;
    m.kappa = m.mech.omega_m * std::pow(10.0, -1.0 + 3.0 * u(rng));
    m.g1 = m.kappa * 0.05 * (0.01 + u(rng));
    m.g2 = m.kappa * 0.05 * (0.01 + u(rng));
    m.eta = 0.01 + 0.99 * u(rng);
    m.phi = kPi / 2.0;
    m.tau = kTwoPi * u(rng) / m.mech.omega_m;
    if (m.tau > 0.0) ++delayed;
    const GenericFilter f = equivalence_filter(m);
    for (int k = 0; k <= 400; ++k) {
      const double w = m.kappa * (-10.0 + 20.0 * k / 400.0);
      if (w == 0.0) continue;
      const double smf = generic_filter_response(f, m, w).noise;
      const double sfb = feedback_noise_spectrum(m, w);
      worst = std::max(worst, std::abs(smf - sfb) / std::abs(sfb));
    }
  }
  double boundGap = 0.0;
  for (double eta : {0.22, 0.5, 0.98}) {
    ModelParams m;
    m.mech.omega_m = hz_to_rad(1.9e6);
    m.mech.gamma_m = m.mech.omega_m / 3.2e6;
    m.kappa = hz_to_rad(55e6);
    m.g1 = hz_to_rad(3e5);
    ColdDampingFilter cd;
    cd.etaDet = eta;
    cd.omegaMf = 100.0 * m.mech.omega_m;
    cd.gMf = optimal_cold_damping_gain(m.g1, m.mech.omega_m, eta);
    boundGap = std::max(boundGap, std::abs(cold_damping_occupation(cd, m) - cooling_limit(eta)));
  }
  Outcome o;
  o.pass = worst < 1e-9 && delayed > 0 && boundGap < 1e-12;
  o.detail = fmt("max |S_mf - S_fb| / S_fb = %.2e over 100 draws on [-10 kappa, 10 kappa] "
                 "(limit 1e-9); optimal cold damping minus coherent bound %.1e",
                 worst, boundGap);
  return o;
}

// --- 9 ---------------------------------------------------------------------

Outcome calibration_round_trip() {
  const ScenarioConfig c = load_config(preset("membrane.ini"));
  const double g0 = c.params.cavity.g0;
  HomodyneSetup setup;
  setup.d0 = 1.0;
  setup.eta1 = c.params.losses.eta1;

  double worst = 0.0;
  for (double target : {0.5, 5.0, 5e5}) {
    ModelParams m;
    m.mech = c.params.mech;
    m.mech.temperature =
        kHbar * m.mech.omega_m / (kBoltzmann * std::log1p(1.0 / target));
    m.kappa = c.params.cavity.kappa;
    m.g1 = hz_to_rad(1.0);
    const double truth = phonon_number(m).nBar;
    const double lw = rad_to_hz(m.mech.gamma_m);
    const double f0 = rad_to_hz(m.mech.omega_m);
    std::vector<double> f(40001);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = f0 - 200.0 * lw + 400.0 * lw * i / (f.size() - 1);
    const MeasuredSpectrum s = synthesize_psd(setup, m, g0, f);
    const double n = phonons_from_psd(setup, s, g0, m.kappa, 0.0).nBar;
    worst = std::max(worst, std::abs(n / truth - 1.0));
  }
  const double kappa = c.params.cavity.kappa;
  const Complex r0 = cavity_transduction(kappa, 0.0, 0.0);
  const double rErr = std::abs(r0 - Complex(8.0 / kappa, 0.0)) / (8.0 / kappa);
  Outcome o;
  o.pass = worst <= 0.005 && rErr <= 4.0 * 2.220446049250313e-16;
  o.detail = fmt("max recovery error %.4f%% (limit 0.5%%); |R(0) kappa/8 - 1| = %.1e", 100.0 * worst,
                 rErr);
  return o;
}

// --- 10 --------------------------------------------------------------------

Outcome regime_comparison_check() {
  const ScenarioConfig c = load_config(preset("regimes.ini"));
  const RegimesConfig& rc = c.regimes;
  const std::vector<double> ratios = axis_values(rc.ratioStart, rc.ratioStop, rc.points, Spacing::Log);
  const std::vector<RegimeRow> rows = regime_comparison(0.98, ratios);
  int beatsBad = 0, beatsN = 0, advantageBad = 0, advantageN = 0;
  double redSidebandEdge = 0.0;
  for (const auto& r : rows) {
    if (r.kappaOverOmega >= 10.0 * (1.0 - 1e-12)) {
      ++beatsN;
      if (!(r.feedbackResonant < r.cavityHalfLinewidth)) ++beatsBad;
    }
    if (r.kappaOverOmega <= 0.1 * (1.0 + 1e-12)) {
      ++advantageN;
      if (r.feedbackResonant < r.cavityRedSideband) ++advantageBad;
      redSidebandEdge = std::max(redSidebandEdge, 1.0 - r.feedbackRedSideband / r.cavityRedSideband);
    }
  }
  const double saturated = feedback_floor(rc.ratioStop, 0.0, 0.22);
  Outcome o;
  o.pass = beatsN > 0 && beatsBad == 0 && advantageN > 0 && advantageBad == 0 &&
           std::abs(saturated - 0.566) <= 0.001 * 5.66;
  o.detail = fmt("CF beats Delta = -kappa/2 at %d/%d points with kappa/Omega_m >= 10; CF at "
                 "resonance better than Delta = -Omega_m at %d/%d points with kappa/Omega_m <= 0.1; "
                 "eta = 0.22 floor at kappa/Omega_m = %g: %.5f (0.566 within 1%%)",
                 beatsN - beatsBad, beatsN, advantageBad, advantageN, rc.ratioStop, saturated);
  o.info.push_back(fmt("loop driven at Delta = -Omega_m gains at most %.1e relative over plain "
                       "sideband cooling for kappa/Omega_m <= 0.1",
                       redSidebandEdge));
  return o;
}

// --- 11 --------------------------------------------------------------------

Outcome below_backaction_limit() {
  const ScenarioConfig c = load_config(preset("lock_scan.ini"));
  const std::vector<SweepRow> rows = sweep(*c.sweep);
  double best = INFINITY, at = 0.0;
  for (const auto& r : rows) {
    if (r.error.empty() && r.result.stable && r.result.nBar < best) {
      best = r.result.nBar;
      at = r.value;
    }
  }
  const double limit = dba_limit(c.params.cavity.kappa, c.params.mech.omega_m);
  Outcome o;
  o.pass = best < limit;
  o.detail = fmt("minimum predicted n = %.3f at lock phase %.0f deg, backaction limit %.3f", best,
                 at, limit);
  o.info.push_back("the measured 4.89 +- 0.14 phonons also reflect in-loop phase noise and lock "
                   "imperfections that are not modeled; only the prediction is checked");
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "dynamical-backaction limit", 1.0, backaction_limit},
      {2, "coherent-feedback limit", 10.0, feedback_limit},
      {3, "unresolved-sideband consistency", 5.0, unresolved_consistency},
      {4, "full model against reduced model", 30.0, full_model_equivalence},
      {5, "sideband identity", 5.0, sideband_identity},
      {6, "delay scan damping", 10.0, delay_scan},
      {7, "phase scan", 10.0, phase_scan},
      {8, "measurement-based equivalence", 10.0, measurement_equivalence},
      {9, "calibration round trip", 5.0, calibration_round_trip},
      {10, "regime comparison", 30.0, regime_comparison_check},
      {11, "prediction below the backaction limit", 10.0, below_backaction_limit},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool inTime = dt < c.budgetSeconds;
    const bool pass = o.pass && inTime;
    if (!pass) ++failed;
    std::printf("[%s] %2d %s: %s; %.3f s (budget %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), dt, c.budgetSeconds);
    for (const auto& line : o.info) std::printf("       info: %s\n", line.c_str());
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
