#include "cfb/sweep.hpp"

#include <cmath>
#include <limits>

#include "cfb/constants.hpp"
#include "cfb/errors.hpp"
#include "cfb/full_model.hpp"
#include "cfb/parallel.hpp"

namespace cfb {

namespace {

struct AxisInfo {
  SweepAxis axis;
  const char* name;
  const char* unit;
};

constexpr AxisInfo kAxes[] = {
    {SweepAxis::DetuningOverKappa, "detuning_over_kappa", "1"},
    {SweepAxis::LockPhaseDeg, "lock_phase_deg", "deg"},
    {SweepAxis::PhiDeg, "phi_deg", "deg"},
    {SweepAxis::OmegaTauOverPi, "omega_m_tau_over_pi", "1"},
    {SweepAxis::TauSeconds, "tau_seconds", "s"},
    {SweepAxis::P1, "p1_w", "W"},
    {SweepAxis::PAuxMeasured, "p_aux_measured_w", "W"},
    {SweepAxis::TotalPower, "total_power_w", "W"},
    {SweepAxis::KappaOverOmegaM, "kappa_over_omega_m", "1"},
};

CoolingResult failed_result() {
  CoolingResult r;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.deltaOmega = r.Gamma = r.aPlus = r.aMinus = r.nBar = r.cQu = nan;
  r.stable = false;
  return r;
}

CoolingResult single_beam_dba(const SystemParams& p, double power) {
  SystemParams q = p;
  q.drive.p1 = power;
  q.drive.pAuxMeasured = 0.0;
  q.cavity.detuning = -q.cavity.kappa / 2.0;
  ModelParams m = resolve(q);
  m.g2 = 0.0;
  m.eta = 0.0;
  return phonon_number(m);
}

SweepRow evaluate_row(const SweepSpec& spec, double series, double value) {
  SweepRow row;
  row.series = series;
  row.value = value;
  row.result = row.withoutLoop = row.singlePass = failed_result();
  try {
    SystemParams sp = spec.baseline;
    if (spec.seriesAxis) sp = apply_axis(sp, *spec.seriesAxis, series);
    sp = apply_axis(sp, spec.axis, value);
    const ModelParams mp = resolve(sp, spec.couplings);
    row.g1 = mp.g1;
    row.g2 = mp.g2;
    row.phi = mp.phi;
    row.totalPower = total_power(sp);

    ModelParams off = mp;
    off.eta = 0.0;
    row.withoutLoop = phonon_number(off);
    off.g2 = 0.0;
    row.singlePass = phonon_number(off);
    if (spec.axis == SweepAxis::TotalPower) row.singleBeamDba = single_beam_dba(sp, row.totalPower);

    const CoolingResult reduced = phonon_number(mp);
    if (spec.model == ModelKind::Full && reduced.stable) {
      row.result = evaluate_full_model(mp, spec.fullOptions).result;
    } else {
      row.result = reduced;
    }
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

}  // namespace

const char* axis_name(SweepAxis axis) {
  for (const auto& a : kAxes) {
    if (a.axis == axis) return a.name;
  }
  return "?";
}

const char* axis_unit(SweepAxis axis) {
  for (const auto& a : kAxes) {
    if (a.axis == axis) return a.unit;
  }
  return "?";
}

std::optional<SweepAxis> parse_axis(const std::string& name) {
  for (const auto& a : kAxes) {
    if (name == a.name) return a.axis;
  }
  return std::nullopt;
}

double total_power(const SystemParams& p) {
  const auto& l = p.losses;
  const double p1 = p.drive.p1;
  const double pa = p.drive.pAuxMeasured;
  return p1 * (1.0 + l.etaT * l.etaAux) + pa +
         2.0 * std::sqrt(l.etaAux * l.eta2 * p1 * pa) * std::cos(p.drive.auxLockPhase);
}

SystemParams apply_axis(SystemParams p, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::DetuningOverKappa:
      p.cavity.detuning = value * p.cavity.kappa;
      break;
    case SweepAxis::LockPhaseDeg:
      p.drive.auxLockPhase = deg_to_rad(value);
      p.loop.mode = PhaseMode::FromLock;
      break;
    case SweepAxis::PhiDeg:
      p.loop.phi = deg_to_rad(value);
      p.loop.mode = PhaseMode::Direct;
      break;
    case SweepAxis::OmegaTauOverPi:
      p.loop.tau = value * kPi / p.mech.omega_m;
      break;
    case SweepAxis::TauSeconds:
      p.loop.tau = value;
      break;
    case SweepAxis::P1:
      p.drive.p1 = value;
      break;
    case SweepAxis::PAuxMeasured:
      p.drive.pAuxMeasured = value;
      break;
    case SweepAxis::TotalPower: {
      const double base = total_power(p);
      if (!(base > 0.0)) throw ParameterError("total-power axis needs a baseline with nonzero power");
      const double scale = value / base;
      p.drive.p1 *= scale;
      p.drive.pAuxMeasured *= scale;
      break;
    }
    case SweepAxis::KappaOverOmegaM:
      p.cavity.kappa = value * p.mech.omega_m;
      break;
  }
  return p;
}

std::vector<double> axis_values(double start, double stop, std::size_t points, Spacing spacing) {
  if (points < 2) throw ParameterError("sweep needs at least two points");
  if (!std::isfinite(start) || !std::isfinite(stop)) throw ParameterError("sweep range must be finite");
  std::vector<double> v(points);
  if (spacing == Spacing::Log) {
    if (!(start > 0.0 && stop > 0.0)) throw ParameterError("log spacing needs a positive range");
    const double a = std::log(start);
    const double b = std::log(stop);
    for (std::size_t i = 0; i < points; ++i) {
      v[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
    }
  } else {
    for (std::size_t i = 0; i < points; ++i) {
      v[i] = start + (stop - start) * static_cast<double>(i) / static_cast<double>(points - 1);
    }
  }
  v.front() = start;
  v.back() = stop;
  return v;
}

FullModelPoint evaluate_full_model(const ModelParams& p, const FullFitOptions& o) {
  const CoolingResult reduced = phonon_number(p);
  if (!reduced.stable) throw InstabilityError("gamma_m + Gamma_m <= 0: no steady state");
  const double om = p.mech.omega_m;
  const double center = om + reduced.deltaOmega;
  const double width = p.mech.gamma_m + reduced.Gamma;

  const FrequencyGrid grid = FrequencyGrid::linspace(center - o.spanLinewidths * width,
                                                     center + o.spanLinewidths * width, o.points);
  const Spectrum s = observable_spectrum(p, Observable::XmSymmetrized, grid);

  FullModelPoint out;
  out.fit = fit_lorentzian(s.omega, s.values);
  if (!out.fit.converged) throw NonConvergenceError("Lorentzian fit of the full spectrum failed");
  out.integral = integrate_full_model(p, o.integration);
  out.nBarFromFit = out.fit.amplitude * out.fit.halfWidth - 0.5;

  CoolingResult& r = out.result;
  r.deltaOmega = out.fit.center - om;
  r.Gamma = 2.0 * out.fit.halfWidth - p.mech.gamma_m;
  r.nBar = out.integral.nBar;
  r.stable = p.mech.gamma_m + r.Gamma > 0.0;
  // Effective sideband rates implied by the fitted damping and the integrated occupation.
  r.aPlus = r.nBar * (p.mech.gamma_m + r.Gamma) - p.mech.gamma_m * p.n_th();
  r.aMinus = r.aPlus + r.Gamma;
  r.cQu = reduced.cQu;
  return out;
}

void SweepSpec::validate() const {
  if (points < 2) throw ParameterError("sweep needs at least two points");
  if (seriesAxis && seriesValues.empty()) throw ParameterError("series axis has no values");
  if (seriesAxis && *seriesAxis == axis) throw ParameterError("series axis equals the sweep axis");
  baseline.validate();
}

std::vector<SweepRow> sweep(const SweepSpec& spec) {
  spec.validate();
  const std::vector<double> values = axis_values(spec.start, spec.stop, spec.points, spec.spacing);
  const std::vector<double> series =
      spec.seriesAxis ? spec.seriesValues : std::vector<double>{0.0};
  std::vector<SweepRow> rows(values.size() * series.size());
  parallel_for(rows.size(), spec.workers, [&](std::size_t i) {
    rows[i] = evaluate_row(spec, series[i / values.size()], values[i % values.size()]);
  });
  return rows;
}

}  // namespace cfb
