#include "cfb/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cfb/calibration.hpp"
#include "cfb/config.hpp"
#include "cfb/constants.hpp"
#include "cfb/errors.hpp"
#include "cfb/full_model.hpp"
#include "cfb/integration.hpp"
#include "cfb/measurement_feedback.hpp"
#include "cfb/optimize.hpp"
#include "cfb/parallel.hpp"
#include "cfb/reduced_model.hpp"
#include "cfb/regimes.hpp"
#include "cfb/stability.hpp"
#include "cfb/sweep.hpp"

namespace cfb::cli {

namespace {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CalibrationInconsistency : public std::runtime_error {
 public:
  CalibrationInconsistency(const std::string& what, double nBar)
      : std::runtime_error(what), nBar(nBar) {}
  double nBar;
};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string hz(double radPerSecond) { return num(rad_to_hz(radPerSecond)); }
std::string flag(bool b) { return b ? "1" : "0"; }

struct Options {
  std::string command;
  std::string config;
  std::string out;
  std::string model;  // empty: command default
  unsigned workers = 1;
  std::optional<double> tolerance;
};

void add(Table& t, const std::string& key, const std::string& value) {
  t.meta.push_back(key + " = " + value);
}

void quantity(Table& t, const std::string& name, const std::string& value, const std::string& unit) {
  t.rows.push_back({name, value, unit});
}

Table quantity_table() {
  Table t;
  t.header = {"quantity", "value", "unit"};
  return t;
}

void echo(Table& t, const Options& o, const ScenarioConfig& cfg, const ModelParams& m) {
  const SystemParams& p = cfg.params;
  add(t, "cfb_version", CFB_VERSION);
  add(t, "command", o.command);
  if (!o.model.empty()) add(t, "model", o.model);
  add(t, "omega_m_hz", hz(p.mech.omega_m));
  add(t, "gamma_m_hz", hz(p.mech.gamma_m));
  add(t, "quality_factor", num(p.mech.quality_factor()));
  add(t, "temperature_k", num(p.mech.temperature));
  add(t, "n_th", num(m.n_th()));
  add(t, "kappa_hz", hz(p.cavity.kappa));
  add(t, "detuning_hz", hz(m.detuning));
  add(t, "detuning_over_kappa", num(m.detuning / m.kappa));
  add(t, "g0_hz", hz(p.cavity.g0));
  add(t, "wavelength_m", num(kTwoPi * kSpeedOfLight / p.cavity.omega_L));
  add(t, "eta1", num(p.losses.eta1));
  add(t, "eta2", num(p.losses.eta2));
  add(t, "eta_t", num(p.losses.etaT));
  add(t, "eta_aux", num(p.losses.etaAux));
  add(t, "eta_loop", num(m.eta));
  add(t, "p1_w", num(p.drive.p1));
  add(t, "p_aux_measured_w", num(p.drive.pAuxMeasured));
  add(t, "lock_phase_deg", num(rad_to_deg(p.drive.auxLockPhase)));
  add(t, "lock_offset_deg", num(rad_to_deg(p.loop.lockOffset)));
  add(t, "phase_mode", p.loop.mode == PhaseMode::Direct ? "direct" : "from_lock");
  add(t, "phi_deg", num(rad_to_deg(m.phi)));
  add(t, "tau_s", num(m.tau));
  add(t, "omega_m_tau_over_pi", num(p.mech.omega_m * m.tau / kPi));
  add(t, "g1_hz", hz(m.g1));
  add(t, "g2_hz", hz(m.g2));
  add(t, "couplings", cfg.couplings.g1 || cfg.couplings.g2 ? "override" : "mean_field");
  if (auto w = p.mech.quality_warning()) add(t, "warning", *w);
}

ModelKind model_kind(const Options& o, ModelKind fallback) {
  if (o.model.empty()) return fallback;
  return o.model == "full" ? ModelKind::Full : ModelKind::Reduced;
}

IntegrationOptions integration_options(const Options& o) {
  IntegrationOptions opts;
  if (o.tolerance) opts.tolerance = *o.tolerance;
  return opts;
}

void require_stable(const ModelParams& m) {
  const StabilityReport s = stability_check(m);
  if (!s.stable) {
    throw InstabilityError("operating point is unstable: gamma_m + Gamma_m = " +
                           num(rad_to_hz(s.margin)) + " Hz");
  }
}

// ---------------------------------------------------------------- commands

Table cmd_spectrum(const Options& o, const ScenarioConfig& cfg) {
  const ModelParams m = resolve(cfg.params, cfg.couplings);
  require_stable(m);
  const CoolingResult r = phonon_number(m);
  const SpectrumConfig& sc = cfg.spectrum;

  FrequencyGrid grid;
  if (sc.startHz && sc.stopHz) {
    grid = FrequencyGrid::linspace(hz_to_rad(*sc.startHz), hz_to_rad(*sc.stopHz), sc.points);
  } else {
    const double center = m.mech.omega_m + r.deltaOmega;
    const double width = m.mech.gamma_m + r.Gamma;
    grid = FrequencyGrid::linspace(center - sc.spanLinewidths * width,
                                   center + sc.spanLinewidths * width, sc.points);
  }

  Table t;
  echo(t, o, cfg, m);
  add(t, "observable", observable_name(sc.observable));
  add(t, "points", std::to_string(grid.size()));
  t.header = {"frequency [Hz]"};

  std::vector<std::vector<double>> columns;
  if (model_kind(o, ModelKind::Reduced) == ModelKind::Full) {
    std::vector<Observable> list = {sc.observable};
    for (Observable obs : {Observable::XmSymmetrized, Observable::Xm, Observable::Pm,
                           Observable::X1, Observable::P1, Observable::X2, Observable::P2}) {
      if (obs != sc.observable) list.push_back(obs);
    }
    for (Observable obs : list) {
      columns.push_back(observable_spectrum(m, obs, grid, o.workers).values);
      t.header.push_back(std::string("S_") + observable_name(obs) + " [1/Hz]");
    }
  } else {
    std::vector<double> plain(grid.size()), sym(grid.size()), fb(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double w = grid[i];
      plain[i] = lorentzian_density(m, w);
      sym[i] = 0.5 * (plain[i] + lorentzian_density(m, -w));
      fb[i] = feedback_noise_spectrum(m, w);
    }
    columns = {sym, plain, fb};
    t.header.insert(t.header.end(),
                    {"S_X_m_sym [1/Hz]", "S_X_m [1/Hz]", "S_fb [rad/s]"});
  }

  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<std::string> row = {hz(grid[i])};
    for (const auto& c : columns) row.push_back(num(c[i]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table cmd_cooling(const Options& o, const ScenarioConfig& cfg) {
  const ModelParams m = resolve(cfg.params, cfg.couplings);
  require_stable(m);
  Table t = quantity_table();
  echo(t, o, cfg, m);

  const CoolingResult r = phonon_number(m);
  const CoolingResult shifted = phonon_number(m, Evaluation::ShiftedFrequency);
  quantity(t, "delta_omega", hz(r.deltaOmega), "Hz");
  quantity(t, "gamma_opt", hz(r.Gamma), "Hz");
  quantity(t, "gamma_eff", hz(m.mech.gamma_m + r.Gamma), "Hz");
  quantity(t, "a_plus", hz(r.aPlus), "Hz");
  quantity(t, "a_minus", hz(r.aMinus), "Hz");
  quantity(t, "n_bar", num(r.nBar), "1");
  quantity(t, "n_bar_shifted", num(shifted.nBar), "1");
  quantity(t, "c_qu", num(r.cQu), "1");
  quantity(t, "stable", flag(r.stable), "bool");

  if (model_kind(o, ModelKind::Reduced) == ModelKind::Full) {
    FullFitOptions fo;
    fo.integration = integration_options(o);
    const FullModelPoint f = evaluate_full_model(m, fo);
    quantity(t, "full_delta_omega", hz(f.result.deltaOmega), "Hz");
    quantity(t, "full_gamma_opt", hz(f.result.Gamma), "Hz");
    quantity(t, "full_a_plus", hz(f.result.aPlus), "Hz");
    quantity(t, "full_a_minus", hz(f.result.aMinus), "Hz");
    quantity(t, "full_n_bar", num(f.result.nBar), "1");
    quantity(t, "full_n_bar_high_q", num(f.integral.nBarHighQ), "1");
    quantity(t, "full_n_bar_fit", num(f.nBarFromFit), "1");
    quantity(t, "full_integral_error", num(f.integral.errorEstimate), "1");
    quantity(t, "full_fit_residual", num(f.fit.residualNorm), "1");
  } else {
    const PhononIntegral pi = integrate_reduced_model(m, integration_options(o));
    quantity(t, "n_bar_integral", num(pi.nBar), "1");
  }

  if (m.detuning != 0.0) {
    const CoolingResult dba = dba_baseline(m);
    quantity(t, "n_bar_without_loop", num(dba.nBar), "1");
    quantity(t, "gamma_without_loop", hz(dba.Gamma), "Hz");
  }
  quantity(t, "cooling_limit", num(cooling_limit(m.eta)), "1");
  return t;
}

Table cmd_sweep(const Options& o, const ScenarioConfig& cfg) {
  if (!cfg.sweep) throw ConfigError("[sweep] section is required for the sweep command");
  SweepSpec spec = *cfg.sweep;
  spec.model = model_kind(o, spec.model);
  spec.workers = o.workers;
  spec.fullOptions.integration = integration_options(o);
  spec.validate();

  const ModelParams m = resolve(cfg.params, cfg.couplings);
  Table t;
  echo(t, o, cfg, m);
  add(t, "sweep_axis", axis_name(spec.axis));
  add(t, "sweep_model", spec.model == ModelKind::Full ? "full" : "reduced");
  add(t, "sweep_spacing", spec.spacing == Spacing::Log ? "log" : "linear");
  if (spec.seriesAxis) add(t, "series_axis", axis_name(*spec.seriesAxis));

  const std::vector<SweepRow> rows = sweep(spec);
  const bool dbaColumns = spec.axis == SweepAxis::TotalPower;

  if (spec.seriesAxis) {
    t.header.push_back(std::string(axis_name(*spec.seriesAxis)) + " [" + axis_unit(*spec.seriesAxis) + "]");
  }
  t.header.push_back(std::string(axis_name(spec.axis)) + " [" + axis_unit(spec.axis) + "]");
  for (const char* h : {"delta_omega [Hz]", "gamma_opt [Hz]", "a_plus [Hz]", "a_minus [Hz]",
                        "n_bar [1]", "stable [bool]", "delta_omega_without_loop [Hz]",
                        "gamma_without_loop [Hz]", "n_bar_without_loop [1]",
                        "gamma_single_pass [Hz]", "g1 [Hz]", "g2 [Hz]", "phi [deg]",
                        "total_power [W]"}) {
    t.header.push_back(h);
  }
  if (dbaColumns) {
    t.header.push_back("gamma_single_beam [Hz]");
    t.header.push_back("n_bar_single_beam [1]");
  }
  t.header.push_back("error");

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const SweepRow& row : rows) {
    std::vector<std::string> cells;
    if (spec.seriesAxis) cells.push_back(num(row.series));
    cells.push_back(num(row.value));
    const bool ok = row.error.empty();
    const CoolingResult& r = row.result;
    cells.push_back(ok ? hz(r.deltaOmega) : num(nan));
    cells.push_back(ok ? hz(r.Gamma) : num(nan));
    cells.push_back(ok ? hz(r.aPlus) : num(nan));
    cells.push_back(ok ? hz(r.aMinus) : num(nan));
    cells.push_back(ok ? num(r.nBar) : num(nan));
    cells.push_back(flag(ok && r.stable));
    cells.push_back(ok ? hz(row.withoutLoop.deltaOmega) : num(nan));
    cells.push_back(ok ? hz(row.withoutLoop.Gamma) : num(nan));
    cells.push_back(ok ? num(row.withoutLoop.nBar) : num(nan));
    cells.push_back(ok ? hz(row.singlePass.Gamma) : num(nan));
    cells.push_back(hz(row.g1));
    cells.push_back(hz(row.g2));
    cells.push_back(num(rad_to_deg(row.phi)));
    cells.push_back(num(row.totalPower));
    if (dbaColumns) {
      cells.push_back(row.singleBeamDba ? hz(row.singleBeamDba->Gamma) : num(nan));
      cells.push_back(row.singleBeamDba ? num(row.singleBeamDba->nBar) : num(nan));
    }
    std::string err = row.error;
    std::replace(err.begin(), err.end(), ',', ';');
    cells.push_back(err);
    t.rows.push_back(std::move(cells));
  }
  return t;
}

std::string variable_unit(FreeVariable v) {
  switch (v) {
    case FreeVariable::Phi: return "deg";
    case FreeVariable::OmegaTau: return "pi";
    case FreeVariable::G1:
    case FreeVariable::G2: return "Hz";
    default: return "1";
  }
}

std::string variable_value(FreeVariable v, double x) {
  switch (v) {
    case FreeVariable::Phi: return num(rad_to_deg(x));
    case FreeVariable::OmegaTau: return num(x / kPi);
    case FreeVariable::G1:
    case FreeVariable::G2: return hz(x);
    default: return num(x);
  }
}

Table cmd_optimize(const Options& o, const ScenarioConfig& cfg) {
  if (!cfg.optimize) throw ConfigError("[optimize] section is required for the optimize command");
  if (model_kind(o, ModelKind::Reduced) == ModelKind::Full) {
    throw ConfigError("optimize works on the reduced model only");
  }
  const ModelParams m = resolve(cfg.params, cfg.couplings);
  OptimizationProblem problem;
  problem.base = m;
  problem.variables = cfg.optimize->variables;
  problem.gridPoints = cfg.optimize->gridPoints;
  problem.tolerance = o.tolerance.value_or(cfg.optimize->tolerance);
  problem.marginFactor = cfg.optimize->marginFactor;
  problem.workers = o.workers;
  const OptimizationResult res = optimize(problem);

  Table t = quantity_table();
  echo(t, o, cfg, m);
  for (std::size_t i = 0; i < problem.variables.size(); ++i) {
    const FreeVariable v = problem.variables[i].variable;
    quantity(t, variable_name(v), variable_value(v, res.x[i]), variable_unit(v));
  }
  quantity(t, "n_bar", num(res.result.nBar), "1");
  quantity(t, "delta_omega", hz(res.result.deltaOmega), "Hz");
  quantity(t, "gamma_opt", hz(res.result.Gamma), "Hz");
  quantity(t, "a_plus", hz(res.result.aPlus), "Hz");
  quantity(t, "a_minus", hz(res.result.aMinus), "Hz");
  quantity(t, "stability_margin", hz(res.margin), "Hz");
  quantity(t, "converged", flag(res.converged), "bool");
  quantity(t, "iterations", std::to_string(res.iterations), "1");
  quantity(t, "grid_best", num(res.gridBest), "1");
  quantity(t, "feasible_grid_points", std::to_string(res.feasibleGridPoints), "1");
  quantity(t, "cooling_limit", num(cooling_limit(m.eta)), "1");
  return t;
}

double rel_dev(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

Table cmd_compare_mf(const Options& o, const ScenarioConfig& cfg) {
  SystemParams sp = cfg.params;
  sp.cavity.detuning = 0.0;
  sp.loop.mode = PhaseMode::Direct;
  sp.loop.phi = kPi / 2.0;
  const ModelParams m = resolve(sp, cfg.couplings);
  const GenericFilter filter = equivalence_filter(m);

  const SpectrumConfig& sc = cfg.spectrum;
  const double reach = 5.0 * std::max(m.kappa, m.mech.omega_m);
  const double lo = sc.startHz ? hz_to_rad(*sc.startHz) : -reach;
  const double hi = sc.stopHz ? hz_to_rad(*sc.stopHz) : reach;
  const FrequencyGrid grid = FrequencyGrid::linspace(lo, hi, sc.points);

  struct Point {
    double sFb, sMf, gamma, gammaMf, shift, shiftMf;
  };
  std::vector<Point> pts(grid.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  parallel_for(grid.size(), o.workers, [&](std::size_t i) {
    const double w = grid[i];
    Point& p = pts[i];
    p.sFb = feedback_noise_spectrum(m, w);
    if (w == 0.0) {
      // Damping is undefined at zero frequency.
      p.sMf = p.gamma = p.gammaMf = p.shift = p.shiftMf = nan;
      return;
    }
    const FilterResponse mf = generic_filter_response(filter, m, w);
    const ShiftDamping cf = damping_and_shift(m, w);
    p.sMf = mf.noise;
    p.gamma = cf.Gamma;
    p.gammaMf = mf.Gamma;
    p.shift = cf.deltaOmega;
    p.shiftMf = mf.deltaOmega;
  });

  double maxNoise = 0.0, maxGamma = 0.0, maxShift = 0.0;
  for (const Point& p : pts) {
    if (!std::isnan(p.sMf)) {
      maxNoise = std::max(maxNoise, rel_dev(p.sFb, p.sMf));
      maxGamma = std::max(maxGamma, rel_dev(p.gamma, p.gammaMf));
      maxShift = std::max(maxShift, rel_dev(p.shift, p.shiftMf));
    }
  }

  Table t;
  echo(t, o, cfg, m);
  add(t, "filter", filter.name);
  add(t, "eta_det", num(filter.etaDet));
  add(t, "max_rel_dev_noise", num(maxNoise));
  add(t, "max_rel_dev_gamma", num(maxGamma));
  add(t, "max_rel_dev_shift", num(maxShift));
  const CoolingResult coherent = phonon_number(m);
  const CoolingResult measured = mbf_phonon_number(filter, m);
  add(t, "n_bar_coherent", num(coherent.nBar));
  add(t, "n_bar_measurement", num(measured.nBar));

  ColdDampingFilter cd;
  cd.etaDet = m.eta > 0.0 ? m.eta : 1.0;
  cd.omegaMf = 100.0 * m.mech.omega_m;
  cd.gMf = optimal_cold_damping_gain(m.g1, m.mech.omega_m, cd.etaDet);
  add(t, "cold_damping_optimal_gain", num(cd.gMf));
  add(t, "cold_damping_n_bar", num(cold_damping_occupation(cd, m)));
  if (auto w = large_bandwidth_warning(cd, m)) add(t, "warning", *w);

  t.header = {"frequency [Hz]",  "S_fb [rad/s]",         "S_mf [rad/s]",
              "gamma_cf [Hz]",   "gamma_mf [Hz]",        "delta_omega_cf [Hz]",
              "delta_omega_mf [Hz]", "rel_dev_noise [1]"};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point& p = pts[i];
    t.rows.push_back({hz(grid[i]), num(p.sFb), num(p.sMf), hz(p.gamma), hz(p.gammaMf),
                      hz(p.shift), hz(p.shiftMf),
                      std::isnan(p.sMf) ? num(nan) : num(rel_dev(p.sFb, p.sMf))});
  }
  return t;
}

Table cmd_regimes(const Options& o, const ScenarioConfig& cfg) {
  const RegimesConfig& rc = cfg.regimes;
  const std::vector<double> ratios = axis_values(rc.ratioStart, rc.ratioStop, rc.points, Spacing::Log);
  const std::vector<RegimeRow> rows = regime_comparison(rc.eta, ratios);

  Table t;
  add(t, "cfb_version", CFB_VERSION);
  add(t, "command", o.command);
  add(t, "eta", num(rc.eta));
  add(t, "temperature_k", "0");
  add(t, "cf_loop", "g1 = g2; phi = omega_m_tau = pi/2");
  t.header = {"kappa_over_omega_m [1]", "n_cf_resonant [1]",  "n_cf_red_sideband [1]",
              "n_cavity_red_sideband [1]", "n_cavity_half_linewidth [1]", "n_dba_limit [1]"};
  for (const RegimeRow& r : rows) {
    t.rows.push_back({num(r.kappaOverOmega), num(r.feedbackResonant), num(r.feedbackRedSideband),
                      num(r.cavityRedSideband), num(r.cavityHalfLinewidth), num(r.dbaLimit)});
  }
  return t;
}

Table cmd_limits(const Options& o, const ScenarioConfig& cfg) {
  const SystemParams& p = cfg.params;
  p.validate();
  const double kappa = p.cavity.kappa;
  const double omega = p.mech.omega_m;
  const double eta = p.losses.total();

  Table t = quantity_table();
  add(t, "cfb_version", CFB_VERSION);
  add(t, "command", o.command);
  add(t, "omega_m_hz", hz(omega));
  add(t, "kappa_hz", hz(kappa));
  add(t, "eta_loop", num(eta));
  quantity(t, "kappa_over_omega_m", num(kappa / omega), "1");
  quantity(t, "n_dba_limit", num(dba_limit(kappa, omega)), "1");
  quantity(t, "n_dba_min", num(dba_occupation(-kappa / 2.0, kappa, omega)), "1");
  quantity(t, "eta_loop", num(eta), "1");
  quantity(t, "n_cf_limit", num(cooling_limit(eta)), "1");
  for (double e : {0.1, 0.22, 0.5, 0.9, 0.98, 1.0}) {
    char name[40];
    std::snprintf(name, sizeof name, "n_cf_limit_eta_%g", e);
    quantity(t, name, num(cooling_limit(e)), "1");
  }
  return t;
}

MeasuredSpectrum read_spectrum(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open spectrum file '" + path + "'");
  return parse_measured_spectrum(in);
}

Table cmd_calibrate(const Options& o, const ScenarioConfig& cfg) {
  if (!cfg.calibration) throw ConfigError("[calibration] section is required for the calibrate command");
  const CalibrationConfig& cc = *cfg.calibration;
  MeasuredSpectrum spectrum = read_spectrum(cc.spectrumFile);
  spectrum.validate();

  LorentzianFit fit;
  if (cc.normalizeBackground) {
    fit = fit_lorentzian(spectrum.frequencyHz, spectrum.psd);
    spectrum = normalize_to_background(spectrum, fit);
  }
  const CavityMode& cav = cfg.params.cavity;
  const CalibrationResult r =
      phonons_from_psd(cc.setup, spectrum, cav.g0, cav.kappa, cav.detuning, cc.options);
  if (!r.valid) {
    throw CalibrationInconsistency("calibration gives a negative occupation: " + r.message, r.nBar);
  }

  Table t = quantity_table();
  add(t, "cfb_version", CFB_VERSION);
  add(t, "command", o.command);
  add(t, "spectrum_file", std::filesystem::path(cc.spectrumFile).filename().string());
  add(t, "points", std::to_string(spectrum.psd.size()));
  add(t, "kappa_hz", hz(cav.kappa));
  add(t, "detuning_hz", hz(cav.detuning));
  add(t, "g0_hz", hz(cav.g0));
  add(t, "d0", num(cc.setup.d0));
  add(t, "eta1", num(cc.setup.eta1));
  add(t, "lock_angle_deg", num(rad_to_deg(cc.setup.lockAngle)));
  add(t, "tail_correction", flag(cc.options.tailCorrection));
  if (cc.options.windowLinewidths) add(t, "window_linewidths", num(*cc.options.windowLinewidths));
  for (const auto& [k, v] : spectrum.metadata) add(t, "file." + k, v);

  quantity(t, "n_bar", num(r.nBar), "1");
  quantity(t, "psd_integral", num(r.integral), "units^2");
  quantity(t, "tail_integral", num(r.tailIntegral), "units^2");
  quantity(t, "peak_frequency", num(r.peakFrequencyHz), "Hz");
  quantity(t, "transduction", num(r.transduction), "s");
  if (cc.normalizeBackground) {
    quantity(t, "background", num(fit.offset), "units^2/Hz");
    quantity(t, "fit_linewidth", num(2.0 * fit.halfWidth), "Hz");
  }
  if (cc.calibArea && cc.calibOccupation) {
    quantity(t, "n_bar_area_ratio",
             num(phonons_from_area_ratio(*cc.calibArea, *cc.calibOccupation, r.integral)), "1");
  }
  return t;
}

Table dispatch(const Options& o, const ScenarioConfig& cfg) {
  if (o.command == "spectrum") return cmd_spectrum(o, cfg);
  if (o.command == "cooling") return cmd_cooling(o, cfg);
  if (o.command == "sweep") return cmd_sweep(o, cfg);
  if (o.command == "optimize") return cmd_optimize(o, cfg);
  if (o.command == "compare-mf") return cmd_compare_mf(o, cfg);
  if (o.command == "regimes") return cmd_regimes(o, cfg);
  if (o.command == "limits") return cmd_limits(o, cfg);
  if (o.command == "calibrate") return cmd_calibrate(o, cfg);
  throw std::logic_error("unhandled command " + o.command);
}

void write_file(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path partial = target.string() + ".partial";
  {
    std::ofstream f(partial, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + partial.string() + "' for writing");
    f << text;
    f.flush();
    if (!f) {
      std::error_code ec;
      fs::remove(partial, ec);
      throw IoError("write to '" + partial.string() + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(partial, target, ec);
  if (ec) {
    fs::remove(partial, ec);
    throw IoError("cannot move output into '" + path + "'");
  }
}

int report(std::ostream& err, const std::string& command, ExitCode code, const char* kind,
           const std::string& message, const nlohmann::json& extra = nlohmann::json::object()) {
  nlohmann::json rec = {{"status", "error"},
                        {"kind", kind},
                        {"exit_code", static_cast<int>(code)},
                        {"command", command},
                        {"message", message}};
  for (auto it = extra.begin(); it != extra.end(); ++it) rec[it.key()] = it.value();
  err << rec.dump() << '\n';
  return code;
}

}  // namespace

std::string Table::render() const {
  std::string s;
  for (const auto& m : meta) s += "# " + m + "\n";
  auto line = [&s](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) s += ',';
      s += cells[i];
    }
    s += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return s;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Coherent feedback cooling calculator", "cfb"};
  app.set_version_flag("--version", CFB_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", o.config, "Scenario INI file")->required();
  app.add_option("--out", o.out, "Output CSV path (stdout when omitted)");
  app.add_option("--model", o.model, "Model for spectra and sweeps")
      ->check(CLI::IsMember({"full", "reduced"}));
  app.add_option("--workers", o.workers, "Worker threads")->check(CLI::Range(1u, 1024u));
  app.add_option("--tolerance", o.tolerance, "Relative tolerance for integrals and the optimizer")
      ->check(CLI::PositiveNumber);

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"spectrum", "Displacement and component spectra"},
      {"cooling", "Single operating point"},
      {"sweep", "Parameter sweep from [sweep]"},
      {"optimize", "Minimize the occupation over [optimize] variables"},
      {"compare-mf", "Coherent loop versus its measurement-based counterpart"},
      {"regimes", "Ground-state floors versus kappa / Omega_m"},
      {"limits", "Backaction and feedback cooling limits"},
      {"calibrate", "Occupation from a recorded homodyne spectrum"},
  };
  for (const auto& [name, help] : commands) {
    app.add_subcommand(name, help)->callback([&o, name = std::string(name)] { o.command = name; });
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << CFB_VERSION << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    return report(err, o.command, kUsage, "usage", e.what());
  }

  try {
    if (!std::filesystem::exists(o.config)) {
      throw IoError("configuration file '" + o.config + "' does not exist");
    }
    const ScenarioConfig cfg = load_config(o.config);
    const std::string text = dispatch(o, cfg).render();
    if (o.out.empty()) {
      out << text;
    } else {
      write_file(o.out, text);
    }
    return kOk;
  } catch (const ConfigError& e) {
    return report(err, o.command, kConfig, "config", e.what());
  } catch (const ParameterError& e) {
    return report(err, o.command, kParameter, "parameter", e.what());
  } catch (const InstabilityError& e) {
    return report(err, o.command, kInstability, "instability", e.what());
  } catch (const NoStableRegionError& e) {
    return report(err, o.command, kInstability, "no_stable_region", e.what());
  } catch (const SingularMatrixError& e) {
    return report(err, o.command, kNumerical, "singular_matrix", e.what(),
                  {{"omega_rad_s", e.omega()}});
  } catch (const NonConvergenceError& e) {
    return report(err, o.command, kNumerical, "non_convergence", e.what());
  } catch (const IoError& e) {
    return report(err, o.command, kIo, "io", e.what());
  } catch (const CalibrationInconsistency& e) {
    return report(err, o.command, kCalibration, "calibration_inconsistent", e.what(),
                  {{"n_bar", e.nBar}});
  } catch (const std::exception& e) {
    return report(err, o.command, kInternal, "internal", e.what());
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace cfb::cli
