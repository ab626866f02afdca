#include "cfb/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "cfb/constants.hpp"
#include "cfb/errors.hpp"

namespace cfb {

namespace {

using boost::property_tree::ptree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"mechanics", {"omega_m_hz", "quality_factor", "gamma_m_hz", "temperature_k"}},
      {"cavity", {"kappa_hz", "detuning_over_kappa", "detuning_hz", "g0_hz", "wavelength_m"}},
      {"losses", {"eta1", "eta2", "eta_t", "eta_aux"}},
      {"drive", {"p1_w", "p_aux_measured_w", "lock_phase_deg"}},
      {"loop", {"tau_seconds", "omega_m_tau_over_pi", "phi_deg", "lock_offset_deg"}},
      {"couplings", {"g1_hz", "g2_hz"}},
      {"sweep",
       {"axis", "start", "stop", "points", "spacing", "model", "series_axis", "series_values"}},
      {"optimize",
       {"variables", "grid_points", "tolerance", "margin_factor", "detuning_over_kappa_bounds",
        "phi_deg_bounds", "omega_m_tau_over_pi_bounds", "g1_hz_bounds", "g2_hz_bounds",
        "g2_over_g1_bounds"}},
      {"spectrum", {"observable", "start_hz", "stop_hz", "points", "span_linewidths"}},
      {"calibration",
       {"spectrum_file", "d0", "eta1", "lock_angle_deg", "lo_amplitude", "window_linewidths",
        "tail_correction", "calib_area", "calib_occupation", "normalize_background"}},
      {"regimes", {"eta", "ratio_start", "ratio_stop", "points"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Section {
 public:
  Section(std::string name, const ptree* tree) : name_(std::move(name)), tree_(tree) {}

  bool present() const { return tree_ != nullptr; }
  bool has(const std::string& key) const { return tree_ && tree_->find(key) != tree_->not_found(); }

  std::string text(const std::string& key) const {
    if (!has(key)) fail(key, "missing required key");
    return trim(tree_->get<std::string>(key));
  }

  double number(const std::string& key) const { return to_number(key, text(key)); }
  double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  std::optional<double> maybe(const std::string& key) const {
    return has(key) ? std::optional<double>(number(key)) : std::nullopt;
  }

  std::size_t count(const std::string& key, std::size_t fallback) const {
    if (!has(key)) return fallback;
    const double v = number(key);
    if (v < 1.0 || v != std::floor(v)) fail(key, "expected a positive integer");
    return static_cast<std::size_t>(v);
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = text(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(key, "expected true or false");
  }

  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    std::stringstream ss(text(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) fail(key, "empty list entry");
      out.push_back(item);
    }
    if (out.empty()) fail(key, "empty list");
    return out;
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : list(key)) out.push_back(to_number(key, s));
    return out;
  }

  /// Exactly one of the two keys must be present.
  void exactly_one(const std::string& a, const std::string& b) const {
    if (has(a) == has(b)) {
      throw ConfigError("[" + name_ + "] exactly one of " + a + " and " + b + " must be given");
    }
  }
  void at_most_one(const std::string& a, const std::string& b) const {
    if (has(a) && has(b)) {
      throw ConfigError("[" + name_ + "] " + a + " and " + b + " are mutually exclusive");
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    throw ConfigError("[" + name_ + "] " + key + ": " + why);
  }

 private:
  double to_number(const std::string& key, const std::string& s) const {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      fail(key, "not a number: '" + s + "'");
    }
    if (trim(s.substr(used)) != "" || !std::isfinite(v)) fail(key, "not a finite number: '" + s + "'");
    return v;
  }

  std::string name_;
  const ptree* tree_;
};

Section section(const ptree& root, const std::string& name) {
  const auto it = root.find(name);
  return Section(name, it == root.not_found() ? nullptr : &it->second);
}

void check_schema(const ptree& root) {
  const auto& s = schema();
  for (const auto& [name, body] : root) {
    const auto it = s.find(name);
    if (it == s.end()) {
      if (body.empty()) throw ConfigError("key '" + name + "' outside of any section");
      throw ConfigError("unknown section [" + name + "]");
    }
    for (const auto& [key, value] : body) {
      if (!value.empty()) throw ConfigError("[" + name + "] nested keys are not allowed");
      if (!it->second.count(key)) throw ConfigError("[" + name + "] unknown key '" + key + "'");
    }
  }
}

Observable parse_observable(const Section& s, const std::string& key) {
  const std::string v = s.text(key);
  for (Observable o : {Observable::Xm, Observable::Pm, Observable::X1, Observable::P1,
                       Observable::X2, Observable::P2, Observable::XmSymmetrized}) {
    if (v == observable_name(o)) return o;
  }
  s.fail(key, "unknown observable '" + v + "'");
}

SystemParams parse_system(const ptree& root) {
  SystemParams p;

  const Section mech = section(root, "mechanics");
  if (!mech.present()) throw ConfigError("missing section [mechanics]");
  p.mech.omega_m = hz_to_rad(mech.number("omega_m_hz"));
  mech.exactly_one("quality_factor", "gamma_m_hz");
  p.mech.gamma_m = mech.has("gamma_m_hz") ? hz_to_rad(mech.number("gamma_m_hz"))
                                           : p.mech.omega_m / mech.number("quality_factor");
  p.mech.temperature = mech.number("temperature_k");

  const Section cav = section(root, "cavity");
  if (!cav.present()) throw ConfigError("missing section [cavity]");
  p.cavity.kappa = hz_to_rad(cav.number("kappa_hz"));
  cav.at_most_one("detuning_over_kappa", "detuning_hz");
  p.cavity.detuning = cav.has("detuning_hz") ? hz_to_rad(cav.number("detuning_hz"))
                                              : cav.number("detuning_over_kappa", 0.0) * p.cavity.kappa;
  p.cavity.g0 = hz_to_rad(cav.number("g0_hz"));
  const double wavelength = cav.number("wavelength_m", 852e-9);
  if (!(wavelength > 0.0)) cav.fail("wavelength_m", "must be positive");
  p.cavity.omega_L = kTwoPi * kSpeedOfLight / wavelength;

  const Section loss = section(root, "losses");
  p.losses.eta1 = loss.number("eta1", 1.0);
  p.losses.eta2 = loss.number("eta2", 1.0);
  p.losses.etaT = loss.number("eta_t", 1.0);
  p.losses.etaAux = loss.number("eta_aux", 1.0);

  const Section drive = section(root, "drive");
  p.drive.p1 = drive.number("p1_w", 0.0);
  p.drive.pAuxMeasured = drive.number("p_aux_measured_w", 0.0);
  p.drive.auxLockPhase = deg_to_rad(drive.number("lock_phase_deg", 0.0));

  const Section loop = section(root, "loop");
  if (!loop.present()) throw ConfigError("missing section [loop]");
  loop.exactly_one("tau_seconds", "omega_m_tau_over_pi");
  p.loop.tau = loop.has("tau_seconds") ? loop.number("tau_seconds")
                                       : loop.number("omega_m_tau_over_pi") * kPi / p.mech.omega_m;
  if (loop.has("phi_deg")) {
    p.loop.mode = PhaseMode::Direct;
    p.loop.phi = deg_to_rad(loop.number("phi_deg"));
  } else {
    p.loop.mode = PhaseMode::FromLock;
  }
  p.loop.lockOffset = deg_to_rad(loop.number("lock_offset_deg", 0.0));

  try {
    p.validate();
    (void)p.drive.aux_power(p.losses);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("invalid parameters: ") + e.what());
  }
  return p;
}

std::optional<SweepSpec> parse_sweep(const ptree& root, const SystemParams& base,
                                     const CouplingOverride& couplings) {
  const Section s = section(root, "sweep");
  if (!s.present()) return std::nullopt;
  SweepSpec spec;
  spec.baseline = base;
  spec.couplings = couplings;
  const auto axis = parse_axis(s.text("axis"));
  if (!axis) s.fail("axis", "unknown axis '" + s.text("axis") + "'");
  spec.axis = *axis;
  spec.start = s.number("start");
  spec.stop = s.number("stop");
  spec.points = s.count("points", 0);
  if (spec.points < 2) s.fail("points", "at least two points are required");
  const std::string spacing = s.has("spacing") ? s.text("spacing") : "linear";
  if (spacing == "linear") {
    spec.spacing = Spacing::Linear;
  } else if (spacing == "log") {
    spec.spacing = Spacing::Log;
  } else {
    s.fail("spacing", "expected linear or log");
  }
  const std::string model = s.has("model") ? s.text("model") : "reduced";
  if (model == "reduced") {
    spec.model = ModelKind::Reduced;
  } else if (model == "full") {
    spec.model = ModelKind::Full;
  } else {
    s.fail("model", "expected reduced or full");
  }
  if (s.has("series_axis") != s.has("series_values")) {
    throw ConfigError("[sweep] series_axis and series_values must be given together");
  }
  if (s.has("series_axis")) {
    const auto series = parse_axis(s.text("series_axis"));
    if (!series) s.fail("series_axis", "unknown axis '" + s.text("series_axis") + "'");
    if (*series == spec.axis) s.fail("series_axis", "must differ from axis");
    spec.seriesAxis = series;
    spec.seriesValues = s.numbers("series_values");
  }
  return spec;
}

std::optional<OptimizeConfig> parse_optimize(const ptree& root) {
  const Section s = section(root, "optimize");
  if (!s.present()) return std::nullopt;
  OptimizeConfig c;
  for (const auto& name : s.list("variables")) {
    const std::string key = name + "_bounds";
    if (!schema().at("optimize").count(key)) s.fail("variables", "unknown variable '" + name + "'");
    const std::vector<double> b = s.numbers(key);
    if (b.size() != 2 || !(b[0] < b[1])) s.fail(key, "expected 'lower, upper' with lower < upper");
    VariableBounds v{};
    double scale = 1.0;
    if (name == "detuning_over_kappa") {
      v.variable = FreeVariable::DetuningOverKappa;
    } else if (name == "phi_deg") {
      v.variable = FreeVariable::Phi;
      scale = kPi / 180.0;
    } else if (name == "omega_m_tau_over_pi") {
      v.variable = FreeVariable::OmegaTau;
      scale = kPi;
    } else if (name == "g1_hz") {
      v.variable = FreeVariable::G1;
      scale = kTwoPi;
    } else if (name == "g2_hz") {
      v.variable = FreeVariable::G2;
      scale = kTwoPi;
    } else {
      v.variable = FreeVariable::G2OverG1;
    }
    v.lower = b[0] * scale;
    v.upper = b[1] * scale;
    c.variables.push_back(v);
  }
  for (const auto& [key, value] : root.find("optimize")->second) {
    (void)value;
    const auto suffix = key.rfind("_bounds");
    if (suffix == std::string::npos || suffix + 7 != key.size()) continue;
    const std::string name = key.substr(0, suffix);
    const auto listed = s.list("variables");
    if (std::find(listed.begin(), listed.end(), name) == listed.end()) {
      s.fail(key, "bounds given for a variable that is not free");
    }
  }
  c.gridPoints = s.count("grid_points", 11);
  if (c.gridPoints < 2) s.fail("grid_points", "at least two points are required");
  c.tolerance = s.number("tolerance", 1e-8);
  c.marginFactor = s.number("margin_factor", 1e-3);
  return c;
}

SpectrumConfig parse_spectrum(const ptree& root) {
  SpectrumConfig c;
  const Section s = section(root, "spectrum");
  if (!s.present()) return c;
  if (s.has("observable")) c.observable = parse_observable(s, "observable");
  if (s.has("start_hz") != s.has("stop_hz")) {
    throw ConfigError("[spectrum] start_hz and stop_hz must be given together");
  }
  c.startHz = s.maybe("start_hz");
  c.stopHz = s.maybe("stop_hz");
  if (c.startHz && !(*c.startHz < *c.stopHz)) s.fail("stop_hz", "must exceed start_hz");
  c.points = s.count("points", c.points);
  if (c.points < 2) s.fail("points", "at least two points are required");
  c.spanLinewidths = s.number("span_linewidths", c.spanLinewidths);
  if (!(c.spanLinewidths > 0.0)) s.fail("span_linewidths", "must be positive");
  return c;
}

std::optional<CalibrationConfig> parse_calibration(const ptree& root, const SystemParams& p,
                                                   const std::string& baseDir) {
  const Section s = section(root, "calibration");
  if (!s.present()) return std::nullopt;
  CalibrationConfig c;
  std::filesystem::path file(s.text("spectrum_file"));
  if (file.is_relative()) file = std::filesystem::path(baseDir) / file;
  c.spectrumFile = file.string();
  c.setup.d0 = s.number("d0");
  c.setup.eta1 = s.number("eta1", p.losses.eta1);
  c.setup.lockAngle = deg_to_rad(s.number("lock_angle_deg", 90.0));
  c.setup.loAmplitude = s.number("lo_amplitude", 0.0);
  c.options.windowLinewidths = s.maybe("window_linewidths");
  c.options.tailCorrection = s.flag("tail_correction", true);
  c.calibArea = s.maybe("calib_area");
  c.calibOccupation = s.maybe("calib_occupation");
  if (c.calibArea.has_value() != c.calibOccupation.has_value()) {
    throw ConfigError("[calibration] calib_area and calib_occupation must be given together");
  }
  c.normalizeBackground = s.flag("normalize_background", false);
  return c;
}

RegimesConfig parse_regimes(const ptree& root) {
  RegimesConfig c;
  const Section s = section(root, "regimes");
  if (!s.present()) return c;
  c.eta = s.number("eta", c.eta);
  c.ratioStart = s.number("ratio_start", c.ratioStart);
  c.ratioStop = s.number("ratio_stop", c.ratioStop);
  c.points = s.count("points", c.points);
  if (!(c.eta > 0.0 && c.eta <= 1.0)) s.fail("eta", "must lie in (0, 1]");
  if (!(c.ratioStart > 0.0 && c.ratioStart < c.ratioStop)) {
    s.fail("ratio_stop", "need 0 < ratio_start < ratio_stop");
  }
  if (c.points < 2) s.fail("points", "at least two points are required");
  return c;
}

}  // namespace

ScenarioConfig parse_config(std::istream& in, const std::string& baseDir) {
  ptree root;
  try {
    boost::property_tree::ini_parser::read_ini(in, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.message() + " (line " +
                      std::to_string(e.line()) + ")");
  }
  check_schema(root);

  ScenarioConfig c;
  c.params = parse_system(root);
  const Section cpl = section(root, "couplings");
  if (auto g1 = cpl.maybe("g1_hz")) c.couplings.g1 = hz_to_rad(*g1);
  if (auto g2 = cpl.maybe("g2_hz")) c.couplings.g2 = hz_to_rad(*g2);
  if ((c.couplings.g1 && *c.couplings.g1 < 0.0) || (c.couplings.g2 && *c.couplings.g2 < 0.0)) {
    throw ConfigError("[couplings] couplings must be nonnegative");
  }
  c.sweep = parse_sweep(root, c.params, c.couplings);
  c.optimize = parse_optimize(root);
  c.spectrum = parse_spectrum(root);
  c.calibration = parse_calibration(root, c.params, baseDir);
  c.regimes = parse_regimes(root);
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  const std::filesystem::path p(path);
  return parse_config(in, p.has_parent_path() ? p.parent_path().string() : ".");
}

}  // namespace cfb
