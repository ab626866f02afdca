#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cfb/calibration.hpp"
#include "cfb/full_model.hpp"
#include "cfb/optimize.hpp"
#include "cfb/params.hpp"
#include "cfb/sweep.hpp"

namespace cfb {

struct SpectrumConfig {
  Observable observable = Observable::XmSymmetrized;
  std::optional<double> startHz;
  std::optional<double> stopHz;
  std::size_t points = 2001;
  double spanLinewidths = 20.0;  // used when no explicit range is given
};

struct OptimizeConfig {
  std::vector<VariableBounds> variables;  // internal units
  std::size_t gridPoints = 11;
  double tolerance = 1e-8;
  double marginFactor = 1e-3;
};

struct CalibrationConfig {
  std::string spectrumFile;  // resolved relative to the config file
  HomodyneSetup setup;
  CalibrationOptions options;
  std::optional<double> calibArea;
  std::optional<double> calibOccupation;
  bool normalizeBackground = false;
};

struct RegimesConfig {
  double eta = 0.98;
  double ratioStart = 0.01;
  double ratioStop = 1000.0;
  std::size_t points = 51;
};

/// Parsed scenario. Frequencies are converted from Hz and angles from degrees.
struct ScenarioConfig {
  SystemParams params;
  CouplingOverride couplings;
  std::optional<SweepSpec> sweep;  // baseline filled with `params`
  std::optional<OptimizeConfig> optimize;
  SpectrumConfig spectrum;
  std::optional<CalibrationConfig> calibration;
  RegimesConfig regimes;
};

/// INI document with sections [mechanics] [cavity] [losses] [drive] [loop] [couplings]
/// [sweep] [optimize] [spectrum] [calibration] [regimes]. Unknown sections or keys are
/// rejected. Throws ConfigError.
ScenarioConfig parse_config(std::istream& in, const std::string& baseDir = ".");
ScenarioConfig load_config(const std::string& path);

}  // namespace cfb
