#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cfb/params.hpp"
#include "cfb/reduced_model.hpp"

namespace cfb {

enum class FreeVariable {
  DetuningOverKappa,  // Delta / kappa
  Phi,                // rad
  OmegaTau,           // Omega_m tau (rad)
  G1,                 // rad/s
  G2,                 // rad/s
  G2OverG1,
};

const char* variable_name(FreeVariable v);
std::optional<FreeVariable> parse_variable(const std::string& name);

struct VariableBounds {
  FreeVariable variable;
  double lower;
  double upper;
};

struct OptimizationProblem {
  ModelParams base;
  std::vector<VariableBounds> variables;
  std::size_t gridPoints = 11;  // per dimension
  double tolerance = 1e-8;      // on the objective
  double marginFactor = 1e-3;   // feasible iff gamma_m + Gamma_m > marginFactor * gamma_m
  int maxIterations = 20000;
  unsigned workers = 1;

  void validate() const;
};

struct OptimizationResult {
  ModelParams best;
  CoolingResult result;
  std::vector<double> x;
  bool converged = false;
  int iterations = 0;
  double margin = 0.0;  // gamma_m + Gamma_m at the optimum (rad/s)
  double gridBest = 0.0;
  std::size_t feasibleGridPoints = 0;
};

ModelParams apply_variables(ModelParams base, const std::vector<VariableBounds>& variables,
                            const std::vector<double>& x);

/// Minimizes the reduced-model occupation: a full grid scan followed by a bounded
/// Nelder-Mead refinement from the best grid point. Throws NoStableRegionError when no
/// grid point is feasible.
OptimizationResult optimize(const OptimizationProblem& problem);

}  // namespace cfb
