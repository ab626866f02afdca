#include "cfb/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cfb/errors.hpp"
#include "cfb/parallel.hpp"

namespace cfb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct VariableInfo {
  FreeVariable variable;
  const char* name;
};

constexpr VariableInfo kVariables[] = {
    {FreeVariable::DetuningOverKappa, "detuning_over_kappa"},
    {FreeVariable::Phi, "phi"},
    {FreeVariable::OmegaTau, "omega_m_tau"},
    {FreeVariable::G1, "g1"},
    {FreeVariable::G2, "g2"},
    {FreeVariable::G2OverG1, "g2_over_g1"},
};

using Point = std::vector<double>;

class Objective {
 public:
  explicit Objective(const OptimizationProblem& p) : p_(p) {}

  double operator()(const Point& x) const {
    try {
      const ModelParams m = apply_variables(p_.base, p_.variables, x);
      const CoolingResult r = phonon_number(m);
      const double margin = m.mech.gamma_m + r.Gamma;
      if (!(margin > p_.marginFactor * m.mech.gamma_m) || !std::isfinite(r.nBar)) return kInf;
      return r.nBar;
    } catch (const ParameterError&) {
      return kInf;
    }
  }

  Point clamp(Point x) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = std::clamp(x[i], p_.variables[i].lower, p_.variables[i].upper);
    }
    return x;
  }

 private:
  const OptimizationProblem& p_;
};

struct Vertex {
  Point x;
  double f;
};

// Bounded Nelder-Mead; trial points are projected onto the box.
int nelder_mead(const Objective& f, std::vector<Vertex>& simplex, double tol, int maxIter,
                bool& converged) {
  const std::size_t n = simplex.size() - 1;
  auto order = [&] {
    std::stable_sort(simplex.begin(), simplex.end(),
                     [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
  };
  order();
  int it = 0;
  converged = false;
  for (; it < maxIter; ++it) {
    const double best = simplex.front().f;
    const double worst = simplex.back().f;
    if (std::isfinite(worst) && worst - best <= tol * (1.0 + std::abs(best))) {
      converged = true;
      break;
    }
    Point centroid(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[v].x[i] / static_cast<double>(n);
    }
    auto along = [&](double t) {
      Point p(n);
      for (std::size_t i = 0; i < n; ++i) p[i] = centroid[i] + t * (simplex.back().x[i] - centroid[i]);
      return f.clamp(p);
    };
    const Point xr = along(-1.0);
    const double fr = f(xr);
    if (fr < simplex.front().f) {
      const Point xe = along(-2.0);
      const double fe = f(xe);
      simplex.back() = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
    } else if (fr < simplex[n - 1].f) {
      simplex.back() = {xr, fr};
    } else {
      const bool outside = fr < simplex.back().f;
      const Point xc = along(outside ? -0.5 : 0.5);
      const double fc = f(xc);
      if (fc < (outside ? fr : simplex.back().f)) {
        simplex.back() = {xc, fc};
      } else {
        for (std::size_t v = 1; v <= n; ++v) {
          for (std::size_t i = 0; i < n; ++i) {
            simplex[v].x[i] = simplex[0].x[i] + 0.5 * (simplex[v].x[i] - simplex[0].x[i]);
          }
          simplex[v].f = f(simplex[v].x);
        }
      }
    }
    order();
    // Degenerate simplex: all vertices coincide to machine precision.
    double spread = 0.0;
    for (std::size_t v = 1; v <= n; ++v) {
      for (std::size_t i = 0; i < n; ++i) {
        spread = std::max(spread, std::abs(simplex[v].x[i] - simplex[0].x[i]));
      }
    }
    if (spread == 0.0) {
      converged = std::isfinite(simplex.front().f);
      ++it;
      break;
    }
  }
  return it;
}

std::vector<Vertex> initial_simplex(const Objective& f, const Point& x0, double f0,
                                    const std::vector<double>& steps,
                                    const std::vector<VariableBounds>& bounds) {
  std::vector<Vertex> s{{x0, f0}};
  for (std::size_t i = 0; i < x0.size(); ++i) {
    Point x = x0;
    x[i] += steps[i];
    if (x[i] > bounds[i].upper) x[i] = x0[i] - steps[i];
    x = f.clamp(x);
    s.push_back({x, f(x)});
  }
  return s;
}

}  // namespace

const char* variable_name(FreeVariable v) {
  for (const auto& info : kVariables) {
    if (info.variable == v) return info.name;
  }
  return "?";
}

std::optional<FreeVariable> parse_variable(const std::string& name) {
  for (const auto& info : kVariables) {
    if (name == info.name) return info.variable;
  }
  return std::nullopt;
}

void OptimizationProblem::validate() const {
  base.validate();
  if (variables.empty()) throw ParameterError("optimization needs at least one free variable");
  if (gridPoints < 2) throw ParameterError("grid needs at least two points per dimension");
  for (const auto& v : variables) {
    if (!(std::isfinite(v.lower) && std::isfinite(v.upper) && v.lower < v.upper)) {
      throw ParameterError(std::string("bounds of ") + variable_name(v.variable) +
                           " must be finite and ordered");
    }
  }
  for (std::size_t i = 0; i < variables.size(); ++i) {
    for (std::size_t j = i + 1; j < variables.size(); ++j) {
      if (variables[i].variable == variables[j].variable) {
        throw ParameterError("free variables must be distinct");
      }
    }
  }
}

ModelParams apply_variables(ModelParams m, const std::vector<VariableBounds>& vars,
                            const Point& x) {
  std::optional<double> ratio;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    switch (vars[i].variable) {
      case FreeVariable::DetuningOverKappa:
        m.detuning = x[i] * m.kappa;
        break;
      case FreeVariable::Phi:
        m.phi = x[i];
        break;
      case FreeVariable::OmegaTau:
        m.tau = x[i] / m.mech.omega_m;
        break;
      case FreeVariable::G1:
        m.g1 = x[i];
        break;
      case FreeVariable::G2:
        m.g2 = x[i];
        break;
      case FreeVariable::G2OverG1:
        ratio = x[i];
        break;
    }
  }
  if (ratio) m.g2 = *ratio * m.g1;
  m.validate();
  return m;
}

OptimizationResult optimize(const OptimizationProblem& problem) {
  problem.validate();
  const Objective f(problem);
  const std::size_t dim = problem.variables.size();
  const std::size_t g = problem.gridPoints;

  std::size_t total = 1;
  for (std::size_t i = 0; i < dim; ++i) total *= g;

  auto grid_point = [&](std::size_t index) {
    Point x(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      const std::size_t k = index % g;
      index /= g;
      const auto& b = problem.variables[i];
      x[i] = b.lower + (b.upper - b.lower) * static_cast<double>(k) / static_cast<double>(g - 1);
    }
    return x;
  };

  std::vector<double> values(total);
  parallel_for(total, problem.workers, [&](std::size_t i) { values[i] = f(grid_point(i)); });

  OptimizationResult out;
  out.feasibleGridPoints = static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [](double v) { return std::isfinite(v); }));
  if (out.feasibleGridPoints == 0) {
    throw NoStableRegionError("no stable point found on the optimization grid");
  }
  // First minimum in grid order keeps the result independent of the worker count.
  const std::size_t bestIndex =
      static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  Point x = grid_point(bestIndex);
  double fx = values[bestIndex];
  out.gridBest = fx;

  std::vector<double> steps(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const auto& b = problem.variables[i];
    steps[i] = 0.5 * (b.upper - b.lower) / static_cast<double>(g - 1);
  }

  // Restart from the incumbent until a fresh simplex no longer improves it.
  int iterations = 0;
  bool converged = false;
  for (int restart = 0; restart < 8 && iterations < problem.maxIterations; ++restart) {
    std::vector<Vertex> simplex = initial_simplex(f, x, fx, steps, problem.variables);
    bool ok = false;
    iterations += nelder_mead(f, simplex, problem.tolerance, problem.maxIterations - iterations, ok);
    const Vertex& best = simplex.front();
    const double gain = fx - best.f;
    if (best.f < fx) {
      x = best.x;
      fx = best.f;
    }
    converged = ok;
    if (ok && gain <= problem.tolerance * (1.0 + std::abs(fx))) break;
    for (double& s : steps) s *= 0.1;
  }

  out.x = x;
  out.best = apply_variables(problem.base, problem.variables, x);
  out.result = phonon_number(out.best);
  out.margin = out.best.mech.gamma_m + out.result.Gamma;
  out.converged = converged;
  out.iterations = iterations;
  return out;
}

}  // namespace cfb
