#include "cfb/lorentzian_fit.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

#include "cfb/constants.hpp"
#include "cfb/errors.hpp"

namespace cfb {

namespace {

// Residuals in scaled coordinates u = (x - x0)/s, v = y/yScale.
// Parameters: (offset, amplitude, center, halfWidth).
struct Residuals {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const std::vector<double>& u;
  const std::vector<double>& v;

  int inputs() const { return 4; }
  int values() const { return static_cast<int>(u.size()); }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
    for (int i = 0; i < values(); ++i) {
      const double t = (u[i] - p(2)) / p(3);
      f(i) = p(0) + p(1) / (1.0 + t * t) - v[i];
    }
    return 0;
  }

  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& j) const {
    for (int i = 0; i < values(); ++i) {
      const double t = (u[i] - p(2)) / p(3);
      const double q = 1.0 / (1.0 + t * t);
      j(i, 0) = 1.0;
      j(i, 1) = q;
      j(i, 2) = p(1) * q * q * 2.0 * t / p(3);
      j(i, 3) = p(1) * q * q * 2.0 * t * t / p(3);
    }
    return 0;
  }
};

}  // namespace

double LorentzianFit::operator()(double x) const {
  const double t = (x - center) / halfWidth;
  return offset + amplitude / (1.0 + t * t);
}

double LorentzianFit::peak_area() const { return amplitude * kPi * std::abs(halfWidth); }

LorentzianFit fit_lorentzian(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ParameterError("fit data sizes differ");
  if (x.size() < 5) throw ParameterError("a Lorentzian fit needs at least 5 points");

  const auto peak = std::max_element(y.begin(), y.end());
  const std::size_t ip = static_cast<std::size_t>(peak - y.begin());
  const double yMax = *peak;
  const double yMin = *std::min_element(y.begin(), y.end());
  if (!(yMax > 0.0)) throw ParameterError("fit data has no positive peak");
  const double halfLevel = yMin + 0.5 * (yMax - yMin);

  std::size_t lo = ip;
  while (lo > 0 && y[lo] > halfLevel) --lo;
  std::size_t hi = ip;
  while (hi + 1 < y.size() && y[hi] > halfLevel) ++hi;
  double hw0 = 0.5 * (x[hi] - x[lo]);
  if (!(hw0 > 0.0)) hw0 = x[1] - x[0];

  const double x0 = x[ip];
  const double s = hw0;
  std::vector<double> u(x.size());
  std::vector<double> v(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    u[i] = (x[i] - x0) / s;
    v[i] = y[i] / yMax;
  }

  Eigen::VectorXd p(4);
  p << yMin / yMax, (yMax - yMin) / yMax, 0.0, 1.0;

  Residuals functor{u, v};
  Eigen::LevenbergMarquardt<Residuals> lm(functor);
  lm.parameters.xtol = 1e-14;
  lm.parameters.ftol = 1e-14;
  lm.parameters.maxfev = 2000;
  const auto status = lm.minimize(p);

  LorentzianFit fit;
  fit.offset = p(0) * yMax;
  fit.amplitude = p(1) * yMax;
  fit.center = x0 + p(2) * s;
  fit.halfWidth = std::abs(p(3)) * s;
  fit.iterations = static_cast<int>(lm.iter);
  fit.converged = status == Eigen::LevenbergMarquardtSpace::RelativeReductionTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::RelativeErrorTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::RelativeErrorAndReductionTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::CosinusTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::XtolTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::FtolTooSmall ||
                  status == Eigen::LevenbergMarquardtSpace::GtolTooSmall;
  Eigen::VectorXd f(u.size());
  functor(p, f);
  fit.residualNorm = std::sqrt(f.squaredNorm() / static_cast<double>(u.size()));
  return fit;
}

}  // namespace cfb
