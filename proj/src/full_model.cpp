#include "cfb/full_model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "cfb/errors.hpp"
#include "cfb/parallel.hpp"

namespace cfb {

namespace {

constexpr double kMinRcond = 1e-12;
constexpr double kRealTolerance = 1e-10;

enum Row { kXm = 0, kPm, kX1, kP1, kX2, kP2 };
enum Input { kTh = 0, kX1In, kP1In, kXAux, kPAux };

int row_of(Observable o) {
  switch (o) {
    case Observable::Xm:
    case Observable::XmSymmetrized:
      return kXm;
    case Observable::Pm:
      return kPm;
    case Observable::X1:
      return kX1;
    case Observable::P1:
      return kP1;
    case Observable::X2:
      return kX2;
    case Observable::P2:
      return kP2;
  }
  return kXm;
}

double unsymmetrized(const ModelParams& p, int row, double omega) {
  const FrequencyResponse plus = assemble(p, omega);
  const FrequencyResponse minus = assemble(p, -omega);
  const Matrix5 sIn = input_spectral_matrix(p.mech, omega);

  const Eigen::Matrix<Complex, 1, 5> left = plus.C.row(row);
  const Eigen::Matrix<Complex, 5, 1> right = minus.C.row(row).transpose();
  const Complex s = (left * sIn * right)(0, 0);

  // Scale of the individual contributions, used to judge the imaginary residue.
  double scale = 0.0;
  for (int a = 0; a < 5; ++a) {
    for (int b = 0; b < 5; ++b) {
      scale += std::abs(left(a)) * std::abs(sIn(a, b)) * std::abs(right(b));
    }
  }
  const double eps = std::numeric_limits<double>::epsilon();
  if (std::abs(s.imag()) > kRealTolerance * std::abs(s.real()) + 64.0 * eps * scale) {
    std::ostringstream os;
    os << "spectral density has a non-negligible imaginary part at omega = " << omega;
    throw NonConvergenceError(os.str());
  }
  return s.real();
}

}  // namespace

const char* observable_name(Observable o) {
  switch (o) {
    case Observable::Xm:
      return "X_m";
    case Observable::Pm:
      return "P_m";
    case Observable::X1:
      return "x_1";
    case Observable::P1:
      return "p_1";
    case Observable::X2:
      return "x_2";
    case Observable::P2:
      return "p_2";
    case Observable::XmSymmetrized:
      return "X_m_sym";
  }
  return "?";
}

FrequencyResponse assemble(const ModelParams& p, double omega) {
  const double k = p.kappa;
  const double d = p.detuning;
  const double gm = p.mech.gamma_m;
  const double om = p.mech.omega_m;
  const Complex delay = std::polar(1.0, omega * p.tau);
  const double c = std::cos(p.phi);
  const double s = std::sin(p.phi);
  const double fbA = std::sqrt(p.eta) * k;
  const double fbB = std::sqrt(p.eta * k);
  const double aux = std::sqrt((1.0 - p.eta) * k);

  FrequencyResponse r;
  r.omega = omega;
  r.A.setZero();
  r.B.setZero();

  r.A(kXm, kPm) = om;
  r.A(kPm, kXm) = -om;
  r.A(kPm, kPm) = -gm;
  r.A(kPm, kX1) = -2.0 * p.g1;
  r.A(kPm, kX2) = -2.0 * p.g2;

  r.A(kX1, kX1) = -k / 2.0;
  r.A(kX1, kP1) = -d;
  r.A(kP1, kXm) = -2.0 * p.g1;
  r.A(kP1, kX1) = d;
  r.A(kP1, kP1) = -k / 2.0;

  r.A(kX2, kX1) = -fbA * c * delay;
  r.A(kX2, kP1) = fbA * s * delay;
  r.A(kX2, kX2) = -k / 2.0;
  r.A(kX2, kP2) = -d;
  r.A(kP2, kXm) = -2.0 * p.g2;
  r.A(kP2, kX1) = -fbA * s * delay;
  r.A(kP2, kP1) = -fbA * c * delay;
  r.A(kP2, kX2) = d;
  r.A(kP2, kP2) = -k / 2.0;

  r.B(kPm, kTh) = -std::sqrt(2.0);
  r.B(kX1, kX1In) = -std::sqrt(k);
  r.B(kP1, kP1In) = -std::sqrt(k);
  r.B(kX2, kX1In) = -fbB * c * delay;
  r.B(kX2, kP1In) = fbB * s * delay;
  r.B(kX2, kXAux) = -aux;
  r.B(kP2, kX1In) = -fbB * s * delay;
  r.B(kP2, kP1In) = -fbB * c * delay;
  r.B(kP2, kPAux) = -aux;

  Matrix6 m = r.A;
  m.diagonal().array() += Complex(0.0, omega);
  const Eigen::PartialPivLU<Matrix6> lu(m);
  r.rcond = lu.rcond();
  if (!(r.rcond >= kMinRcond)) {
    std::ostringstream os;
    os << "A + i omega is singular at omega = " << omega << " (rcond = " << r.rcond << ")";
    throw SingularMatrixError(os.str(), omega);
  }
  r.C = -lu.solve(r.B);
  return r;
}

Matrix5 input_spectral_matrix(const MechanicalMode& mech, double omega) {
  Matrix5 s = Matrix5::Zero();
  s(kTh, kTh) = thermal_spectrum(mech, omega);
  const Complex half(0.5, 0.0);
  const Complex ihalf(0.0, 0.5);
  for (int port : {kX1In, kXAux}) {
    s(port, port) = half;
    s(port, port + 1) = ihalf;
    s(port + 1, port) = -ihalf;
    s(port + 1, port + 1) = half;
  }
  return s;
}

double observable_density(const ModelParams& params, Observable observable, double omega) {
  const int row = row_of(observable);
  if (observable == Observable::XmSymmetrized) {
    return 0.5 * (unsymmetrized(params, row, omega) + unsymmetrized(params, row, -omega));
  }
  return unsymmetrized(params, row, omega);
}

Spectrum observable_spectrum(const ModelParams& params, Observable observable,
                             const FrequencyGrid& grid, unsigned workers) {
  params.validate();
  Spectrum out;
  out.omega = grid.omega();
  out.values.resize(grid.size());
  out.observable = observable_name(observable);
  out.model = "full";
  parallel_for(grid.size(), workers,
               [&](std::size_t i) { out.values[i] = observable_density(params, observable, grid[i]); });
  return out;
}

}  // namespace cfb
