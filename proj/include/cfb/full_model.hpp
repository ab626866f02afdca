#pragma once

#include <Eigen/Dense>

#include "cfb/params.hpp"
#include "cfb/spectrum.hpp"

namespace cfb {

using Matrix6 = Eigen::Matrix<Complex, 6, 6>;
using Matrix6x5 = Eigen::Matrix<Complex, 6, 5>;
using Matrix5 = Eigen::Matrix<Complex, 5, 5>;

/// State ordering (X_m, P_m, x1, p1, x2, p2); input ordering (xi_th, x1_in, p1_in, x_aux, p_aux).
enum class Observable { Xm, Pm, X1, P1, X2, P2, XmSymmetrized };

const char* observable_name(Observable o);

/// Drift and input matrices at one frequency and the response r = C r_in.
/// C carries the sign of the solution, C = -(A + i omega)^-1 B.
struct FrequencyResponse {
  double omega = 0.0;
  Matrix6 A;
  Matrix6x5 B;
  Matrix6x5 C;
  double rcond = 0.0;  // reciprocal condition estimate of A + i omega
};

/// Builds A(omega), B(omega) and solves for C. Throws SingularMatrixError when
/// the reciprocal condition number of A + i omega drops below 1e-12.
FrequencyResponse assemble(const ModelParams& params, double omega);

/// Input noise correlations at frequency omega.
Matrix5 input_spectral_matrix(const MechanicalMode& mech, double omega);

/// S(omega) = [C(omega) S_in(omega) C^T(-omega)]_jj for the selected observable.
double observable_density(const ModelParams& params, Observable observable, double omega);

/// Evaluates observable_density on a grid. `workers` > 1 splits the grid over threads;
/// the result does not depend on the worker count.
Spectrum observable_spectrum(const ModelParams& params, Observable observable,
                             const FrequencyGrid& grid, unsigned workers = 1);

}  // namespace cfb
