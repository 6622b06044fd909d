#pragma once

#include <array>
#include <complex>

#include <Eigen/Dense>

#include "chermnykh/linearize.hpp"

namespace chermnykh {

/// Canonical coordinates ordered (Q1, Q2, P1, P2).
using NormalCoordinates = std::array<double, 4>;

/// Eigen-solutions of A X = 0. Slot k holds the solution with index k + 1: slots 0, 1 are
/// lambda = +i omega_j, slots 2, 3 the conjugate-frequency partners lambda = -i omega_j.
struct EigenSolutionSet {
  std::array<Eigen::Vector4cd, 4> vectors;
  std::array<std::complex<double>, 4> K{};
  std::array<double, 2> omega{};
  std::array<double, 2> krein{};           // Im(v^T S conj(v)) for the unscaled ratio-chain vector
  double nullspace_residual = 0.0;          // max |A(lambda) X| over the four vectors
  std::array<double, 2> normality_residual{};  // |<X_j, X_{j+2}> - 1|
};

/// Ratio-chain vector (x, y, px, py) at a given lambda, unscaled (K = 1).
Eigen::Vector4cd ratio_chain_vector(const QuadraticCoeffs& c, std::complex<double> lambda);

/// The 4x4 matrix A(lambda) whose null vectors are the eigen-solutions.
Eigen::Matrix4cd characteristic_matrix(const QuadraticCoeffs& c, std::complex<double> lambda);

/// Symmetric matrix of H2 = X^T H X / 2 in (x, y, px, py).
Eigen::Matrix4d hamiltonian_matrix(const QuadraticCoeffs& c);

/// Standard symplectic form [[0, I], [-I, 0]].
Eigen::Matrix4d symplectic_form();

/// Solutions scaled by K_j fixed from the normality conditions and the J11 = J12 = 0 gauge.
EigenSolutionSet eigen_solution_sets(const QuadraticCoeffs& c, const StabilityReport& report);

/// Closed-form scalars as printed (complex where their radicands are negative), next to the
/// h_j implied by the numerically fixed K_j.
struct PrintedScalars {
  std::array<std::complex<double>, 2> M{};
  std::array<std::complex<double>, 2> M_star{};
  std::array<std::complex<double>, 2> M_bar{};
  std::array<std::complex<double>, 2> h_printed{};
  std::array<std::complex<double>, 2> h_numeric{};
};

PrintedScalars printed_scalars(const QuadraticCoeffs& c, const StabilityReport& report);

struct NormalFormTransform {
  Eigen::Matrix4d J = Eigen::Matrix4d::Zero();  // (Q1, Q2, P1, P2) -> (x, y, px, py)
  QuadraticCoeffs coeffs;
  double omega1 = 0.0;
  double omega2 = 0.0;
  std::array<double, 2> residual_normality{};
  double residual_canonical = 0.0;  // ||J^T S J - S||_inf
  double residual_diagonal = 0.0;   // ||J^T H J - diag(w1^2, -w2^2, 1, -1)||_inf
  double residual_imaginary = 0.0;  // largest imaginary part dropped from the complex pattern
  std::array<double, 2> column_rescale{};
  EigenSolutionSet solutions;
};

NormalFormTransform build_transform(const QuadraticCoeffs& c, const StabilityReport& report);

struct ActionAngle {
  double I1 = 0.0;
  double I2 = 0.0;
  double phi1 = 0.0;
  double phi2 = 0.0;
};

/// I_j = (P_j^2 + w_j^2 Q_j^2) / (2 w_j), with Q_j = sqrt(2 I_j / w_j) sin(phi_j) and
/// P_j = sqrt(2 w_j I_j) cos(phi_j). Angles are wrapped to [0, 2 pi); zero action maps to phi = 0.
ActionAngle to_action_angle(const NormalCoordinates& qp, double omega1, double omega2);
NormalCoordinates from_action_angle(const ActionAngle& aa, double omega1, double omega2);

/// w1 I1 - w2 I2.
double normal_form_H2(double I1, double I2, double omega1, double omega2);

/// H2 evaluated directly on an offset state (x, y, px, py) relative to L4.
double quadratic_hamiltonian(const MomentumState& offset, const QuadraticCoeffs& c);

/// Linear libration about L4: phi1 = w1 t + phi1_0, phi2 = -w2 t + phi2_0, X = J T.
/// Returns the offset state relative to L4 in momentum form.
MomentumState linear_orbit(const ActionAngle& initial, double t, const NormalFormTransform& nf);

/// Largest position displacement |(x, y)| reached by a single-mode orbit of unit action.
double unit_action_amplitude(const NormalFormTransform& nf, int mode);

}  // namespace chermnykh
