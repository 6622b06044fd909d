#include "chermnykh/normalform.hpp"

#include <cmath>
#include <numbers>

#include <fmt/core.h>

#include "chermnykh/error.hpp"

namespace chermnykh {

namespace {

using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};
constexpr double kDegenerateGap = 1e-8;

// Symplectic pairing <u, w> = u^T S w (no conjugation).
cd pairing(const Eigen::Vector4cd& u, const Eigen::Vector4cd& w) {
  return u(0) * w(2) + u(1) * w(3) - u(2) * w(0) - u(3) * w(1);
}

double wrap_angle(double phi) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(phi, two_pi);
  if (r < 0.0) r += two_pi;
  if (r >= two_pi) r = 0.0;
  return r;
}

void require_stable(const StabilityReport& report) {
  if (!report.stable || !report.omega1 || !report.omega2) {
    throw Error(ErrorCode::NotStable, "normal form requires a linearly stable equilibrium");
  }
  if (std::abs(*report.omega1 - *report.omega2) < kDegenerateGap) {
    throw Error(ErrorCode::DegenerateFrequencies,
                fmt::format("omega1 = {} and omega2 = {} coincide", *report.omega1, *report.omega2));
  }
}

}  // namespace

Eigen::Vector4cd ratio_chain_vector(const QuadraticCoeffs& c, cd lambda) {
  const double n = c.n;
  const cd l2 = lambda * lambda;
  Eigen::Vector4cd v;
  v << 2.0 * n * lambda - c.G,
      l2 - n * n + 2.0 * c.E,
      n * l2 - c.G * lambda - 2.0 * n * c.E + n * n * n,
      l2 * lambda + n * n * lambda + 2.0 * c.E * lambda - n * c.G;
  return v;
}

Eigen::Matrix4cd characteristic_matrix(const QuadraticCoeffs& c, cd lambda) {
  const double n = c.n;
  Eigen::Matrix4cd a;
  a << 2.0 * c.E, c.G, lambda, -n,
       c.G, 2.0 * c.F, n, lambda,
       -lambda, n, 1.0, 0.0,
       -n, -lambda, 0.0, 1.0;
  return a;
}

Eigen::Matrix4d hamiltonian_matrix(const QuadraticCoeffs& c) {
  const double n = c.n;
  Eigen::Matrix4d h;
  h << 2.0 * c.E, c.G, 0.0, -n,
       c.G, 2.0 * c.F, n, 0.0,
       0.0, n, 1.0, 0.0,
       -n, 0.0, 0.0, 1.0;
  return h;
}

Eigen::Matrix4d symplectic_form() {
  Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
  s(0, 2) = s(1, 3) = 1.0;
  s(2, 0) = s(3, 1) = -1.0;
  return s;
}

EigenSolutionSet eigen_solution_sets(const QuadraticCoeffs& c, const StabilityReport& report) {
  require_stable(report);
  EigenSolutionSet set;
  set.omega = {*report.omega1, *report.omega2};

  // Mode 1 carries positive energy (+w1 I1), mode 2 negative (-w2 I2).
  constexpr std::array<double, 2> sigma{1.0, -1.0};
  for (int j = 0; j < 2; ++j) {
    const double w = set.omega[j];
    const Eigen::Vector4cd v = ratio_chain_vector(c, kI * w);
    const double beta = pairing(v, v.conjugate()).imag();
    set.krein[j] = beta;
    if (!(sigma[j] * beta < 0.0)) {
      throw Error(ErrorCode::KreinSignature,
                  fmt::format("mode {} has Krein sign {} incompatible with w1 I1 - w2 I2", j + 1, beta));
    }
    const double x0 = std::abs(v(0));
    if (x0 < 1e-14) {
      throw Error(ErrorCode::GaugeUnreachable, fmt::format("x component of mode {} vanishes", j + 1));
    }
    // Normality fixes |K_j|; the gauge J_{1,j} = 0 fixes its phase (K_j x_j purely imaginary).
    const double modulus = std::sqrt(-w / (2.0 * sigma[j] * beta));
    const cd K = kI * modulus * std::conj(v(0)) / x0;
    const cd K_partner = 2.0 * kI * sigma[j] * std::conj(K) / w;
    set.K[j] = K;
    set.K[j + 2] = K_partner;
    set.vectors[j] = K * v;
    set.vectors[j + 2] = K_partner * ratio_chain_vector(c, -kI * w);
  }

  for (int k = 0; k < 4; ++k) {
    const double w = set.omega[k % 2];
    const cd lambda = (k < 2 ? kI : -kI) * w;
    const double r = (characteristic_matrix(c, lambda) * set.vectors[k]).cwiseAbs().maxCoeff();
    set.nullspace_residual = std::max(set.nullspace_residual, r);
  }
  for (int j = 0; j < 2; ++j) {
    set.normality_residual[j] = std::abs(pairing(set.vectors[j], set.vectors[j + 2]) - 1.0);
  }
  return set;
}

PrintedScalars printed_scalars(const QuadraticCoeffs& c, const StabilityReport& report) {
  require_stable(report);
  const double n2 = c.n * c.n;
  const std::array<double, 2> omega{*report.omega1, *report.omega2};
  PrintedScalars s;
  const EigenSolutionSet set = eigen_solution_sets(c, report);
  for (int j = 0; j < 2; ++j) {
    const double w = omega[j];
    const double w2 = w * w;
    s.M[j] = std::sqrt(cd(w2 - 2.0 * c.F + n2));
    s.M_star[j] = std::sqrt(cd(w2 - 2.0 * c.E + n2));
    s.M_bar[j] = std::sqrt(2.0) * std::sqrt(cd(w2 - c.E - 2.0 - n2));
    s.h_printed[j] = 1.0 / (2.0 * w * s.M[j] * s.M_bar[j] * s.M_star[j] * s.M_star[j]);
    // Gauge ratio K_j / (w_j (2 n w_j - i G)).
    s.h_numeric[j] = set.K[j] / (w * (2.0 * c.n * w - kI * c.G));
  }
  return s;
}

NormalFormTransform build_transform(const QuadraticCoeffs& c, const StabilityReport& report) {
  NormalFormTransform nf;
  nf.coeffs = c;
  nf.solutions = eigen_solution_sets(c, report);
  nf.omega1 = nf.solutions.omega[0];
  nf.omega2 = nf.solutions.omega[1];
  nf.residual_normality = nf.solutions.normality_residual;

  const auto& X = nf.solutions.vectors;
  const double w1 = nf.omega1;
  const double w2 = nf.omega2;
  // Column pattern: Q1 = X1 - i w1 X3 / 2, Q2 = -X2 - i w2 X4 / 2,
  // P1 = -i X1 / w1 + X3 / 2, P2 = -i X2 / w2 - X4 / 2.
  Eigen::Matrix4cd Jc;
  Jc.col(0) = X[0] - kI * (w1 / 2.0) * X[2];
  Jc.col(1) = -X[1] - kI * (w2 / 2.0) * X[3];
  Jc.col(2) = -kI * X[0] / w1 + X[2] / 2.0;
  Jc.col(3) = -kI * X[1] / w2 - X[3] / 2.0;
  nf.residual_imaginary = Jc.imag().cwiseAbs().maxCoeff();
  nf.J = Jc.real();
  nf.J(0, 0) = 0.0;
  nf.J(0, 1) = 0.0;

  // Rescale each (Q_j, P_j) column pair so that its symplectic pairing is exactly one.
  const Eigen::Matrix4d S = symplectic_form();
  for (int j = 0; j < 2; ++j) {
    const double pair = nf.J.col(j).dot(S * nf.J.col(j + 2));
    if (!(pair > 0.0)) {
      throw Error(ErrorCode::GaugeUnreachable, fmt::format("column pair {} has pairing {}", j + 1, pair));
    }
    const double f = 1.0 / std::sqrt(pair);
    nf.column_rescale[j] = f;
    nf.J.col(j) *= f;
    nf.J.col(j + 2) *= f;
  }

  nf.residual_canonical = (nf.J.transpose() * S * nf.J - S).cwiseAbs().maxCoeff();
  Eigen::Matrix4d target = Eigen::Matrix4d::Zero();
  target.diagonal() << w1 * w1, -w2 * w2, 1.0, -1.0;
  nf.residual_diagonal =
      (nf.J.transpose() * hamiltonian_matrix(c) * nf.J - target).cwiseAbs().maxCoeff();
  return nf;
}

ActionAngle to_action_angle(const NormalCoordinates& qp, double omega1, double omega2) {
  const std::array<double, 2> w{omega1, omega2};
  std::array<double, 2> I{};
  std::array<double, 2> phi{};
  for (int j = 0; j < 2; ++j) {
    const double Q = qp[j];
    const double P = qp[j + 2];
    I[j] = (P * P + w[j] * w[j] * Q * Q) / (2.0 * w[j]);
    phi[j] = I[j] == 0.0 ? 0.0 : wrap_angle(std::atan2(std::sqrt(w[j]) * Q, P / std::sqrt(w[j])));
  }
  return {I[0], I[1], phi[0], phi[1]};
}

NormalCoordinates from_action_angle(const ActionAngle& aa, double omega1, double omega2) {
  return {std::sqrt(2.0 * aa.I1 / omega1) * std::sin(aa.phi1),
          std::sqrt(2.0 * aa.I2 / omega2) * std::sin(aa.phi2),
          std::sqrt(2.0 * omega1 * aa.I1) * std::cos(aa.phi1),
          std::sqrt(2.0 * omega2 * aa.I2) * std::cos(aa.phi2)};
}

double normal_form_H2(double I1, double I2, double omega1, double omega2) {
  return omega1 * I1 - omega2 * I2;
}

double quadratic_hamiltonian(const MomentumState& s, const QuadraticCoeffs& c) {
  return 0.5 * (s.px * s.px + s.py * s.py) + c.n * (s.y * s.px - s.x * s.py) + c.E * s.x * s.x +
         c.F * s.y * s.y + c.G * s.x * s.y;
}

MomentumState linear_orbit(const ActionAngle& initial, double t, const NormalFormTransform& nf) {
  ActionAngle now = initial;
  now.phi1 = initial.phi1 + nf.omega1 * t;
  now.phi2 = initial.phi2 - nf.omega2 * t;
  const NormalCoordinates T = from_action_angle(now, nf.omega1, nf.omega2);
  const Eigen::Vector4d X = nf.J * Eigen::Vector4d(T[0], T[1], T[2], T[3]);
  return {X(0), X(1), X(2), X(3)};
}

double unit_action_amplitude(const NormalFormTransform& nf, int mode) {
  if (mode != 1 && mode != 2) throw Error(ErrorCode::InvalidArgument, "mode must be 1 or 2");
  const int j = mode - 1;
  const double w = mode == 1 ? nf.omega1 : nf.omega2;
  Eigen::Matrix2d m;
  m.col(0) = nf.J.block<2, 1>(0, j) * std::sqrt(2.0 / w);
  m.col(1) = nf.J.block<2, 1>(0, j + 2) * std::sqrt(2.0 * w);
  return Eigen::JacobiSVD<Eigen::Matrix2d>(m).singularValues()(0);
}

}  // namespace chermnykh
