#include "chermnykh/model.hpp"

#include <cmath>
#include <string>

#include <fmt/core.h>

#include "chermnykh/error.hpp"

namespace chermnykh {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::NonPositiveInput: return "NonPositiveInput";
    case ErrorCode::NegativeFactor: return "NegativeFactor";
    case ErrorCode::SingularityAtPrimary: return "SingularityAtPrimary";
    case ErrorCode::Singularity: return "Singularity";
    case ErrorCode::NegativeRadicand: return "NegativeRadicand";
    case ErrorCode::DegenerateTriangular: return "DegenerateTriangular";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ConvergedToPrimary: return "ConvergedToPrimary";
    case ErrorCode::RootNotBracketed: return "RootNotBracketed";
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::NotStable: return "NotStable";
    case ErrorCode::DegenerateFrequencies: return "DegenerateFrequencies";
    case ErrorCode::GaugeUnreachable: return "GaugeUnreachable";
    case ErrorCode::KreinSignature: return "KreinSignature";
    case ErrorCode::SingularityEncountered: return "SingularityEncountered";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

namespace {

constexpr double kRadiationConstant = 5.6e-5;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::ParameterOutOfRange, what);
}

// Distances to both primaries, rejecting points inside the evaluation guard.
struct Geometry {
  double dx1, dx2, y, r1, r2;
};

Geometry geometry(double x, double y, const SystemParams& p) {
  const double dx1 = x + p.mu;
  const double dx2 = x + p.mu - 1.0;
  const double r1 = std::hypot(dx1, y);
  const double r2 = std::hypot(dx2, y);
  if (r2 < kEvaluationGuard || (r1 < kEvaluationGuard && p.q1() > 0.0)) {
    throw Error(ErrorCode::SingularityAtPrimary,
                fmt::format("point ({}, {}) inside the guard of a primary", x, y));
  }
  return {dx1, dx2, y, r1, r2};
}

// s^2 = x^2 + y^2 + T^2 for the belt term.
double belt_s2(double x, double y, const SystemParams& p) {
  const double s2 = x * x + y * y + p.T() * p.T();
  if (p.Mb() > 0.0 && s2 == 0.0) throw Error(ErrorCode::Singularity, "belt potential at r = T = 0");
  return s2;
}

}  // namespace

double SystemParams::belt_denominator() const noexcept {
  return std::pow(rc * rc + T() * T(), 1.5);
}

double mass_reduction_factor(double radius_cm, double density, double chi, bool clamp) {
  if (!(radius_cm > 0.0) || !(density > 0.0) || !(chi >= 0.0)) {
    throw Error(ErrorCode::NonPositiveInput, "radius and density must be > 0, chi >= 0");
  }
  double q1 = 1.0 - kRadiationConstant * chi / (radius_cm * density);
  if (q1 < 0.0) {
    if (!clamp) throw Error(ErrorCode::NegativeFactor, "radiation pressure exceeds gravity");
    q1 = 0.0;
  }
  return std::min(q1, 1.0);
}

SystemParams build_system(const ModelInputs& in) {
  SystemParams p;
  require(std::isfinite(in.mu) && in.mu > 0.0 && in.mu <= 0.5, "mu must lie in (0, 1/2]");
  double q1 = in.q1;
  if (in.particle) {
    q1 = mass_reduction_factor(in.particle->radius_cm, in.particle->density, in.particle->chi, true);
    p.radiation.particle = in.particle;
  }
  require(std::isfinite(q1) && q1 >= 0.0 && q1 <= 1.0, "q1 must lie in [0, 1]");
  require(std::isfinite(in.A2) && in.A2 >= 0.0, "A2 must be >= 0");
  require(std::isfinite(in.Mb) && in.Mb >= 0.0, "Mb must be >= 0");
  require(std::isfinite(in.flatness) && in.flatness >= 0.0, "belt flatness must be >= 0");
  require(std::isfinite(in.core) && in.core >= 0.0, "belt core must be >= 0");

  p.mu = in.mu;
  p.radiation.q1 = q1;
  p.A2 = in.A2;
  p.belt = {in.Mb, in.flatness, in.core};
  if (in.rc) {
    require(std::isfinite(*in.rc) && *in.rc >= 0.0, "rc override must be >= 0");
    p.rc = *in.rc;
    p.rc_overridden = true;
  } else {
    p.rc = std::sqrt((1.0 - in.mu) * std::cbrt(q1 * q1) + in.mu * in.mu);
  }
  const double denom = p.rc * p.rc + p.T() * p.T();
  double n2 = 1.0 + 1.5 * p.A2;
  if (p.Mb() > 0.0) {
    require(denom > 0.0, "rc and T both zero with a massive belt");
    n2 += 2.0 * p.Mb() * p.rc / std::pow(denom, 1.5);
  }
  p.n = std::sqrt(n2);
  return p;
}

double belt_potential_planar(double r, const BeltProfile& belt) {
  if (belt.mass == 0.0) return 0.0;
  const double s2 = r * r + belt.T() * belt.T();
  if (s2 == 0.0) throw Error(ErrorCode::Singularity, "belt potential at r = T = 0");
  return -belt.mass / std::sqrt(s2);
}

std::array<double, 2> primary_distances(double x, double y, const SystemParams& p) noexcept {
  return {std::hypot(x + p.mu, y), std::hypot(x + p.mu - 1.0, y)};
}

double effective_potential(double x, double y, const SystemParams& p) {
  const Geometry g = geometry(x, y, p);
  const double n2 = p.n * p.n;
  double omega = 0.5 * n2 * (x * x + y * y) + p.mu / g.r2 +
                 p.mu * p.A2 / (2.0 * g.r2 * g.r2 * g.r2);
  if (p.q1() > 0.0) omega += (1.0 - p.mu) * p.q1() / g.r1;
  if (p.Mb() > 0.0) omega += p.Mb() / std::sqrt(belt_s2(x, y, p));
  return omega;
}

Gradient potential_gradient(double x, double y, const SystemParams& p) {
  const Geometry g = geometry(x, y, p);
  const double n2 = p.n * p.n;
  const double r2_3 = g.r2 * g.r2 * g.r2;
  const double r2_5 = r2_3 * g.r2 * g.r2;
  // Coefficient multiplying (x - x_i) or y for each attracting term.
  double k1 = 0.0;
  if (p.q1() > 0.0) k1 = (1.0 - p.mu) * p.q1() / (g.r1 * g.r1 * g.r1);
  const double k2 = p.mu / r2_3 + 1.5 * p.mu * p.A2 / r2_5;
  double kb = 0.0;
  if (p.Mb() > 0.0) kb = p.Mb() / std::pow(belt_s2(x, y, p), 1.5);
  return {n2 * x - k1 * g.dx1 - k2 * g.dx2 - kb * x,
          n2 * y - k1 * y - k2 * y - kb * y};
}

Hessian potential_hessian(double x, double y, const SystemParams& p) {
  const Geometry g = geometry(x, y, p);
  const double n2 = p.n * p.n;
  Hessian h{n2, 0.0, n2};

  // m / r contributes m (3 d_i d_j / r^5 - delta_ij / r^3).
  auto add_inverse = [&h](double m, double dx, double dy, double r) {
    const double r2 = r * r;
    const double r3 = r2 * r;
    const double r5 = r3 * r2;
    h.xx += m * (3.0 * dx * dx / r5 - 1.0 / r3);
    h.xy += m * (3.0 * dx * dy / r5);
    h.yy += m * (3.0 * dy * dy / r5 - 1.0 / r3);
  };
  if (p.q1() > 0.0) add_inverse((1.0 - p.mu) * p.q1(), g.dx1, y, g.r1);
  add_inverse(p.mu, g.dx2, y, g.r2);

  // m / (2 r^3) contributes (m / 2)(15 d_i d_j / r^7 - 3 delta_ij / r^5).
  if (p.A2 > 0.0) {
    const double m = 0.5 * p.mu * p.A2;
    const double r2 = g.r2 * g.r2;
    const double r5 = r2 * r2 * g.r2;
    const double r7 = r5 * r2;
    h.xx += m * (15.0 * g.dx2 * g.dx2 / r7 - 3.0 / r5);
    h.xy += m * (15.0 * g.dx2 * y / r7);
    h.yy += m * (15.0 * y * y / r7 - 3.0 / r5);
  }
  if (p.Mb() > 0.0) {
    const double s2 = belt_s2(x, y, p);
    const double s3 = s2 * std::sqrt(s2);
    const double s5 = s3 * s2;
    h.xx += p.Mb() * (3.0 * x * x / s5 - 1.0 / s3);
    h.xy += p.Mb() * (3.0 * x * y / s5);
    h.yy += p.Mb() * (3.0 * y * y / s5 - 1.0 / s3);
  }
  return h;
}

MomentumState to_momentum(const VelocityState& s, double n) noexcept {
  return {s.x, s.y, s.vx - n * s.y, s.vy + n * s.x};
}

VelocityState to_velocity(const MomentumState& s, double n) noexcept {
  return {s.x, s.y, s.px + n * s.y, s.py - n * s.x};
}

double jacobi_constant(const VelocityState& s, const SystemParams& p) {
  return 2.0 * effective_potential(s.x, s.y, p) - s.vx * s.vx - s.vy * s.vy;
}

std::array<double, 4> eom_rhs(const VelocityState& s, const SystemParams& p) {
  const Gradient g = potential_gradient(s.x, s.y, p);
  return {s.vx, s.vy, 2.0 * p.n * s.vy + g.x, -2.0 * p.n * s.vx + g.y};
}

}  // namespace chermnykh
