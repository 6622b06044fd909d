#pragma once

#include <array>
#include <optional>

namespace chermnykh {

/// Evaluation guard radius around each primary, in units of the primary separation.
inline constexpr double kEvaluationGuard = 1e-9;

/// Grain properties (CGS) from which the mass reduction factor can be derived.
struct ParticleProperties {
  double radius_cm = 0.0;
  double density = 0.0;  // g/cm^3
  double chi = 0.0;      // radiation pressure efficiency
};

/// Radiation of the bigger primary, expressed through q1 = 1 - F_p/F_g.
struct RadiationSource {
  double q1 = 1.0;
  std::optional<ParticleProperties> particle;

  double epsilon() const noexcept { return 1.0 - q1; }
};

/// Planar reduction of a Miyamoto-Nagai belt. T is always flatness + core.
struct BeltProfile {
  double mass = 0.0;
  double flatness = 0.0;
  double core = 0.0;

  double T() const noexcept { return flatness + core; }
};

/// Fully resolved model constants. Build with build_system(); rc and n are derived there.
struct SystemParams {
  double mu = 0.0;
  RadiationSource radiation;
  double A2 = 0.0;
  BeltProfile belt;
  double rc = 1.0;
  bool rc_overridden = false;
  double n = 1.0;

  double q1() const noexcept { return radiation.q1; }
  double epsilon() const noexcept { return radiation.epsilon(); }
  double Mb() const noexcept { return belt.mass; }
  double T() const noexcept { return belt.T(); }
  /// (rc^2 + T^2)^{3/2}, the belt denominator that recurs in every perturbation series.
  double belt_denominator() const noexcept;
};

/// Raw inputs for build_system. Defaults describe the classical problem.
struct ModelInputs {
  double mu = 0.0;
  double q1 = 1.0;
  double A2 = 0.0;
  double Mb = 0.0;
  double flatness = 0.0;
  double core = 0.0;
  std::optional<double> rc;
  std::optional<ParticleProperties> particle;
};

/// q1 = 1 - 5.6e-5 chi / (radius density). Throws NegativeFactor when the
/// result is below zero, unless `clamp` is set, in which case it is clamped to [0, 1].
double mass_reduction_factor(double radius_cm, double density, double chi, bool clamp = false);

/// Validates the inputs and derives rc^2 = (1-mu) q1^{2/3} + mu^2 (unless overridden)
/// and n^2 = 1 + 3 A2 / 2 + 2 Mb rc / (rc^2 + T^2)^{3/2}.
SystemParams build_system(const ModelInputs& in);

/// V(r, 0) = -Mb / sqrt(r^2 + T^2).
double belt_potential_planar(double r, const BeltProfile& belt);

struct Gradient {
  double x = 0.0;
  double y = 0.0;
};

struct Hessian {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;
};

double effective_potential(double x, double y, const SystemParams& p);
Gradient potential_gradient(double x, double y, const SystemParams& p);
Hessian potential_hessian(double x, double y, const SystemParams& p);

/// Distances from (x, y) to the bigger (r1) and smaller (r2) primaries.
std::array<double, 2> primary_distances(double x, double y, const SystemParams& p) noexcept;

/// Rotating-frame state with velocities.
struct VelocityState {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
};

/// Rotating-frame state with canonical momenta px = vx - n y, py = vy + n x.
struct MomentumState {
  double x = 0.0;
  double y = 0.0;
  double px = 0.0;
  double py = 0.0;
};

MomentumState to_momentum(const VelocityState& s, double n) noexcept;
VelocityState to_velocity(const MomentumState& s, double n) noexcept;

/// C = 2 Omega - vx^2 - vy^2.
double jacobi_constant(const VelocityState& s, const SystemParams& p);

/// Time derivative (vx, vy, ax, ay) of a velocity-form state.
std::array<double, 4> eom_rhs(const VelocityState& s, const SystemParams& p);

}  // namespace chermnykh
