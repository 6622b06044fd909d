#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "chermnykh/error.hpp"
#include "chermnykh/integrate.hpp"
#include "chermnykh/normalform.hpp"
#include "support.hpp"

using namespace chermnykh;
using chermnykh::testing::classical;
using chermnykh::testing::classical_system;

namespace {

IntegrateOptions tolerance(double rel, double abs = 1e-14) {
  IntegrateOptions o;
  o.rel_tol = rel;
  o.abs_tol = std::max(abs, 1e-14);
  return o;
}

const VelocityState kReference{0.3, 0.5, 0.05, -0.1};

double distance(const VelocityState& a, const VelocityState& b) { return std::hypot(a.x - b.x, a.y - b.y); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a library error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("rest at the triangular point") {
  ModelInputs in = classical(0.01);
  in.q1 = 0.98;
  in.A2 = 0.002;
  in.Mb = 0.01;
  in.flatness = 0.01;
  const SystemParams p = build_system(in);
  const EquilibriumPoint l4 = triangular_point(p);
  IntegrateOptions o;
  o.sample_interval = 1.0;
  const Trajectory tr = integrate_orbit({l4.x, l4.y, 0, 0}, 100, p, o);
  CHECK(tr.status == TrajectoryStatus::Completed);
  REQUIRE(tr.samples.size() == 101);
  for (const auto& s : tr.samples) CHECK(std::hypot(s.state.x - l4.x, s.state.y - l4.y) < 1e-9);
  CHECK(tr.samples.back().t == 100.0);
}

TEST_CASE("samples land on the stride") {
  const SystemParams p = classical_system(0.01);
  IntegrateOptions o;
  o.sample_interval = 0.25;
  const Trajectory tr = integrate_orbit(kReference, 10, p, o);
  REQUIRE(tr.samples.size() == 41);
  for (std::size_t k = 0; k < tr.samples.size(); ++k) {
    CHECK(tr.samples[k].t == doctest::Approx(0.25 * static_cast<double>(k)).epsilon(1e-14));
    if (k > 0) CHECK(tr.samples[k].t > tr.samples[k - 1].t);
  }
  CHECK(tr.steps.accepted > 0);
}

TEST_CASE("long-period return matches the linear orbit") {
  const SystemParams p = classical_system(0.01);
  const EquilibriumPoint l4 = triangular_point(p);
  const QuadraticCoeffs c = coefficients_exact(p);
  const NormalFormTransform nf = build_transform(c, stability_analysis(c));
  const double delta = 1e-5;
  const double amp = unit_action_amplitude(nf, 2);
  const ActionAngle aa{0, delta * delta / (amp * amp), 0, 0.7};
  const MomentumState m0 = linear_orbit(aa, 0, nf);
  const VelocityState start{l4.x + m0.x, l4.y + m0.y, m0.px + m0.y, m0.py - m0.x};
  const double T2 = 2 * std::numbers::pi / nf.omega2;
  const Trajectory tr = integrate_orbit(start, T2, p, tolerance(1e-13));
  const VelocityState end = tr.samples.back().state;
  CHECK(distance(end, start) < 1e-10 + 100 * delta * delta);
  const MomentumState lin = linear_orbit(aa, T2, nf);
  CHECK(std::hypot(end.x - l4.x - lin.x, end.y - l4.y - lin.y) < 100 * delta * delta);
}

TEST_CASE("Jacobi drift at tight tolerance") {
  const SystemParams p = classical_system(0.01);
  const Trajectory tr = integrate_orbit(kReference, 100, p, tolerance(1e-12));
  CHECK(tr.status == TrajectoryStatus::Completed);
  CHECK(tr.jacobi_drift < 1e-9);
  const DriftReport report = drift_report(tr, p);
  CHECK(report.max_drift <= tr.jacobi_drift);
  CHECK(report.series.size() == tr.samples.size());
  CHECK(report.series.front() == 0.0);
}

TEST_CASE("drift report edge cases") {
  const SystemParams p = classical_system(0.01);
  Trajectory single;
  single.samples.push_back({0.0, kReference});
  CHECK(drift_report(single, p).max_drift == 0.0);

  IntegrateOptions o = tolerance(1e-8, 1e-10);
  o.sample_interval = 0.5;
  const Trajectory tr = integrate_orbit(kReference, 30, p, o);
  Trajectory mirror = tr;
  for (auto& s : mirror.samples) {
    s.state.y = -s.state.y;
    s.state.vy = -s.state.vy;
  }
  CHECK(drift_report(mirror, p).max_drift == drift_report(tr, p).max_drift);
}

TEST_CASE("tighter tolerance reduces drift") {
  const SystemParams p = classical_system(0.01);
  const double loose = integrate_orbit(kReference, 20, p, tolerance(1e-8, 1e-10)).jacobi_drift;
  const double tight = integrate_orbit(kReference, 20, p, tolerance(1e-10, 1e-12)).jacobi_drift;
  CHECK(tight * 10 <= loose);
}

TEST_CASE("convergence with tolerance") {
  const SystemParams p = classical_system(0.01);
  const VelocityState truth = integrate_orbit(kReference, 20, p, tolerance(1e-14)).samples.back().state;
  std::vector<double> errors;
  std::vector<double> steps;
  for (double tol : {1e-6, 1e-8, 1e-10}) {
    const Trajectory tr = integrate_orbit(kReference, 20, p, tolerance(tol, tol * 1e-2));
    errors.push_back(distance(tr.samples.back().state, truth));
    steps.push_back(static_cast<double>(tr.steps.accepted));
  }
  for (std::size_t k = 1; k < errors.size(); ++k) {
    CHECK(errors[k] * 30 < errors[k - 1]);
    // An eighth-order pair needs about 100^{1/8} more steps per hundredfold tightening.
    const double growth = steps[k] / steps[k - 1];
    CHECK(growth > std::pow(100.0, 1.0 / 10));
    CHECK(growth < std::pow(100.0, 1.0 / 6));
  }
}

TEST_CASE("time reversal") {
  const SystemParams p = classical_system(0.01);
  const IntegrateOptions o = tolerance(1e-12);
  const VelocityState truth = integrate_orbit(kReference, 20, p, tolerance(1e-14)).samples.back().state;
  const VelocityState out = integrate_orbit(kReference, 20, p, o).samples.back().state;
  const double one_way = distance(out, truth);
  // (x, y, vx, vy, t) -> (x, -y, -vx, vy, -t) is a symmetry of the rotating problem.
  const VelocityState back = integrate_orbit({out.x, -out.y, -out.vx, out.vy}, 20, p, o).samples.back().state;
  CHECK(std::hypot(back.x - kReference.x, -back.y - kReference.y) < 10 * one_way);
}

TEST_CASE("guard crossing stops the run") {
  const SystemParams p = classical_system(0.3);
  IntegrateOptions o;
  o.guard = 0.05;
  const Trajectory tr = integrate_orbit({0.7 + 0.06, 0.0, 0, 0}, 10, p, o);
  CHECK(tr.status == TrajectoryStatus::SingularityEncountered);
  REQUIRE(tr.event_time.has_value());
  CHECK(*tr.event_time > 0.0);
  CHECK(*tr.event_time < 10.0);
}

TEST_CASE("invalid integration requests") {
  const SystemParams p = classical_system(0.1);
  CHECK(code_of([&] { integrate_orbit(kReference, 0.0, p); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { integrate_orbit(kReference, 1.0, p, tolerance(1e-2)); }) == ErrorCode::InvalidArgument);
  IntegrateOptions tiny;
  tiny.abs_tol = 1e-15;
  CHECK(code_of([&] { integrate_orbit(kReference, 1.0, p, tiny); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { integrate_orbit({0.9, 0.0, 0, 0}, 1.0, p); }) == ErrorCode::SingularityAtPrimary);
}

TEST_CASE("property: conservation over random bounded orbits") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> off(-0.02, 0.02);
  const SystemParams p = classical_system(0.01);
  const EquilibriumPoint l4 = triangular_point(p);
  for (int k = 0; k < 5; ++k) {
    const Trajectory tr = integrate_orbit({l4.x + off(rng), l4.y + off(rng), off(rng), off(rng)}, 100, p, tolerance(1e-12));
    CHECK(tr.status == TrajectoryStatus::Completed);
    CHECK(tr.jacobi_drift < 1e-9);
  }
}
