#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "chermnykh/error.hpp"
#include "chermnykh/model.hpp"
#include "support.hpp"

using namespace chermnykh;
using chermnykh::testing::classical;
using chermnykh::testing::classical_system;
using chermnykh::testing::fd_gradient;
using chermnykh::testing::fd_hessian;
using chermnykh::testing::rel_err;

namespace {

const double kSqrt3 = std::sqrt(3.0);

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

TEST_CASE("mass reduction factor") {
  CHECK(mass_reduction_factor(3.0, 2.0, 0.0) == 1.0);
  CHECK(mass_reduction_factor(5.6e-5, 1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(mass_reduction_factor(5.6e-4, 1.0, 1.0) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(code_of([] { mass_reduction_factor(0.0, 1.0, 1.0); }) == ErrorCode::NonPositiveInput);
  CHECK(code_of([] { mass_reduction_factor(1.0, -1.0, 1.0); }) == ErrorCode::NonPositiveInput);
  CHECK(code_of([] { mass_reduction_factor(1.0, 1.0, -1.0); }) == ErrorCode::NonPositiveInput);
  CHECK(code_of([] { mass_reduction_factor(1e-5, 1.0, 1.0); }) == ErrorCode::NegativeFactor);
  CHECK(mass_reduction_factor(1e-5, 1.0, 1.0, true) == 0.0);
}

TEST_CASE("build_system derives rc and n") {
  const SystemParams a = classical_system(0.01);
  CHECK(a.n == 1.0);
  CHECK(a.rc == doctest::Approx(std::sqrt(0.99 + 0.0001)).epsilon(1e-15));
  CHECK(a.rc == doctest::Approx(0.995038).epsilon(1e-6));

  ModelInputs b = classical(0.025);
  b.A2 = 0.01;
  CHECK(build_system(b).n * build_system(b).n == doctest::Approx(1.015).epsilon(1e-14));

  ModelInputs c = classical(0.025);
  c.Mb = 0.1;
  c.rc = 1.0;
  const SystemParams pc = build_system(c);
  CHECK(pc.rc_overridden);
  CHECK(pc.n * pc.n == doctest::Approx(1.2).epsilon(1e-14));
  CHECK(pc.n == doctest::Approx(1.095445).epsilon(1e-6));

  ModelInputs d = classical(0.2);
  d.q1 = 0.5;
  d.flatness = 0.01;
  d.core = 0.02;
  const SystemParams pd = build_system(d);
  CHECK(pd.T() == 0.03);
  CHECK(pd.epsilon() == 0.5);
  CHECK(pd.rc * pd.rc == doctest::Approx(0.8 * std::cbrt(0.25) + 0.04).epsilon(1e-14));
}

TEST_CASE("build_system rejects out-of-range inputs") {
  for (double mu : {0.0, -0.1, 0.6}) CHECK(code_of([=] { build_system(classical(mu)); }) == ErrorCode::ParameterOutOfRange);
  ModelInputs q = classical(0.1);
  q.q1 = 1.5;
  CHECK(code_of([=] { build_system(q); }) == ErrorCode::ParameterOutOfRange);
  ModelInputs a = classical(0.1);
  a.A2 = -0.1;
  CHECK(code_of([=] { build_system(a); }) == ErrorCode::ParameterOutOfRange);
  ModelInputs m = classical(0.1);
  m.Mb = -1.0;
  CHECK(code_of([=] { build_system(m); }) == ErrorCode::ParameterOutOfRange);
}

TEST_CASE("belt potential in the plane") {
  CHECK(belt_potential_planar(7.0, BeltProfile{0.0, 0.3, 0.1}) == 0.0);
  CHECK(belt_potential_planar(0.0, BeltProfile{1.0, 1.0, 0.0}) == doctest::Approx(-1.0));
  CHECK(belt_potential_planar(std::sqrt(3.0), BeltProfile{2.0, 0.5, 0.5}) == doctest::Approx(-1.0));
  CHECK(code_of([] { belt_potential_planar(0.0, BeltProfile{1.0, 0.0, 0.0}); }) == ErrorCode::Singularity);
}

TEST_CASE("effective potential at the classical triangular point") {
  for (double mu : {0.01, 0.025, 0.3}) {
    const SystemParams p = classical_system(mu);
    CHECK(effective_potential(0.5 - mu, kSqrt3 / 2, p) == doctest::Approx((3 - mu * (1 - mu)) / 2).epsilon(1e-14));
  }
  CHECK(effective_potential(0.475, kSqrt3 / 2, classical_system(0.025)) == doctest::Approx(1.4878125).epsilon(1e-14));
}

TEST_CASE("effective potential matches an independent term sum") {
  ModelInputs in = classical(0.025);
  in.q1 = 0.8;
  in.A2 = 0.003;
  in.Mb = 0.1;
  in.flatness = 0.01;
  const SystemParams p = build_system(in);
  const double x = 0.475, y = kSqrt3 / 2;
  const double r1 = std::hypot(x + 0.025, y), r2 = std::hypot(x - 0.975, y);
  const double belt = 0.1 / std::sqrt(x * x + y * y + 1e-4);
  const double sum = p.n * p.n * (x * x + y * y) / 2 + 0.975 * 0.8 / r1 + 0.025 / r2 +
                     0.025 * 0.003 / (2 * r2 * r2 * r2) + belt;
  CHECK(effective_potential(x, y, p) == doctest::Approx(sum).epsilon(1e-14));
  CHECK(belt == doctest::Approx(0.1 / std::hypot(x, y)).epsilon(1e-4));
}

TEST_CASE("singular points are rejected") {
  const SystemParams p = classical_system(0.1);
  CHECK(code_of([&] { effective_potential(0.9, 0.0, p); }) == ErrorCode::SingularityAtPrimary);
  CHECK(code_of([&] { potential_gradient(-0.1, 0.0, p); }) == ErrorCode::SingularityAtPrimary);
  CHECK(code_of([&] { potential_hessian(0.9, 1e-10, p); }) == ErrorCode::SingularityAtPrimary);
}

TEST_CASE("gradient and Hessian against finite differences") {
  const SystemParams p = classical_system(0.2);
  const Gradient g = potential_gradient(0.5, 0.5, p);
  const Gradient fd = fd_gradient(0.5, 0.5, p);
  CHECK(rel_err(g.x, fd.x, 1e-3) < 1e-6);
  CHECK(rel_err(g.y, fd.y, 1e-3) < 1e-6);
  CHECK(potential_gradient(0.3, 0.0, p).y == 0.0);

  for (double mu : {0.01, 0.025, 0.5}) {
    const SystemParams c = classical_system(mu);
    const Hessian h = potential_hessian(0.5 - mu, kSqrt3 / 2, c);
    const Hessian hf = fd_hessian(0.5 - mu, kSqrt3 / 2, c);
    CHECK(h.xx == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(h.yy == doctest::Approx(2.25).epsilon(1e-12));
    CHECK(h.xy == doctest::Approx(3 * kSqrt3 / 4 * (1 - 2 * mu)).epsilon(1e-12));
    CHECK(h.xx + h.yy == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(rel_err(h.xx, hf.xx) < 1e-5);
    CHECK(rel_err(h.xy, hf.xy) < 1e-5);
    CHECK(rel_err(h.yy, hf.yy) < 1e-5);
  }
  CHECK(std::abs(potential_hessian(0.0, kSqrt3 / 2, classical_system(0.5)).xy) < 1e-15);
}

TEST_CASE("property: analytic derivatives agree with differences on random points") {
  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> u(-1.6, 1.6);
  std::uniform_real_distribution<double> small(0.0, 0.01);
  std::uniform_real_distribution<double> mu_d(0.001, 0.5);
  int tested = 0;
  while (tested < 1000) {
    ModelInputs in = classical(mu_d(rng));
    if (tested % 2 == 1) {
      in.q1 = 1.0 - small(rng);
      in.A2 = small(rng);
      in.Mb = small(rng);
      in.flatness = small(rng);
    }
    const SystemParams p = build_system(in);
    const double x = u(rng), y = u(rng);
    const auto [r1, r2] = primary_distances(x, y, p);
    if (r1 < 0.05 || r2 < 0.05) continue;
    ++tested;
    const Gradient g = potential_gradient(x, y, p);
    const Gradient gf = fd_gradient(x, y, p);
    const double gscale = std::max(std::hypot(g.x, g.y), 1.0);
    REQUIRE(std::abs(g.x - gf.x) / gscale < 1e-6);
    REQUIRE(std::abs(g.y - gf.y) / gscale < 1e-6);
    const Hessian h = potential_hessian(x, y, p);
    const Hessian hf = fd_hessian(x, y, p);
    const double hscale = std::max({std::abs(h.xx), std::abs(h.xy), std::abs(h.yy), 1.0});
    REQUIRE(std::abs(h.xx - hf.xx) / hscale < 1e-5);
    REQUIRE(std::abs(h.xy - hf.xy) / hscale < 1e-5);
    REQUIRE(std::abs(h.yy - hf.yy) / hscale < 1e-5);
    CHECK(effective_potential(x, y, p) == effective_potential(x, -y, p));
  }
}

TEST_CASE("velocity and momentum forms") {
  const VelocityState v{0.3, -0.2, 0.11, 0.07};
  for (double n : {1.0, 1.2}) {
    const MomentumState m = to_momentum(v, n);
    CHECK(m.px == doctest::Approx(0.11 + n * 0.2));
    CHECK(m.py == doctest::Approx(0.07 + n * 0.3));
    const VelocityState back = to_velocity(m, n);
    CHECK(back.vx == doctest::Approx(v.vx).epsilon(1e-15));
    CHECK(back.vy == doctest::Approx(v.vy).epsilon(1e-15));
  }
}

TEST_CASE("Jacobi constant") {
  const SystemParams p = classical_system(0.025);
  CHECK(jacobi_constant({0.475, kSqrt3 / 2, 0, 0}, p) == doctest::Approx(2.975625).epsilon(1e-14));
  const double speed = std::sqrt(2 * effective_potential(0.2, 0.4, p));
  CHECK(std::abs(jacobi_constant({0.2, 0.4, speed * 0.6, speed * 0.8}, p)) < 1e-13);
  CHECK(jacobi_constant({0.2, 0.4, 0.1, 0.3}, p) == jacobi_constant({0.2, -0.4, 0.1, -0.3}, p));
}

TEST_CASE("equations of motion") {
  const SystemParams p = classical_system(0.025);
  const auto rest = eom_rhs({0.475, kSqrt3 / 2, 0, 0}, p);
  CHECK(std::abs(rest[2]) < 1e-14);
  CHECK(std::abs(rest[3]) < 1e-14);
  const auto moving = eom_rhs({0.475, kSqrt3 / 2, 0, 1}, p);
  CHECK(moving[0] == 0.0);
  CHECK(moving[1] == 1.0);
  CHECK(moving[2] == doctest::Approx(2 * p.n).epsilon(1e-13));

  ModelInputs in = classical(0.1);
  in.Mb = 0.2;
  in.flatness = 0.05;
  const SystemParams pb = build_system(in);
  const Gradient g = potential_gradient(0.3, 0.7, pb);
  const auto a = eom_rhs({0.3, 0.7, 0, 0}, pb);
  CHECK(a[2] == g.x);
  CHECK(a[3] == g.y);
  const auto b = eom_rhs({0.3, 0.7, 0.2, -0.1}, pb);
  CHECK(b[2] == doctest::Approx(g.x - 0.2 * pb.n).epsilon(1e-14));
  CHECK(b[3] == doctest::Approx(g.y - 0.4 * pb.n).epsilon(1e-14));
}
