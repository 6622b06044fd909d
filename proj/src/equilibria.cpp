#include "chermnykh/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <string>

#include <fmt/core.h>

#include "chermnykh/error.hpp"

namespace chermnykh {

std::string_view to_string(PointLabel label) noexcept {
  switch (label) {
    case PointLabel::L1: return "L1";
    case PointLabel::L2: return "L2";
    case PointLabel::L3: return "L3";
    case PointLabel::L4: return "L4";
    case PointLabel::L5: return "L5";
  }
  return "?";
}

std::string_view to_string(PointMethod method) noexcept {
  switch (method) {
    case PointMethod::ClosedForm: return "closed_form";
    case PointMethod::Series: return "series";
    case PointMethod::Refined: return "refined";
  }
  return "?";
}

namespace {

const double kSqrt3 = std::sqrt(3.0);

double residual_at(double x, double y, const SystemParams& p) {
  const Gradient g = potential_gradient(x, y, p);
  return std::max(std::abs(g.x), std::abs(g.y));
}

PointLabel classify(double x, double y, const SystemParams& p) {
  if (y > 0.0) return PointLabel::L4;
  if (y < 0.0) return PointLabel::L5;
  if (x > 1.0 - p.mu) return PointLabel::L2;
  if (x < -p.mu) return PointLabel::L3;
  return PointLabel::L1;
}

// Factor (1 - 3 mu A2 / (2 (1 - mu))) shared by the r1 expressions.
double oblate_belt_factor(const SystemParams& p) {
  return 1.0 - 3.0 * p.mu * p.A2 / (2.0 * (1.0 - p.mu));
}

double omega_x_on_axis(double x, const SystemParams& p) {
  return potential_gradient(x, 0.0, p).x;
}

}  // namespace

EquilibriumRadii equilibrium_radii(const SystemParams& p) {
  const double belt = (1.0 - 2.0 * p.rc) * p.Mb() / (3.0 * p.belt_denominator());
  EquilibriumRadii r;
  r.r1 = std::cbrt(p.q1()) * (1.0 - 0.5 * p.A2 + belt * oblate_belt_factor(p));
  r.r2 = 1.0 + p.mu * belt;
  return r;
}

DistanceLoci distance_loci(const SystemParams& p, double y) {
  const double P = p.belt_denominator();
  const double k = (1.0 - 2.0 * p.rc) * p.Mb();

  const double base1 = 1.0 + 1.5 * p.A2 - k * oblate_belt_factor(p) / P;
  // The printed r2-locus carries a stray r_0; it is read as rc.
  const double base2 = 1.0 - p.mu * k / P;
  if (!(base1 > 0.0) || !(base2 > 0.0)) {
    throw Error(ErrorCode::NegativeRadicand, "locus radius base is not positive");
  }
  const double rad1 = std::cbrt(std::pow(p.q1() / (p.n * p.n), 2.0)) / std::cbrt(base1 * base1) - y * y;
  const double rad2 = 1.0 / std::cbrt(base2 * base2) - y * y;
  if (rad1 < 0.0 || rad2 < 0.0) {
    throw Error(ErrorCode::NegativeRadicand, fmt::format("y = {} lies outside a distance locus", y));
  }
  const double s1 = std::sqrt(rad1);
  const double s2 = std::sqrt(rad2);
  return {{-p.mu - s1, -p.mu + s1}, {1.0 - p.mu - s2, 1.0 - p.mu + s2}};
}

std::array<EquilibriumPoint, 2> triangular_points_closed(const SystemParams& p) {
  const double q23 = std::cbrt(p.q1() * p.q1());
  const double P = p.belt_denominator();
  const double mu = p.mu;
  const double A2 = p.A2;
  const double Mb = p.Mb();

  const double x = -mu + 0.5 * q23 * (1.0 - A2) +
                   (1.0 - 2.0 * p.rc) * Mb * ((1.0 - 3.0 * mu * A2 / (1.0 - mu)) * q23 - 1.0) / (3.0 * P);
  const double belt_bracket = (q23 - 3.0) - 3.0 * mu * A2 * (q23 - 3.0) / (2.0 * (1.0 - mu));
  const double radicand = 4.0 - q23 + 2.0 * (q23 - 2.0) * A2 -
                          4.0 * (2.0 * p.rc - 1.0) * Mb * belt_bracket / (3.0 * P);
  if (!(radicand > 0.0) || q23 == 0.0) {
    throw Error(ErrorCode::DegenerateTriangular,
                fmt::format("closed-form triangular point degenerates (radicand {}, q1 {})", radicand, p.q1()));
  }
  const double y = 0.5 * q23 * std::sqrt(radicand);
  EquilibriumPoint l4{PointLabel::L4, x, y, 0.0, PointMethod::ClosedForm, 0};
  EquilibriumPoint l5{PointLabel::L5, x, -y, 0.0, PointMethod::ClosedForm, 0};
  try {
    l4.residual = residual_at(l4.x, l4.y, p);
    l5.residual = residual_at(l5.x, l5.y, p);
  } catch (const Error&) {
    l4.residual = l5.residual = std::numeric_limits<double>::infinity();
  }
  return {l4, l5};
}

SeriesTriangular triangular_points_series(const SystemParams& p) {
  const double eps = p.epsilon();
  const double mu = p.mu;
  const double A2 = p.A2;
  const double Mb = p.Mb();
  const double gamma = 1.0 - 2.0 * mu;
  const double cross = mu * A2 * Mb / (1.0 - mu);

  SeriesTriangular s;
  s.l4.label = PointLabel::L4;
  s.l4.method = PointMethod::Series;
  s.l4.x = gamma / 2.0 - eps / 3.0 - A2 / 2.0 + A2 * eps / 3.0 + 2.0 * Mb * eps / 9.0 -
           0.5 * cross * (1.0 - 2.0 * eps / 3.0);
  s.l4.y = 0.5 * kSqrt3 *
           (1.0 - 5.0 * eps / 9.0 - A2 / 3.0 - 2.0 * A2 * eps / 9.0 - 4.0 * Mb / 9.0 -
            8.0 * Mb * eps / 27.0 + cross * eps / 9.0);
  // The offsets are kept as printed; b carries -2 eps / 9 where y carries -5 eps / 9.
  s.a = 0.5 * (1.0 - 2.0 * eps / 3.0 - A2 + 2.0 * A2 * eps / 3.0 + 4.0 * Mb * eps / 9.0 -
               cross * (1.0 - 2.0 * eps / 3.0));
  s.b = 0.5 * kSqrt3 *
        (1.0 - 2.0 * eps / 9.0 - A2 / 3.0 - 2.0 * A2 * eps / 9.0 - 4.0 * Mb / 9.0 -
         8.0 * Mb * eps / 27.0 + cross * eps / 9.0);
  try {
    s.l4.residual = residual_at(s.l4.x, s.l4.y, p);
  } catch (const Error&) {
    s.l4.residual = std::numeric_limits<double>::infinity();
  }
  return s;
}

EquilibriumPoint refine_equilibrium(double x0, double y0, const SystemParams& p,
                                    const RefineOptions& opts) {
  double x = x0;
  double y = y0;
  const bool on_axis = (y0 == 0.0);
  Gradient g;
  try {
    g = potential_gradient(x, y, p);
  } catch (const Error&) {
    throw Error(ErrorCode::ConvergedToPrimary, "initial guess lies on a primary");
  }
  double res = std::max(std::abs(g.x), std::abs(g.y));

  int it = 0;
  while (res >= opts.tolerance) {
    if (it == opts.max_iterations) {
      throw Error(ErrorCode::NoConvergence,
                  fmt::format("Newton stalled at ({}, {}) with residual {} after {} iterations", x,
                              y, res, it));
    }
    ++it;
    const Hessian h = potential_hessian(x, y, p);
    double dx = 0.0;
    double dy = 0.0;
    if (on_axis) {
      dx = -g.x / h.xx;
    } else {
      const double det = h.xx * h.yy - h.xy * h.xy;
      if (det == 0.0) throw Error(ErrorCode::NoConvergence, "singular Hessian during refinement");
      dx = -(h.yy * g.x - h.xy * g.y) / det;
      dy = -(h.xx * g.y - h.xy * g.x) / det;
    }
    if (!std::isfinite(dx) || !std::isfinite(dy)) {
      throw Error(ErrorCode::NoConvergence, "non-finite Newton step");
    }

    // Off the axis the step is taken in polar form about the origin. Its linearization is the
    // same, but a long step along the soft (tangential) direction stays near the circle instead
    // of running off along the tangent line, where the stiff radial gradient would force tiny
    // backtracked steps whenever mu is small.
    const double r = std::hypot(x, y);
    const double theta = std::atan2(y, x);
    const double dr = on_axis ? 0.0 : (x * dx + y * dy) / r;
    const double dtheta = on_axis ? 0.0 : (x * dy - y * dx) / (r * r);
    const double norm = std::hypot(g.x, g.y);
    // Trust region: at most 0.1 rad in angle or 10% in radius per iteration.
    double scale = on_axis ? 1.0 : std::min({1.0, 0.1 / std::abs(dtheta), 0.1 * r / std::abs(dr)});
    bool accepted = false;
    for (int k = 0; k < 60; ++k, scale *= 0.5) {
      const double xn = on_axis ? x + scale * dx : (r + scale * dr) * std::cos(theta + scale * dtheta);
      const double yn = on_axis ? 0.0 : (r + scale * dr) * std::sin(theta + scale * dtheta);
      Gradient gn;
      try {
        gn = potential_gradient(xn, yn, p);
      } catch (const Error&) {
        continue;
      }
      if (std::hypot(gn.x, gn.y) < norm || k == 59) {
        x = xn;
        y = yn;
        g = gn;
        res = std::max(std::abs(gn.x), std::abs(gn.y));
        accepted = true;
        break;
      }
    }
    if (!accepted) throw Error(ErrorCode::ConvergedToPrimary, "Newton step lands on a primary");
    if (std::abs(scale * dx) + std::abs(scale * dy) == 0.0 && res >= opts.tolerance) {
      throw Error(ErrorCode::NoConvergence,
                  fmt::format("Newton stagnated with residual {}", res));
    }
  }

  const auto [r1, r2] = primary_distances(x, y, p);
  constexpr double kPrimaryProximity = 1e-6;
  if (r2 < kPrimaryProximity || (p.q1() > 0.0 && r1 < kPrimaryProximity)) {
    throw Error(ErrorCode::ConvergedToPrimary, "refinement collapsed onto a primary");
  }
  return {classify(x, y, p), x, y, res, PointMethod::Refined, it};
}

namespace {

// Bisection of Omega_x(x, 0) on [lo, hi] where f(lo) < 0 < f(hi) or the reverse.
double bisect_axis(double lo, double hi, const SystemParams& p, double tol) {
  double flo = omega_x_on_axis(lo, p);
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return mid;
    const double fm = omega_x_on_axis(mid, p);
    if (std::abs(fm) < tol) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Finds an offset delta from a primary at which Omega_x has the expected sign.
double offset_with_sign(double primary_x, double direction, bool want_positive,
                        const SystemParams& p) {
  for (double delta = 1e-3; delta >= 1e-8; delta *= 0.1) {
    const double f = omega_x_on_axis(primary_x + direction * delta, p);
    if ((f > 0.0) == want_positive && f != 0.0) return delta;
  }
  throw Error(ErrorCode::RootNotBracketed,
              fmt::format("no sign change of Omega_x near the primary at x = {}", primary_x));
}

double outer_bound(double start, double direction, bool want_positive, const SystemParams& p) {
  double step = 1.0;
  for (int i = 0; i < 60; ++i, step *= 2.0) {
    const double x = start + direction * step;
    if ((omega_x_on_axis(x, p) > 0.0) == want_positive) return x;
  }
  throw Error(ErrorCode::RootNotBracketed, "no sign change of Omega_x at large |x|");
}

}  // namespace

std::array<EquilibriumPoint, 3> collinear_points(const SystemParams& p, const RefineOptions& opts) {
  const double x1 = -p.mu;
  const double x2 = 1.0 - p.mu;

  auto solve = [&](double lo, double hi, PointLabel label) {
    const double flo = omega_x_on_axis(lo, p);
    const double fhi = omega_x_on_axis(hi, p);
    if ((flo < 0.0) == (fhi < 0.0)) {
      throw Error(ErrorCode::RootNotBracketed,
                  fmt::format("{}: Omega_x has equal signs on [{}, {}]", to_string(label), lo, hi));
    }
    const double root = bisect_axis(lo, hi, p, opts.tolerance);
    EquilibriumPoint pt = refine_equilibrium(root, 0.0, p, opts);
    if (pt.x <= lo || pt.x >= hi) {
      // Newton polish left the bracket; keep the bisection root.
      pt = {label, root, 0.0, std::abs(omega_x_on_axis(root, p)), PointMethod::Refined, 0};
    }
    pt.label = label;
    return pt;
  };

  const double d1 = offset_with_sign(x1, +1.0, false, p);
  const double d2 = offset_with_sign(x2, -1.0, true, p);
  EquilibriumPoint l1 = solve(x1 + d1, x2 - d2, PointLabel::L1);

  const double d2r = offset_with_sign(x2, +1.0, false, p);
  EquilibriumPoint l2 = solve(x2 + d2r, outer_bound(x2, +1.0, true, p), PointLabel::L2);

  const double d1l = offset_with_sign(x1, -1.0, true, p);
  EquilibriumPoint l3 = solve(outer_bound(x1, -1.0, false, p), x1 - d1l, PointLabel::L3);

  return {l1, l2, l3};
}

namespace {

// Omega_r along the ray at angle theta.
double radial_derivative(double r, double theta, const SystemParams& p) {
  const double c = std::cos(theta);
  const double sn = std::sin(theta);
  const Gradient g = potential_gradient(r * c, r * sn, p);
  return c * g.x + sn * g.y;
}

// Outermost sign change of Omega_r from negative to positive on a log-spaced radial scan.
std::optional<double> outer_radial_root(double theta, const SystemParams& p) {
  constexpr int kSamples = 80;
  constexpr double kRmin = 0.02;
  constexpr double kRmax = 4.0;
  const double step = std::log(kRmax / kRmin) / (kSamples - 1);
  std::optional<std::pair<double, double>> bracket;
  double prev_r = kRmin;
  double prev_f = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < kSamples; ++i) {
    const double r = kRmin * std::exp(step * i);
    double f = std::numeric_limits<double>::quiet_NaN();
    try {
      f = radial_derivative(r, theta, p);
    } catch (const Error&) {
    }
    if (prev_f < 0.0 && f > 0.0) bracket = std::pair{prev_r, r};
    prev_r = r;
    prev_f = f;
  }
  if (!bracket) return std::nullopt;
  auto [lo, hi] = *bracket;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (radial_derivative(mid, theta, p) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Omega_theta on the radial-equilibrium curve; NaN where that curve is undefined.
double tangential_on_curve(double theta, const SystemParams& p) {
  const auto r = outer_radial_root(theta, p);
  if (!r) return std::numeric_limits<double>::quiet_NaN();
  const double x = *r * std::cos(theta);
  const double y = *r * std::sin(theta);
  const Gradient g = potential_gradient(x, y, p);
  return -y * g.x + x * g.y;
}

std::optional<std::pair<double, double>> angular_search(const SystemParams& p, double preferred) {
  constexpr int kSamples = 90;
  constexpr double kMargin = 0.02;
  const double span = std::numbers::pi - 2.0 * kMargin;
  std::optional<std::pair<double, double>> best;
  double prev_t = kMargin;
  double prev_f = tangential_on_curve(prev_t, p);
  for (int i = 1; i < kSamples; ++i) {
    const double t = kMargin + span * i / (kSamples - 1);
    const double f = tangential_on_curve(t, p);
    if (std::isfinite(prev_f) && std::isfinite(f) && (prev_f < 0.0) != (f < 0.0)) {
      const double centre = 0.5 * (prev_t + t);
      if (!best || std::abs(centre - preferred) < std::abs(0.5 * (best->first + best->second) - preferred)) {
        best = std::pair{prev_t, t};
      }
    }
    prev_t = t;
    prev_f = f;
  }
  if (!best) return std::nullopt;
  auto [lo, hi] = *best;
  double flo = tangential_on_curve(lo, p);
  for (int i = 0; i < 100 && hi - lo > 1e-11; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = tangential_on_curve(mid, p);
    if (!std::isfinite(fm)) break;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  const double theta = 0.5 * (lo + hi);
  const auto r = outer_radial_root(theta, p);
  if (!r) return std::nullopt;
  return std::pair{*r * std::cos(theta), *r * std::sin(theta)};
}

double closed_or_apex_x(const SystemParams& p) {
  const double r1 = std::cbrt(p.q1());
  return -p.mu + 0.5 * r1 * r1;
}

double closed_or_apex_y(const SystemParams& p) {
  const double r1 = std::cbrt(p.q1());
  const double xa = 0.5 * r1 * r1;
  return std::sqrt(std::max(r1 * r1 - xa * xa, 1e-12));
}

}  // namespace

EquilibriumPoint triangular_point(const SystemParams& p, const RefineOptions& opts) {
  // A run that ends this close to the axis has slid into the L3 basin.
  constexpr double kOffAxis = 1e-8;
  constexpr double kMinLift = 0.05;
  std::string failures;
  auto attempt = [&](double x0, double y0) -> std::optional<EquilibriumPoint> {
    if (!(y0 > 0.0) || !std::isfinite(x0) || !std::isfinite(y0)) return std::nullopt;
    try {
      EquilibriumPoint pt = refine_equilibrium(x0, y0, p, opts);
      if (pt.y > std::max(kOffAxis, kMinLift * y0)) return pt;
      failures += fmt::format(" seed ({}, {}) drifted to ({}, {});", x0, y0, pt.x, pt.y);
    } catch (const Error& e) {
      failures += fmt::format(" {};", e.what());
    }
    return std::nullopt;
  };

  try {
    const auto closed = triangular_points_closed(p);
    if (auto pt = attempt(closed[0].x, closed[0].y)) return *pt;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateTriangular) throw;
    failures += " closed form degenerate;";
  }
  const SeriesTriangular series = triangular_points_series(p);
  if (auto pt = attempt(series.l4.x, series.l4.y)) return *pt;

  // Geometric seed: apex of the triangle with sides r1 = q1^{1/3}, r2 = 1 on the unit base.
  const double r1 = std::cbrt(p.q1());
  const double xa = 0.5 * r1 * r1;
  const double ya2 = r1 * r1 - xa * xa;
  if (ya2 > 0.0) {
    if (auto pt = attempt(-p.mu + xa, std::sqrt(ya2))) return *pt;
  }
  // Last resort: nested one-dimensional search. On each ray from the origin take the outermost
  // zero of Omega_r, then bracket the angle where the tangential derivative vanishes.
  const double preferred = std::atan2(closed_or_apex_y(p), closed_or_apex_x(p));
  if (auto pt = angular_search(p, preferred)) {
    if (auto refined = attempt(pt->first, pt->second)) return *refined;
  }
  throw Error(ErrorCode::DegenerateTriangular, "no triangular equilibrium found:" + failures);
}

}  // namespace chermnykh
