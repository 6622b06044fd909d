#include "chermnykh/linearize.hpp"

#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "chermnykh/error.hpp"
#include "chermnykh/parallel.hpp"

namespace chermnykh {

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Stable: return "stable";
    case Verdict::NonPositiveDiscriminant: return "unstable_discriminant";
    case Verdict::NonNegativeRoot: return "unstable_root";
  }
  return "?";
}

QuadraticCoeffs coefficients_at(const EquilibriumPoint& point, const SystemParams& p) {
  const Hessian h = potential_hessian(point.x, point.y, p);
  const double n2 = p.n * p.n;
  return {0.5 * (n2 - h.xx), 0.5 * (n2 - h.yy), -h.xy, p.n, CoeffSource::Exact};
}

QuadraticCoeffs coefficients_exact(const SystemParams& p, const RefineOptions& opts) {
  return coefficients_at(triangular_point(p, opts), p);
}

QuadraticCoeffs coefficients_series(const SystemParams& p) {
  const double mu = p.mu;
  const double eps = p.epsilon();
  const double A2 = p.A2;
  const double Mb = p.Mb();
  const double k = 2.0 * p.rc - 1.0;
  // Every belt fraction has the form k {...} Mb / (rc^2 + T^2)^{3/2}.
  const double P = p.belt_denominator();
  auto belt = [&](double braces) { return Mb == 0.0 ? 0.0 : k * braces * Mb / P; };

  const double E =
      (2.0 - 324.0 * (2.0 - 25.0 * mu) * Mb - belt(2.0 + 15.0 * (2.0 - 7.0 * mu) * Mb) +
       2.0 * eps *
           (-54.0 - 270.0 * mu + 135.0 * (10.0 - 81.0 * mu) * Mb -
            belt(146.0 - 33.0 * mu + 15.0 * (118.0 - 205.0 * mu) * Mb)) +
       6.0 * A2 *
           (162.0 - 432.0 * mu + 135.0 * (2.0 + 39.0 * mu) * Mb +
            belt(146.0 - 240.0 * mu - 15.0 * (10.0 - 259.0 * mu) * Mb)) +
       eps * A2 *
           (144.0 - 5022.0 * mu - 270.0 * (4.0 - 395.0 * mu) * Mb -
            belt(458.0 + 540.0 * mu + 15.0 * (1926.0 - 7399.0 * mu) * Mb))) /
      1728.0;

  const double F =
      -(360.0 + 108.0 * (22.0 + 85.0 * mu) * Mb + belt(2.0 + 5.0 * (6.0 + 35.0 * mu) * Mb) +
        2.0 * eps *
            (54.0 - 18.0 * mu + 45.0 * (62.0 + 309.0 * mu) * Mb -
             belt(10.0 + 39.0 * mu + 5.0 * (202.0 + 1565.0 * mu) * Mb)) +
        6.0 * A2 *
            (126.0 + 45.0 * (26.0 + 99.0 * mu) * Mb + belt(46.0 + 5.0 * (142.0 + 791.0 * mu) * Mb)) +
        eps * A2 *
            (576.0 - 18.0 * mu + 90.0 * (228.0 + 1147.0 * mu) * Mb +
             belt(522.0 + 526.0 * mu + 5.0 * (3834.0 + 27923.0 * mu) * Mb))) /
      576.0;

  const double G =
      -(648.0 - 1296.0 * mu + 1620.0 * (2.0 + 3.0 * mu) * Mb +
        12.0 * belt(22.0 - 44.0 * mu + 5.0 * (34.0 + 39.0 * mu) * Mb) +
        2.0 * eps *
            (198.0 - 666.0 * mu + 45.0 * (94.0 + 201.0 * mu) * Mb +
             2.0 * belt(190.0 - 423.0 * mu + 135.0 * (18.0 + 65.0 * mu) * Mb)) +
        6.0 * A2 *
            (126.0 - 468.0 * mu + 45.0 * (26.0 + 15.0 * mu) * Mb +
             belt(96.0 - 260.0 * mu + 15.0 * (66.0 + 133.0 * mu) * Mb)) +
        eps * A2 *
            (1368.0 - 4806.0 * mu + 90.0 * (280.0 + 429.0 * mu) * Mb +
             belt(2106.0 - 655.0 * mu + 35.0 * (982.0 + 3025.0 * mu) * Mb))) /
      (288.0 * std::sqrt(3.0));

  return {E, F, G, p.n, CoeffSource::Series};
}

LagrangianTerms lagrangian_terms(const SystemParams& p, const RefineOptions& opts) {
  const EquilibriumPoint l4 = triangular_point(p, opts);
  LagrangianTerms t;
  t.a = l4.x + p.mu;
  t.b = l4.y;

  t.L0 = effective_potential(l4.x, l4.y, p);
  const Gradient g = potential_gradient(l4.x, l4.y, p);
  t.L1 = {g.x, g.y};
  const Hessian h = potential_hessian(l4.x, l4.y, p);
  t.L2_potential = {0.5 * h.xx, h.xy, 0.5 * h.yy};
  t.L2_coriolis = p.n;
  t.coeffs = coefficients_at(l4, p);

  // Printed forms, evaluated with the literal operator precedence.
  const double a = t.a;
  const double b = t.b;
  const double mu = p.mu;
  const double n2 = p.n * p.n;
  const double T2 = p.T() * p.T();
  const double rho1 = std::sqrt(a * a + b * b);
  const double rho2 = std::sqrt((a - 1.0) * (a - 1.0) + b * b);
  const double belt2 = (a - mu) * (a - mu) + b * b + T2;
  const double oblate = p.A2 / (2.0 * (a - 1.0) * (a - 1.0) + b * b);
  const double belt_term = p.Mb() == 0.0 ? 0.0 : p.Mb() / std::pow(belt2, 1.5);
  t.L0_printed = ((a - mu) * (a - mu) + b * b) * n2 + (1.0 - mu) * p.q1() / rho1 +
                 mu / rho2 * (1.0 + oblate) + belt_term;

  const double belt5 = p.Mb() == 0.0 ? 0.0 : 3.0 * p.Mb() / std::pow(belt2, 2.5);
  const double big = (1.0 - mu) * p.q1() / (rho1 * rho1 * rho1);
  const double small = mu / (rho2 * rho2 * rho2) * (1.0 + 3.0 * oblate);
  t.L1_printed = {2.0 * n2 * (a - mu) - a * big - (a - mu) * belt5 - (a - 1.0) * small,
                  2.0 * b * n2 - b * big - b * belt5 - b * small};
  return t;
}

StabilityReport stability_analysis(const QuadraticCoeffs& c) {
  const double n2 = c.n * c.n;
  const double bq = 2.0 * (c.E + c.F + n2);
  const double cq = 4.0 * c.E * c.F - c.G * c.G + n2 * n2 - 2.0 * n2 * (c.E + c.F);

  StabilityReport r;
  r.D = bq * bq - 4.0 * cq;
  r.sum = -bq;
  r.product = cq;

  if (r.D >= 0.0) {
    const double sq = std::sqrt(r.D);
    const double q = -0.5 * (bq + std::copysign(sq, bq));
    const double z1 = q;
    const double z2 = q != 0.0 ? cq / q : 0.0;
    r.lambda_squared = {std::complex<double>(z1, 0.0), std::complex<double>(z2, 0.0)};
  } else {
    const double im = 0.5 * std::sqrt(-r.D);
    r.lambda_squared = {std::complex<double>(-0.5 * bq, im), std::complex<double>(-0.5 * bq, -im)};
  }

  if (!(r.D > 0.0)) {
    r.verdict = Verdict::NonPositiveDiscriminant;
    return r;
  }
  const double z1 = r.lambda_squared[0].real();
  const double z2 = r.lambda_squared[1].real();
  if (!(z1 < 0.0 && z2 < 0.0)) {
    r.verdict = Verdict::NonNegativeRoot;
    return r;
  }
  const double w1 = std::sqrt(-z1);
  const double w2 = std::sqrt(-z2);
  r.omega1 = std::max(w1, w2);
  r.omega2 = std::min(w1, w2);
  r.stable = true;
  r.verdict = Verdict::Stable;
  return r;
}

FrequencyRelations frequency_relations_series(const SystemParams& p) {
  const double mu = p.mu;
  const double eps = p.epsilon();
  const double A2 = p.A2;
  const double Mb = p.Mb();
  const double rc = p.rc;
  const double P = p.belt_denominator();
  // Every belt fraction in these two relations is multiplied by Mb.
  auto over_P = [&](double numerator) { return Mb == 0.0 ? 0.0 : numerator / P; };

  FrequencyRelations f;
  // The fragment (22 + 69 mu) has no multiplicand in print and is added as is.
  f.sum_printed =
      (27.0 * ((1.0 + mu) * eps - 2.0) + 9.0 * (-18.0 + 36.0 * mu + (22.0 + 69.0 * mu)) +
       81.0 * Mb / 2.0 * (12.0 + 30.0 * eps + 30.0 * mu + 95.0 * mu * eps) +
       135.0 * Mb * A2 * (18.0 + 58.0 * eps + 45.0 * mu + 188.0 * mu * eps) +
       over_P(Mb * (180.0 + 2.0 * (2.0 * rc - 1.0) * (44.0 + 21.0) * mu * eps + 72.0 * rc +
                    4.0 * rc * A2 * (78.0 + 180.0 * mu + (253.0 + 873.0 * mu) * eps))) /
           2.0) /
      54.0;

  const double zeroth =
      -(108.0 * (eps + 3.0 * Mb * (2.0 + 7.0 * eps)) +
        18.0 * (31.0 * eps + Mb * (144.0 + 647.0 * eps)) * A2 +
        over_P(Mb * (4.0 * (36.0 - 47.0 * eps + 4.0 * rc * (9.0 + 28.0 * eps)) +
                     3.0 * (74.0 - 297.0 * eps + 4.0 * rc * (44.0 + 175.0 * eps)) * A2))) /
      72.0;
  const double first =
      27.0 / 4.0 + 99.0 * eps / 8.0 + 117.0 / 4.0 + 73.0 * A2 * eps +
      Mb * (45.0 / 4.0 + 81.0 * A2 + 273.0 * eps / 8.0 + 2357.0 * A2 * eps / 8.0 +
            over_P(396.0 * (2.0 * rc - 1.0) + 4.0 * (772.0 * rc - 395.0) * eps +
                   12.0 * (326.0 * rc - 181.0) * A2 + (18452.0 * rc - 9667.0) * A2 * eps) /
                72.0);
  const double second =
      -27.0 / 4.0 + 111.0 * eps / 8.0 + 117.0 / 4.0 + 161.0 * A2 * eps / 2.0 +
      Mb * (405.0 / 4.0 + 495.0 * A2 / 2.0 + 4185.0 * eps / 16.0 + 25275.0 * A2 * eps / 16.0 +
            over_P((2.0 * rc - 1.0) * (198.0 - 838.0 * eps - 1014.0 * A2 - 5117.0 * A2 * eps)) /
                36.0);
  f.product_printed = zeroth + mu * first + mu * mu * second;

  if (mu > 0.0) {
    try {
      const StabilityReport r = stability_analysis(coefficients_exact(p));
      f.sum_exact = -r.sum;
      f.product_exact = r.product;
    } catch (const Error&) {
      // No L4: exact values stay absent.
    }
  }
  return f;
}

bool is_stable_at(double mu, const ModelInputs& base, const RefineOptions& refine) {
  ModelInputs in = base;
  in.mu = mu;
  try {
    const SystemParams p = build_system(in);
    return stability_analysis(coefficients_exact(p, refine)).stable;
  } catch (const Error&) {
    return false;
  }
}

double critical_mass_numeric(const ModelInputs& base, const CriticalMassOptions& opts) {
  if (!(opts.mu_min > 0.0) || !(opts.mu_max > opts.mu_min) || opts.scan_points < 2) {
    throw Error(ErrorCode::InvalidArgument, "invalid critical mass search range");
  }
  // Geometric scan so that narrow stable windows near mu_min are not skipped.
  const int m = opts.scan_points;
  const double ratio = std::pow(opts.mu_max / opts.mu_min, 1.0 / (m - 1));
  double prev_mu = opts.mu_min;
  bool prev_stable = is_stable_at(prev_mu, base, opts.refine);
  for (int i = 1; i < m; ++i) {
    const double mu = (i == m - 1) ? opts.mu_max : opts.mu_min * std::pow(ratio, i);
    const bool stable = is_stable_at(mu, base, opts.refine);
    if (prev_stable && !stable) {
      double lo = prev_mu;
      double hi = mu;
      while (hi - lo > opts.tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (is_stable_at(mid, base, opts.refine)) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
    prev_mu = mu;
    prev_stable = stable;
  }
  throw Error(ErrorCode::NoSignChange,
              fmt::format("no stable-to-unstable transition for mu in ({}, {})", opts.mu_min,
                          opts.mu_max));
}

double critical_mass_series(const SystemParams& p, CriticalSeriesMode mode) {
  const double eps = p.epsilon();
  const double Mb = p.Mb();
  const double A2 = p.A2;
  const double rc = p.rc;
  const double P = p.belt_denominator();
  auto over_P = [&](double numerator) { return Mb == 0.0 ? 0.0 : numerator / P; };

  const double main = kRouthCriticalMass + 0.125885 * eps +
                      Mb * (0.571136 + 1.73097 * eps +
                            over_P(0.219964 - 0.398363 * eps + rc * (0.202129 + 0.114305 * eps)));
  const double standalone = 0.0627796 - 0.112691 * eps;
  const double cross = Mb * A2 *
                       (0.281354 - 1.53665 * eps +
                        over_P(0.654936 - 0.669428 * eps + rc * (0.195486 + 0.350878 * eps)));
  if (mode == CriticalSeriesMode::AsPrinted) return main - (standalone + cross);
  return main - (A2 * standalone + cross);
}

namespace {

ModelInputs node_inputs(const ModelInputs& base, double mu, double A2, double Mb, double q1) {
  ModelInputs in = base;
  in.mu = mu;
  in.A2 = A2;
  in.Mb = Mb;
  in.q1 = q1;
  in.particle.reset();
  return in;
}

}  // namespace

SeriesAudit series_audit(double mu) {
  ModelInputs in;
  in.mu = mu;
  const SystemParams p = build_system(in);
  SystemParams limit;  // mu = 0 is outside build_system's domain but the series accept it
  limit.mu = 0.0;

  SeriesAudit a;
  a.mu = mu;
  a.series = coefficients_series(p);
  a.exact = coefficients_exact(p);
  a.E_constant_printed = coefficients_series(limit).E;
  a.sum_printed_limit = frequency_relations_series(limit).sum_printed;
  a.product_printed = frequency_relations_series(p).product_printed;
  a.product_exact = 27.0 * mu * (1.0 - mu) / 4.0;
  a.critical_as_printed = critical_mass_series(p, CriticalSeriesMode::AsPrinted);
  a.critical_corrected = critical_mass_series(p, CriticalSeriesMode::A2Corrected);
  return a;
}

std::vector<AtlasRow> stability_atlas(const AtlasGrid& grid, const ModelInputs& base,
                                      unsigned threads) {
  const std::size_t nq = grid.q1.size();
  const std::size_t na = grid.A2.size();
  const std::size_t nb = grid.Mb.size();
  const std::size_t nm = grid.mu.size();
  std::vector<AtlasRow> rows(nq * na * nb * nm);

  parallel_for(rows.size(), threads, [&](std::size_t flat) {
    std::size_t rest = flat;
    const std::size_t im = rest % nm;
    rest /= nm;
    const std::size_t ib = rest % nb;
    rest /= nb;
    const std::size_t ia = rest % na;
    const std::size_t iq = rest / na;

    AtlasRow& row = rows[flat];
    row.index = {iq, ia, ib, im};
    row.q1 = grid.q1[iq];
    row.A2 = grid.A2[ia];
    row.Mb = grid.Mb[ib];
    row.mu = grid.mu[im];
    try {
      const SystemParams p = build_system(node_inputs(base, row.mu, row.A2, row.Mb, row.q1));
      row.coeffs = coefficients_exact(p);
      row.report = stability_analysis(*row.coeffs);
    } catch (const Error& e) {
      row.error = e.what();
    }
  });
  return rows;
}

std::vector<CriticalSurfaceRow> critical_mass_surface(const AtlasGrid& grid, const ModelInputs& base,
                                                      const CriticalMassOptions& opts,
                                                      unsigned threads) {
  const std::size_t nq = grid.q1.size();
  const std::size_t na = grid.A2.size();
  const std::size_t nb = grid.Mb.size();
  std::vector<CriticalSurfaceRow> rows(nq * na * nb);

  parallel_for(rows.size(), threads, [&](std::size_t flat) {
    const std::size_t ib = flat % nb;
    const std::size_t ia = (flat / nb) % na;
    const std::size_t iq = flat / (nb * na);
    CriticalSurfaceRow& row = rows[flat];
    row.index = {iq, ia, ib};
    row.q1 = grid.q1[iq];
    row.A2 = grid.A2[ia];
    row.Mb = grid.Mb[ib];
    try {
      row.mu_crit = critical_mass_numeric(node_inputs(base, opts.mu_min, row.A2, row.Mb, row.q1), opts);
    } catch (const Error& e) {
      row.error = e.what();
    }
  });
  return rows;
}

}  // namespace chermnykh
