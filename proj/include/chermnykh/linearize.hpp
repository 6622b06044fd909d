#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chermnykh/equilibria.hpp"
#include "chermnykh/model.hpp"

namespace chermnykh {

enum class CoeffSource { Exact, Series };

/// Coefficients of H2 = (px^2 + py^2)/2 + n (y px - x py) + E x^2 + F y^2 + G x y.
struct QuadraticCoeffs {
  double E = 0.0;
  double F = 0.0;
  double G = 0.0;
  double n = 1.0;
  CoeffSource source = CoeffSource::Exact;
};

/// E = n^2/2 - Omega_xx/2, F = n^2/2 - Omega_yy/2, G = -Omega_xy at the given equilibrium.
QuadraticCoeffs coefficients_at(const EquilibriumPoint& point, const SystemParams& p);

/// Same, at the refined L4.
QuadraticCoeffs coefficients_exact(const SystemParams& p, const RefineOptions& opts = {});

/// The bracketed perturbation series for E, F, G evaluated term by term as printed.
/// Not corrected: the E constant is 2/1728 where the classical value is 216/1728.
QuadraticCoeffs coefficients_series(const SystemParams& p);

/// Expansion of the Lagrangian about L4 up to second order.
struct LagrangianTerms {
  double a = 0.0;  // x* + mu
  double b = 0.0;  // y*

  // Exact Taylor terms of the Lagrangian at rest about the refined L4.
  double L0 = 0.0;                   // Omega(L4)
  std::array<double, 2> L1{};        // (Omega_x, Omega_y)
  std::array<double, 3> L2_potential{};  // coefficients of x^2, xy, y^2
  double L2_kinetic = 0.5;           // coefficient of (xdot^2 + ydot^2)
  double L2_coriolis = 0.0;          // coefficient of (x ydot - xdot y), equals n
  QuadraticCoeffs coeffs;            // E, F, G recovered from L2_potential

  // The same terms evaluated from the printed expressions at (a, b).
  double L0_printed = 0.0;
  std::array<double, 2> L1_printed{};
};

LagrangianTerms lagrangian_terms(const SystemParams& p, const RefineOptions& opts = {});

enum class Verdict { Stable, NonPositiveDiscriminant, NonNegativeRoot };
std::string_view to_string(Verdict v) noexcept;

struct StabilityReport {
  std::array<std::complex<double>, 2> lambda_squared{};
  double D = 0.0;
  double sum = 0.0;      // -2 (E + F + n^2)
  double product = 0.0;  // 4EF - G^2 + n^4 - 2 n^2 (E + F)
  std::optional<double> omega1;  // larger frequency
  std::optional<double> omega2;
  bool stable = false;
  Verdict verdict = Verdict::NonPositiveDiscriminant;
};

/// Solves lambda^4 + 2(E+F+n^2) lambda^2 + (4EF - G^2 + n^4 - 2n^2(E+F)) = 0 as a quadratic
/// in lambda^2. Stable requires D > 0 and both lambda^2 roots negative.
StabilityReport stability_analysis(const QuadraticCoeffs& c);

struct FrequencyRelations {
  double sum_printed = 0.0;      // omega1^2 + omega2^2, printed series
  double product_printed = 0.0;  // omega1^2 omega2^2, printed series
  std::optional<double> sum_exact;
  std::optional<double> product_exact;
};

/// Evaluates the printed frequency relations. The exact values come from the exact
/// coefficients when mu > 0 and L4 exists. A SystemParams with mu = 0 is accepted here.
FrequencyRelations frequency_relations_series(const SystemParams& p);

struct CriticalMassOptions {
  double mu_min = 1e-6;
  double mu_max = 0.5;
  double tolerance = 1e-9;
  int scan_points = 64;
  RefineOptions refine;
};

/// Stable/unstable verdict at mass ratio mu, everything else from `base`.
/// Parameter sets without a refinable L4 count as not stable.
bool is_stable_at(double mu, const ModelInputs& base, const RefineOptions& refine = {});

/// Smallest mass ratio at which L4 loses linear stability (base.mu is ignored).
/// A coarse scan locates the first stable-to-unstable transition; bisection narrows it.
double critical_mass_numeric(const ModelInputs& base, const CriticalMassOptions& opts = {});

enum class CriticalSeriesMode { AsPrinted, A2Corrected };

inline constexpr double kRouthCriticalMass = 0.0385209;

/// Right-hand side of the printed critical-mass inequality. AsPrinted subtracts the trailing
/// bracket outright; A2Corrected multiplies that bracket by A2.
double critical_mass_series(const SystemParams& p,
                            CriticalSeriesMode mode = CriticalSeriesMode::A2Corrected);

/// Classical-limit evaluation of every printed series next to its exact counterpart.
struct SeriesAudit {
  double mu = 0.0;
  QuadraticCoeffs series;  // printed E, F, G with eps = A2 = Mb = 0
  QuadraticCoeffs exact;   // exact coefficients at the same mu
  double E_constant_printed = 0.0;  // printed E at eps = A2 = Mb = mu = 0
  double E_constant_exact = 0.125;
  double sum_printed_limit = 0.0;   // printed omega1^2 + omega2^2 at eps = A2 = Mb = mu = 0
  double sum_exact_limit = 1.0;
  double product_printed = 0.0;     // printed omega1^2 omega2^2 at eps = A2 = Mb = 0
  double product_exact = 0.0;       // 27 mu (1 - mu) / 4
  double critical_as_printed = 0.0;
  double critical_corrected = 0.0;
};

SeriesAudit series_audit(double mu);

struct AtlasGrid {
  std::vector<double> mu;
  std::vector<double> A2;
  std::vector<double> Mb;
  std::vector<double> q1;
};

struct AtlasRow {
  std::array<std::size_t, 4> index{};  // (q1, A2, Mb, mu)
  double q1 = 0.0;
  double A2 = 0.0;
  double Mb = 0.0;
  double mu = 0.0;
  std::optional<QuadraticCoeffs> coeffs;
  std::optional<StabilityReport> report;
  std::string error;
};

/// One row per grid node, ordered lexicographically in (q1, A2, Mb, mu) indices.
/// Node failures are recorded in the row. `threads` = 0 means hardware concurrency.
std::vector<AtlasRow> stability_atlas(const AtlasGrid& grid, const ModelInputs& base,
                                      unsigned threads = 0);

struct CriticalSurfaceRow {
  std::array<std::size_t, 3> index{};  // (q1, A2, Mb)
  double q1 = 0.0;
  double A2 = 0.0;
  double Mb = 0.0;
  std::optional<double> mu_crit;
  std::string error;
};

/// mu_crit over the (q1, A2, Mb) part of the grid; grid.mu is ignored.
std::vector<CriticalSurfaceRow> critical_mass_surface(const AtlasGrid& grid, const ModelInputs& base,
                                                      const CriticalMassOptions& opts = {},
                                                      unsigned threads = 0);

}  // namespace chermnykh
