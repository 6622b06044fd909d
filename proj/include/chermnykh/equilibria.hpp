#pragma once

#include <array>
#include <string_view>

#include "chermnykh/model.hpp"

namespace chermnykh {

enum class PointLabel { L1, L2, L3, L4, L5 };
enum class PointMethod { ClosedForm, Series, Refined };

std::string_view to_string(PointLabel label) noexcept;
std::string_view to_string(PointMethod method) noexcept;

struct EquilibriumPoint {
  PointLabel label = PointLabel::L4;
  double x = 0.0;
  double y = 0.0;
  double residual = 0.0;  // max(|Omega_x|, |Omega_y|)
  PointMethod method = PointMethod::Refined;
  int iterations = 0;
};

struct EquilibriumRadii {
  double r1 = 1.0;
  double r2 = 1.0;
};

/// First-order distances of the triangular points from each primary.
EquilibriumRadii equilibrium_radii(const SystemParams& p);

/// Both +/- branches of the x loci at a given y: circles about the bigger
/// primary (r1) and about the smaller primary (r2).
struct DistanceLoci {
  std::array<double, 2> r1_locus;  // {-, +} branch
  std::array<double, 2> r2_locus;
};

/// Throws NegativeRadicand when |y| lies outside either locus.
DistanceLoci distance_loci(const SystemParams& p, double y);

/// Closed-form L4 and L5. Throws DegenerateTriangular when the y radicand is
/// negative or y collapses to zero (q1 = 0).
std::array<EquilibriumPoint, 2> triangular_points_closed(const SystemParams& p);

struct SeriesTriangular {
  EquilibriumPoint l4;
  double a = 0.0;  // x offset of L4 from the bigger primary
  double b = 0.0;  // y offset
};

/// Small-epsilon expansion of L4 together with the shifted-origin offsets (a, b).
SeriesTriangular triangular_points_series(const SystemParams& p);

struct RefineOptions {
  double tolerance = 1e-12;
  int max_iterations = 50;
};

/// Newton iteration on the exact gradient. Points starting on the x-axis stay on it.
EquilibriumPoint refine_equilibrium(double x0, double y0, const SystemParams& p,
                                    const RefineOptions& opts = {});

/// L1 (between the primaries), L2 (beyond the smaller one), L3 (beyond the bigger one).
std::array<EquilibriumPoint, 3> collinear_points(const SystemParams& p,
                                                 const RefineOptions& opts = {});

/// Refined L4, seeded from the closed form, then the series, then the classical geometry.
EquilibriumPoint triangular_point(const SystemParams& p, const RefineOptions& opts = {});

}  // namespace chermnykh
