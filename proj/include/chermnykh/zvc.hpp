#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "chermnykh/equilibria.hpp"
#include "chermnykh/model.hpp"

namespace chermnykh {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator<(const Point2& a, const Point2& b) noexcept {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  }
  friend bool operator==(const Point2&, const Point2&) = default;
};

struct Bounds {
  double xmin = -1.5;
  double xmax = 1.5;
  double ymin = -1.5;
  double ymax = 1.5;
};

/// Sampling lattice: `resolution` cells per axis, i.e. resolution + 1 nodes.
struct GridSpec {
  Bounds bounds;
  std::size_t resolution = 256;
  double dx() const noexcept { return (bounds.xmax - bounds.xmin) / static_cast<double>(resolution); }
  double dy() const noexcept { return (bounds.ymax - bounds.ymin) / static_cast<double>(resolution); }
};

using Polyline = std::vector<Point2>;

struct ContourSet {
  double level = 0.0;
  std::vector<Polyline> polylines;
  std::vector<bool> closed;  // closed chains repeat their first vertex at the end
  GridSpec grid;
};

struct ContourOptions {
  /// Nodes closer than this to a primary are treated as missing.
  double mask_radius = 1e-6;
  unsigned threads = 0;
};

/// Level set 2 Omega(x, y) = C by marching squares. Saddle cells are split according to the
/// sign at the cell centre; cells that contain a primary are skipped. A level that never
/// crosses the grid gives an empty set.
ContourSet zvc_contours(double C, const GridSpec& grid, const SystemParams& p,
                        const ContourOptions& opts = {});

enum class Region { Allowed, Forbidden };
std::string_view to_string(Region r) noexcept;

/// Allowed iff 2 Omega(x, y) >= C.
Region region_classify(double x, double y, double C, const SystemParams& p);

struct CriticalLevels {
  std::array<EquilibriumPoint, 5> points;
  std::array<double, 5> C{};  // indexed by PointLabel
  double at(PointLabel l) const noexcept { return C[static_cast<std::size_t>(l)]; }
};

/// C = 2 Omega at each refined equilibrium.
CriticalLevels critical_levels(const SystemParams& p, const RefineOptions& opts = {});

/// Unsigned shoelace area of a closed polyline.
double polygon_area(const Polyline& poly);

/// Even-odd ray casting test.
bool point_in_polygon(const Polyline& poly, double x, double y);

/// Indices of closed chains that enclose (x, y).
std::vector<std::size_t> enclosing_loops(const ContourSet& set, double x, double y);

/// `# level=<C>` header, `x,y` column line, one vertex per row, blank line between chains.
std::string contour_csv(const ContourSet& set, const std::vector<std::string>& metadata = {});

}  // namespace chermnykh
