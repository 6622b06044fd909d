#include "chermnykh/zvc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>

#include <fmt/core.h>

#include "chermnykh/error.hpp"
#include "chermnykh/parallel.hpp"

namespace chermnykh {

std::string_view to_string(Region r) noexcept {
  return r == Region::Allowed ? "allowed" : "forbidden";
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Lattice {
  std::size_t nodes = 0;  // per axis
  double x0 = 0.0, y0 = 0.0, dx = 0.0, dy = 0.0;
  std::vector<double> f;  // row-major, f[j * nodes + i] = 2 Omega - C

  double x(std::size_t i) const { return x0 + dx * static_cast<double>(i); }
  double y(std::size_t j) const { return y0 + dy * static_cast<double>(j); }
  double at(std::size_t i, std::size_t j) const { return f[j * nodes + i]; }
};

// Edge keys: horizontal edge from node (i, j) to (i+1, j) is even, vertical edge from
// (i, j) to (i, j+1) is odd.
std::uint64_t hkey(const Lattice& L, std::size_t i, std::size_t j) { return 2 * (j * L.nodes + i); }
std::uint64_t vkey(const Lattice& L, std::size_t i, std::size_t j) { return 2 * (j * L.nodes + i) + 1; }

Point2 edge_point(const Lattice& L, std::uint64_t key) {
  const std::size_t node = key / 2;
  const std::size_t i = node % L.nodes;
  const std::size_t j = node / L.nodes;
  const bool vertical = key % 2 == 1;
  const std::size_t i1 = vertical ? i : i + 1;
  const std::size_t j1 = vertical ? j + 1 : j;
  const double fa = L.at(i, j);
  const double fb = L.at(i1, j1);
  const double t = fa == fb ? 0.5 : fa / (fa - fb);
  return {L.x(i) + t * (L.x(i1) - L.x(i)), L.y(j) + t * (L.y(j1) - L.y(j))};
}

bool cell_contains_primary(double xa, double xb, double ya, double yb, const SystemParams& p) {
  if (!(ya <= 0.0 && 0.0 <= yb)) return false;
  const double big = -p.mu;
  const double small = 1.0 - p.mu;
  return (xa <= small && small <= xb) || (p.q1() > 0.0 && xa <= big && big <= xb);
}

double safe_level(double x, double y, double C, const SystemParams& p, double mask) {
  const auto [r1, r2] = primary_distances(x, y, p);
  if (r2 < mask || (p.q1() > 0.0 && r1 < mask)) return kNaN;
  try {
    return 2.0 * effective_potential(x, y, p) - C;
  } catch (const Error&) {
    return kNaN;
  }
}

void canonicalize(Polyline& poly, bool closed) {
  poly.erase(std::unique(poly.begin(), poly.end()), poly.end());
  if (closed) {
    if (poly.size() > 1 && poly.front() == poly.back()) poly.pop_back();
    if (poly.size() < 3) {
      poly.push_back(poly.front());
      return;
    }
    const auto first = std::min_element(poly.begin(), poly.end());
    std::rotate(poly.begin(), first, poly.end());
    if (poly.back() < poly[1]) std::reverse(poly.begin() + 1, poly.end());
    poly.push_back(poly.front());
  } else if (poly.back() < poly.front()) {
    std::reverse(poly.begin(), poly.end());
  }
}

}  // namespace

ContourSet zvc_contours(double C, const GridSpec& grid, const SystemParams& p, const ContourOptions& opts) {
  if (grid.resolution < 16) throw Error(ErrorCode::InvalidArgument, "resolution must be at least 16");
  const Bounds& b = grid.bounds;
  if (!(b.xmax > b.xmin) || !(b.ymax > b.ymin)) throw Error(ErrorCode::InvalidArgument, "empty bounds");
  if (!std::isfinite(C)) throw Error(ErrorCode::InvalidArgument, "contour level must be finite");

  Lattice L;
  L.nodes = grid.resolution + 1;
  L.x0 = b.xmin;
  L.y0 = b.ymin;
  L.dx = grid.dx();
  L.dy = grid.dy();
  L.f.assign(L.nodes * L.nodes, 0.0);
  parallel_for(L.nodes, opts.threads, [&](std::size_t j) {
    for (std::size_t i = 0; i < L.nodes; ++i) L.f[j * L.nodes + i] = safe_level(L.x(i), L.y(j), C, p, opts.mask_radius);
  });

  struct Segment {
    std::uint64_t a, b;
  };
  std::vector<Segment> segments;
  const std::size_t cells = grid.resolution;
  for (std::size_t j = 0; j < cells; ++j) {
    for (std::size_t i = 0; i < cells; ++i) {
      const std::array<double, 4> v{L.at(i, j), L.at(i + 1, j), L.at(i + 1, j + 1), L.at(i, j + 1)};
      if (std::any_of(v.begin(), v.end(), [](double f) { return std::isnan(f); })) continue;
      if (cell_contains_primary(L.x(i), L.x(i + 1), L.y(j), L.y(j + 1), p)) continue;
      std::array<bool, 4> in{};
      for (int k = 0; k < 4; ++k) in[k] = v[k] >= 0.0;
      // Edges: bottom (v0 v1), right (v1 v2), top (v3 v2), left (v0 v3).
      const std::array<std::uint64_t, 4> key{hkey(L, i, j), vkey(L, i + 1, j), hkey(L, i, j + 1), vkey(L, i, j)};
      const std::array<bool, 4> cut{in[0] != in[1], in[1] != in[2], in[3] != in[2], in[0] != in[3]};
      const int ncut = static_cast<int>(std::count(cut.begin(), cut.end(), true));
      if (ncut == 2) {
        std::array<std::uint64_t, 2> ends{};
        int m = 0;
        for (int k = 0; k < 4; ++k)
          if (cut[k]) ends[m++] = key[k];
        segments.push_back({ends[0], ends[1]});
      } else if (ncut == 4) {
        const double centre = safe_level(0.5 * (L.x(i) + L.x(i + 1)), 0.5 * (L.y(j) + L.y(j + 1)), C, p, opts.mask_radius);
        const bool centre_in = std::isnan(centre) ? (v[0] + v[1] + v[2] + v[3] >= 0.0) : centre >= 0.0;
        if (centre_in == in[0]) {
          // v0 and v2 joined through the centre: isolate v1 and v3.
          segments.push_back({key[0], key[1]});
          segments.push_back({key[2], key[3]});
        } else {
          segments.push_back({key[3], key[0]});
          segments.push_back({key[1], key[2]});
        }
      }
    }
  }

  std::unordered_map<std::uint64_t, std::array<std::size_t, 2>> incident;
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  incident.reserve(segments.size() * 2);
  auto attach = [&](std::uint64_t k, std::size_t s) {
    auto [it, fresh] = incident.try_emplace(k, std::array<std::size_t, 2>{none, none});
    (it->second[0] == none ? it->second[0] : it->second[1]) = s;
  };
  for (std::size_t s = 0; s < segments.size(); ++s) {
    attach(segments[s].a, s);
    attach(segments[s].b, s);
  }

  std::vector<bool> used(segments.size(), false);
  // Walk from `from` across edge `k`, consuming segments; returns the chain of edge keys.
  auto walk = [&](std::uint64_t k, std::size_t from, std::vector<std::uint64_t>& chain) {
    std::size_t current = from;
    while (true) {
      const auto& inc = incident.at(k);
      const std::size_t next = inc[0] == current ? inc[1] : inc[0];
      if (next == none || used[next]) return;
      used[next] = true;
      k = segments[next].a == k ? segments[next].b : segments[next].a;
      chain.push_back(k);
      current = next;
    }
  };

  ContourSet out;
  out.level = C;
  out.grid = grid;
  std::vector<std::pair<Polyline, bool>> chains;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (used[s]) continue;
    used[s] = true;
    std::vector<std::uint64_t> forward{segments[s].a, segments[s].b};
    walk(segments[s].b, s, forward);
    bool closed = forward.size() > 2 && forward.back() == forward.front();
    std::vector<std::uint64_t> keys;
    if (closed) {
      keys = std::move(forward);
    } else {
      std::vector<std::uint64_t> backward;
      walk(segments[s].a, s, backward);
      keys.assign(backward.rbegin(), backward.rend());
      keys.insert(keys.end(), forward.begin(), forward.end());
    }
    Polyline poly;
    poly.reserve(keys.size());
    for (const auto k : keys) poly.push_back(edge_point(L, k));
    canonicalize(poly, closed);
    if (poly.size() < 2) continue;
    chains.emplace_back(std::move(poly), closed);
  }
  std::sort(chains.begin(), chains.end(), [](const auto& a, const auto& b) {
    if (a.first.front() == b.first.front()) return a.first.size() < b.first.size();
    return a.first.front() < b.first.front();
  });
  for (auto& [poly, closed] : chains) {
    out.polylines.push_back(std::move(poly));
    out.closed.push_back(closed);
  }
  return out;
}

Region region_classify(double x, double y, double C, const SystemParams& p) {
  return 2.0 * effective_potential(x, y, p) >= C ? Region::Allowed : Region::Forbidden;
}

CriticalLevels critical_levels(const SystemParams& p, const RefineOptions& opts) {
  CriticalLevels out;
  const auto collinear = collinear_points(p, opts);
  const EquilibriumPoint l4 = triangular_point(p, opts);
  EquilibriumPoint l5 = l4;
  l5.label = PointLabel::L5;
  l5.y = -l4.y;
  out.points = {collinear[0], collinear[1], collinear[2], l4, l5};
  for (std::size_t k = 0; k < 5; ++k) out.C[k] = 2.0 * effective_potential(out.points[k].x, out.points[k].y, p);
  return out;
}

double polygon_area(const Polyline& poly) {
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t k = 0; k + 1 < poly.size(); ++k) twice += poly[k].x * poly[k + 1].y - poly[k + 1].x * poly[k].y;
  const Point2& last = poly.back();
  const Point2& first = poly.front();
  if (!(last == first)) twice += last.x * first.y - first.x * last.y;
  return 0.5 * std::abs(twice);
}

bool point_in_polygon(const Polyline& poly, double x, double y) {
  bool inside = false;
  const std::size_t m = poly.size();
  for (std::size_t a = 0, b = m - 1; a < m; b = a++) {
    const Point2& pa = poly[a];
    const Point2& pb = poly[b];
    if ((pa.y > y) != (pb.y > y) && x < (pb.x - pa.x) * (y - pa.y) / (pb.y - pa.y) + pa.x) inside = !inside;
  }
  return inside;
}

std::vector<std::size_t> enclosing_loops(const ContourSet& set, double x, double y) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < set.polylines.size(); ++k) {
    if (set.closed[k] && point_in_polygon(set.polylines[k], x, y)) idx.push_back(k);
  }
  return idx;
}

std::string contour_csv(const ContourSet& set, const std::vector<std::string>& metadata) {
  std::string out = fmt::format("# level={:.17g}\n", set.level);
  for (const auto& line : metadata) out += "# " + line + "\n";
  out += "x,y\n";
  for (std::size_t k = 0; k < set.polylines.size(); ++k) {
    if (k > 0) out += "\n";
    for (const auto& v : set.polylines[k]) out += fmt::format("{:.17g},{:.17g}\n", v.x, v.y);
  }
  return out;
}

}  // namespace chermnykh
