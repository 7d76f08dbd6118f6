#pragma once

// Inverse distance weighting from scattered sites onto a rectangular lattice.

#include <cmath>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "hilbert.hpp"
#include "series.hpp"

namespace sarhcox {

/// Lattice node (i, j) sits at (x0 + i dx, y0 + j dy).
struct LatticeGeometry {
  LatticeDims dims{};
  double x0 = 0.0, y0 = 0.0, dx = 1.0, dy = 1.0;

  SiteCoord node(int i, int j) const { return {x0 + i * dx, y0 + j * dy}; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * dims.n2 + j; }

  /// Nearest lattice node to a point (clamped to the lattice).
  Site nearest(SiteCoord p) const {
    const int i = std::clamp(static_cast<int>(std::lround((p.x - x0) / dx)), 0, dims.n1 - 1);
    const int j = std::clamp(static_cast<int>(std::lround((p.y - y0) / dy)), 0, dims.n2 - 1);
    return {i, j};
  }
};

struct IdwOptions {
  double power = 2.0;
  /// Only sources within this Euclidean distance contribute; infinity uses all.
  double radius = std::numeric_limits<double>::infinity();
  /// Distances at or below this count as coincident.
  double coincidence_tol = 1e-9;
};

/// Each lattice node receives sum_s w_s v_s / sum_s w_s with w_s = d_s^{-power};
/// a node coinciding with a source takes that source's series. Output sites
/// are the nodes in (i, j) row-major order.
inline GridSeries idw_interpolate(const GridSeries& src, const LatticeGeometry& geo, const IdwOptions& opt = {}) {
  if (!(opt.power > 0.0)) throw DomainError("IDW power must be positive");
  if (geo.dims.n1 < 1 || geo.dims.n2 < 1) throw DomainError("IDW target lattice must be non-empty");
  const std::size_t nt = src.n_times();
  std::vector<SiteCoord> nodes;
  std::vector<double> out(geo.dims.size() * nt, 0.0);
  std::vector<std::pair<std::size_t, double>> w;
  for (int i = 0; i < geo.dims.n1; ++i)
    for (int j = 0; j < geo.dims.n2; ++j) {
      const SiteCoord q = geo.node(i, j);
      nodes.push_back(q);
      double* dst = out.data() + geo.index(i, j) * nt;
      w.clear();
      std::vector<std::size_t> hits;
      for (std::size_t s = 0; s < src.n_sites(); ++s) {
        const double d = std::hypot(src.sites()[s].x - q.x, src.sites()[s].y - q.y);
        if (d <= opt.coincidence_tol) hits.push_back(s);
        else if (d <= opt.radius) w.emplace_back(s, std::pow(d, -opt.power));
      }
      if (!hits.empty()) {
        for (std::size_t h = 1; h < hits.size(); ++h) {
          auto a = src.series(hits[0]), b = src.series(hits[h]);
          if (!std::equal(a.begin(), a.end(), b.begin()))
            throw AmbiguityError("lattice node (" + std::to_string(i) + "," + std::to_string(j) +
                                 ") coincides with sources of different values");
        }
        auto a = src.series(hits[0]);
        std::copy(a.begin(), a.end(), dst);
        continue;
      }
      if (w.empty())
        throw DomainError("no source within the IDW radius of node (" + std::to_string(i) + "," +
                          std::to_string(j) + ")");
      double total = 0.0;
      for (const auto& [s, ws] : w) total += ws;
      for (const auto& [s, ws] : w) {
        auto v = src.series(s);
        const double a = ws / total;
        for (std::size_t t = 0; t < nt; ++t) dst[t] += a * v[t];
      }
    }
  return GridSeries(std::move(nodes), src.times(), std::move(out));
}

}  // namespace sarhcox
