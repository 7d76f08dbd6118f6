#pragma once

// Space-time observations: one real series per site over a shared time grid.
//
// CSV input/output columns: site_id,lon,lat,time,value (long format).
// Binary layout (little-endian float64): n_sites, n_times, then (x, y) per
// site, the times, and the values site-major.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "field_io.hpp"

namespace sarhcox {

struct SiteCoord {
  double x = 0.0;
  double y = 0.0;
};

class GridSeries {
public:
  GridSeries() = default;
  GridSeries(std::vector<SiteCoord> sites, std::vector<double> times, std::vector<double> values,
             std::vector<std::string> ids = {})
      : sites_(std::move(sites)), times_(std::move(times)), values_(std::move(values)), ids_(std::move(ids)) {
    if (ids_.empty())
      for (std::size_t s = 0; s < sites_.size(); ++s) ids_.push_back(std::to_string(s));
    validate();
  }

  std::size_t n_sites() const { return sites_.size(); }
  std::size_t n_times() const { return times_.size(); }
  const std::vector<SiteCoord>& sites() const { return sites_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  std::span<const double> series(std::size_t s) const { return {values_.data() + s * n_times(), n_times()}; }
  std::span<double> series(std::size_t s) { return {values_.data() + s * n_times(), n_times()}; }
  double operator()(std::size_t s, std::size_t t) const { return values_[s * n_times() + t]; }

  bool nonnegative() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0; });
  }

  /// Copy without the listed sites.
  GridSeries without(const std::vector<std::size_t>& drop) const {
    std::vector<SiteCoord> s;
    std::vector<double> v;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n_sites(); ++i) {
      if (std::find(drop.begin(), drop.end(), i) != drop.end()) continue;
      s.push_back(sites_[i]);
      ids.push_back(ids_[i]);
      auto ser = series(i);
      v.insert(v.end(), ser.begin(), ser.end());
    }
    return GridSeries(std::move(s), times_, std::move(v), std::move(ids));
  }

private:
  void validate() const {
    if (sites_.empty()) throw DomainError("series needs at least one site");
    if (times_.empty()) throw DomainError("series needs at least one time");
    for (std::size_t t = 1; t < times_.size(); ++t)
      if (!(times_[t] > times_[t - 1])) throw DomainError("times must be strictly increasing");
    if (values_.size() != sites_.size() * times_.size()) throw DomainError("values extent must be sites x times");
    if (ids_.size() != sites_.size()) throw DomainError("one id per site required");
    for (double v : values_)
      if (!std::isfinite(v)) throw DomainError("series values must be finite");
  }

  std::vector<SiteCoord> sites_;
  std::vector<double> times_;
  std::vector<double> values_;
  std::vector<std::string> ids_;
};

namespace io {

inline void write_series_csv(std::ostream& os, const GridSeries& g) {
  os << "site_id,lon,lat,time,value\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t s = 0; s < g.n_sites(); ++s)
    for (std::size_t t = 0; t < g.n_times(); ++t)
      os << g.ids()[s] << ',' << g.sites()[s].x << ',' << g.sites()[s].y << ',' << g.times()[t] << ',' << g(s, t)
         << '\n';
}

/// Reads the long CSV layout. Every site must report every time stamp.
inline GridSeries read_series_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("empty series CSV");
  struct Rec { double x, y; std::map<double, double> v; };
  std::map<std::string, Rec> by_site;
  std::vector<std::string> order;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cols.push_back(c);
    if (cols.size() != 5) throw FormatError("series CSV line " + std::to_string(lineno) + ": expected 5 columns");
    double x, y, t, v;
    try {
      x = std::stod(cols[1]);
      y = std::stod(cols[2]);
      t = std::stod(cols[3]);
      v = std::stod(cols[4]);
    } catch (const std::exception&) {
      throw FormatError("series CSV line " + std::to_string(lineno) + ": non-numeric field");
    }
    auto [it, fresh] = by_site.try_emplace(cols[0], Rec{x, y, {}});
    if (fresh) order.push_back(cols[0]);
    if (it->second.x != x || it->second.y != y)
      throw FormatError("site " + cols[0] + " reported with two coordinates");
    if (!it->second.v.emplace(t, v).second) throw FormatError("site " + cols[0] + " repeats a time stamp");
  }
  if (order.empty()) throw FormatError("series CSV has no records");
  std::vector<double> times;
  for (const auto& [t, v] : by_site[order.front()].v) times.push_back(t);
  std::vector<SiteCoord> sites;
  std::vector<double> values;
  for (const auto& id : order) {
    const Rec& r = by_site[id];
    if (r.v.size() != times.size()) throw FormatError("site " + id + " does not cover the common time grid");
    std::size_t t = 0;
    for (const auto& [tt, v] : r.v) {
      if (tt != times[t++]) throw FormatError("site " + id + " does not cover the common time grid");
      values.push_back(v);
    }
    sites.push_back({r.x, r.y});
  }
  return GridSeries(std::move(sites), std::move(times), std::move(values), std::move(order));
}

inline void write_series_binary(std::ostream& os, const GridSeries& g) {
  detail::write_f64(os, static_cast<double>(g.n_sites()));
  detail::write_f64(os, static_cast<double>(g.n_times()));
  for (const auto& s : g.sites()) {
    detail::write_f64(os, s.x);
    detail::write_f64(os, s.y);
  }
  for (double t : g.times()) detail::write_f64(os, t);
  for (double v : g.values()) detail::write_f64(os, v);
  if (!os) throw FormatError("failed writing binary series");
}

inline GridSeries read_series_binary(std::istream& is) {
  const int ns = detail::header_int(detail::read_f64(is), "n_sites");
  const int nt = detail::header_int(detail::read_f64(is), "n_times");
  std::vector<SiteCoord> sites(ns);
  for (auto& s : sites) {
    s.x = detail::read_f64(is);
    s.y = detail::read_f64(is);
  }
  std::vector<double> times(nt), values(static_cast<std::size_t>(ns) * nt);
  for (double& t : times) t = detail::read_f64(is);
  for (double& v : values) v = detail::read_f64(is);
  return GridSeries(std::move(sites), std::move(times), std::move(values));
}

inline void save_series_binary(const std::string& path, const GridSeries& g) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  write_series_binary(os, g);
}

inline GridSeries load_series_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path);
  return read_series_binary(is);
}

inline GridSeries load_series_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path);
  return read_series_csv(is);
}

inline void save_series_csv(const std::string& path, const GridSeries& g) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  write_series_csv(os, g);
}

}  // namespace io
}  // namespace sarhcox
