#pragma once

// CoeffField serialization.
//
// Binary layout (all values little-endian IEEE-754 float64):
//   header: N1, N2, M, support_length
//   body:   N1*N2*M coefficients, order (i, j, k) with k fastest
//
// CSV layout: header line "i,j,k,value", one row per coefficient, k 1-based.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "hilbert.hpp"

namespace sarhcox::io {

namespace detail {

inline void write_f64(std::ostream& os, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  unsigned char buf[8];
  std::memcpy(buf, &bits, 8);
  os.write(reinterpret_cast<const char*>(buf), 8);
}

inline double read_f64(std::istream& is) {
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8)) throw FormatError("unexpected end of binary stream");
  std::uint64_t bits;
  std::memcpy(&bits, buf, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return std::bit_cast<double>(bits);
}

inline int header_int(double v, const char* name) {
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e9)
    throw FormatError(std::string("invalid binary header field ") + name);
  return static_cast<int>(v);
}

}  // namespace detail

inline void write_binary(std::ostream& os, const CoeffField& field) {
  detail::write_f64(os, field.n1());
  detail::write_f64(os, field.n2());
  detail::write_f64(os, field.n_modes());
  detail::write_f64(os, field.basis().support_length);
  for (double v : field.data()) detail::write_f64(os, v);
  if (!os) throw FormatError("failed writing binary coefficient field");
}

inline CoeffField read_binary(std::istream& is,
                              BasisNormalization norm = BasisNormalization::sine) {
  const int n1 = detail::header_int(detail::read_f64(is), "N1");
  const int n2 = detail::header_int(detail::read_f64(is), "N2");
  const int m = detail::header_int(detail::read_f64(is), "M");
  const double length = detail::read_f64(is);
  std::vector<double> data(static_cast<std::size_t>(n1) * n2 * m);
  for (double& v : data) v = detail::read_f64(is);
  return CoeffField({n1, n2}, BasisSpec(length, m, norm), std::move(data));
}

inline void save_binary(const std::string& path, const CoeffField& field) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  write_binary(os, field);
}

inline CoeffField load_binary(const std::string& path,
                              BasisNormalization norm = BasisNormalization::sine) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path);
  return read_binary(is, norm);
}

inline void write_csv(std::ostream& os, const CoeffField& field) {
  os << "i,j,k,value\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int i = 0; i < field.n1(); ++i)
    for (int j = 0; j < field.n2(); ++j)
      for (int k = 0; k < field.n_modes(); ++k) os << i << ',' << j << ',' << k + 1 << ',' << field(i, j, k) << '\n';
}

/// Reads the CSV layout; dims and M are inferred from the largest indices.
inline CoeffField read_csv(std::istream& is, double support_length) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("empty coefficient CSV");
  struct Row { int i, j, k; double v; };
  std::vector<Row> rows;
  int n1 = 0, n2 = 0, m = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    Row r{};
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(ls >> r.i >> c1 >> r.j >> c2 >> r.k >> c3 >> r.v) || c1 != ',' || c2 != ',' || c3 != ',')
      throw FormatError("malformed coefficient CSV row: " + line);
    if (r.i < 0 || r.j < 0 || r.k < 1) throw FormatError("negative index in coefficient CSV");
    n1 = std::max(n1, r.i + 1);
    n2 = std::max(n2, r.j + 1);
    m = std::max(m, r.k);
    rows.push_back(r);
  }
  if (rows.size() != static_cast<std::size_t>(n1) * n2 * m)
    throw FormatError("coefficient CSV does not cover a full lattice");
  CoeffField field({n1, n2}, BasisSpec(support_length, m));
  for (const Row& r : rows) field(r.i, r.j, r.k - 1) = r.v;
  return field;
}

}  // namespace sarhcox::io
