#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "gmvq/array.hpp"

namespace gmvq {

// All on-disk formats are little-endian; this build targets LE hosts and
// writes native byte order directly.
static_assert(std::endian::native == std::endian::little,
              "gmvq file formats are little-endian; big-endian hosts are unsupported");

inline void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline std::uint32_t read_u32(std::istream& is, const char* what) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw std::runtime_error(std::string("gmvq: truncated file while reading ") + what);
  return v;
}

inline void write_magic(std::ostream& os) { os.write("GMVQ", 4); }

inline void read_magic(std::istream& is, const char* what) {
  char m[4] = {};
  is.read(m, 4);
  if (!is || m[0] != 'G' || m[1] != 'M' || m[2] != 'V' || m[3] != 'Q')
    throw std::runtime_error(std::string("gmvq: bad magic bytes in ") + what);
}

/// Writes a matrix as rows*cols little-endian 32-bit floats, row-major.
inline void write_f32_block(std::ostream& os, const Mat& m) {
  MatF f = m.cast<float>();
  os.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(sizeof(float) * f.size()));
}

inline Mat read_f32_block(std::istream& is, Index rows, Index cols, const char* what) {
  MatF f(rows, cols);
  is.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(sizeof(float) * f.size()));
  if (!is) throw std::runtime_error(std::string("gmvq: truncated file while reading ") + what);
  return f.cast<double>();
}

}  // namespace gmvq
