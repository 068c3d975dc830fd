#pragma once

#include <string>

#include "mrdf/types.hpp"

namespace mrdf {

// Per-clip feature container. Fixed little-endian binary layout, stable
// across versions:
//   bytes 0..7   magic "MRDFFT01"
//   bytes 8..11  uint32 rows (frames T)
//   bytes 12..15 uint32 cols (feature dim D)
//   then rows*cols float64 values, row-major
void write_feature_matrix(const std::string& path, const Mat& m);
Mat read_feature_matrix(const std::string& path);

} // namespace mrdf
