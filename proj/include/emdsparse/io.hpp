#pragma once

#include <iosfwd>
#include <string>

#include "emdsparse/grid.hpp"

namespace emdsparse {

// Text formats:
//   EMDIMG <delta>            followed by delta^2 values, row-major
//   EMDPYR v1 <delta>         followed by (4 delta^2 - 1) / 3 values in Grid order
// Values are written in shortest round-trip decimal form, so every double
// (in particular every integer-valued image) survives write -> read bit-exactly.

void write_image(std::ostream& out, const GridImage& image);
GridImage read_image(std::istream& in);
void save_image(const std::string& path, const GridImage& image);
GridImage load_image(const std::string& path);

void write_pyramid(std::ostream& out, const PyramidCoeffs& coeffs);
PyramidCoeffs read_pyramid(std::istream& in);
void save_pyramid(const std::string& path, const PyramidCoeffs& coeffs);
PyramidCoeffs load_pyramid(const std::string& path);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_exact(double v);

}  // namespace emdsparse
