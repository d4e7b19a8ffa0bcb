#pragma once

#include <cstddef>
#include <vector>

#include "emdsparse/grid.hpp"
#include "emdsparse/pyramid.hpp"

namespace emdsparse {

enum class HaarOrientation { horizontal = 0, vertical = 1, diagonal = 2 };

/// Coefficients of the reweighted non-standard Haar map W, n = delta^2 entries.
///
/// Index 0 is the constant coefficient 2 delta * (total mass). The difference
/// coefficients of a cell q at level i >= 1 sit at 1 + 3 * cell_index(q) + o for
/// orientation o, where each one is haar_row_weight(i, o) times a signed
/// quadrant sum:
///   horizontal  NW + SW - NE - SE
///   vertical    NW + NE - SW - SE
///   diagonal    NW + SE - NE - SW
/// With these weights every column of W^-1 has EMD norm exactly 1.
struct HaarCoeffs {
  int delta = 1;
  std::vector<double> values;
};

inline std::size_t haar_index(std::size_t cell, HaarOrientation o) {
  return 1 + 3 * cell + static_cast<std::size_t>(o);
}

/// 2^(i-2) for the horizontal and vertical rows of a level-i cell. The
/// diagonal row carries the extra factor 2/3 + 1/(3 * 4^(i-1)), the exact
/// EMD norm of the checkerboard column 2^(2-3i) (NW + SE - NE - SW).
double haar_row_weight(int level, HaarOrientation o);

/// Weight of the constant row (per pixel).
inline double haar_constant_weight(int delta) { return 2.0 * delta; }

HaarCoeffs haar_transform(const GridImage& x);

/// Exact inverse, O(n).
GridImage haar_inverse(const HaarCoeffs& y);

/// Dense W (row-major, n x n); intended for small delta only.
std::vector<double> haar_matrix(int delta);

struct HaarAlignmentCertificate {
  AlignmentCertificate pyramid;
  /// Coefficient indices of the lifted support (sorted).
  std::vector<std::size_t> coefficients;
  /// |(W x) outside the lifted support|_1.
  double residual_l1 = 0.0;
};

/// Lifts a pyramid certificate S to {constant} together with the three
/// difference coefficients of every cell of S above level 0.
std::vector<std::size_t> lift_to_haar(const Grid& grid, const TreeSupport& support);

HaarAlignmentCertificate haar_alignment_certificate(const GridImage& x, int k, double eps,
                                                    const AlignmentOptions& options = {});

}  // namespace emdsparse
